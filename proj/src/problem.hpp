#ifndef GHLAB_PROBLEM_HPP
#define GHLAB_PROBLEM_HPP

#include <json.hpp>

#include <optional>
#include <string>

#include "diophantine.hpp"
#include "fields.hpp"
#include "ghcheck.hpp"
#include "operator.hpp"

namespace ghlab {

/// Problem-file or dimension errors; CLI exit code 2.
struct spec_error : std::runtime_error {
  explicit spec_error(const std::string& what) : std::runtime_error(what) {}
};

struct AnalysisParams {
  Rational lambda_max = Rational(100);
  long radius = 100;
  std::uint64_t seed = 1;
  bool seed_provided = false;
  int trials = 6;
  double theta = 0.5;
  double cone_s = 2.0;
  double smooth_s = 2.0;
  double super_s = 5.0;
  int super_min_witnesses = 3;
  double fit_quality_min = 0.25;
  double zero_top_fraction = 0.25;
  std::optional<Rational> lambda0;
  int witness_count = 4;
  int truncation = 20;
  double delta = 0.5;
  int poincare_trials = 48;
  int graph_trials = 24;
  int energy_trials = 25;
  int cf_depth = 12;
  int report_shells_cap = 512;
  std::optional<Rational> probe_lambda_max;
  std::string product_mode;  // "", "drifted", "bare"
};

struct ProblemFile {
  int torus_dim = 1;
  spectral::GroupSpec group = spectral::GroupSpec::torus(1);
  std::optional<fields::SystemSpec> system;
  std::optional<op::OperatorSpec> oper;
  std::optional<dio::NsaFamily> family;  // explicit family overrides the system-derived one
  AnalysisParams analysis;
  nlohmann::json parameter_echo;
};

ProblemFile parse_spec_text(const std::string& text);
ProblemFile parse_spec(const std::string& path);

struct Report {
  nlohmann::json body;
  std::string json_text() const;  // stable key order, trailing newline
  std::string csv_text() const;   // shell table; spec_error if the report has none
};

/// Commands: check-system, analyze-operator, diophantine, counterexample,
/// inequalities.
Report run(const std::string& command, const ProblemFile& pf);

void write_report(const Report& rep, const std::string& path, const std::string& format);

extern const char* const kVersion;

}  // namespace ghlab

#endif
