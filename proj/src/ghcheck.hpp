#ifndef GHLAB_GHCHECK_HPP
#define GHLAB_GHCHECK_HPP

#include <optional>
#include <string>
#include <vector>

#include "diophantine.hpp"
#include "fields.hpp"
#include "numeric.hpp"
#include "operator.hpp"
#include "spectral.hpp"

namespace ghlab::ghcheck {

using fields::LieElement;
using fields::SystemSpec;
using spectral::GroupSpec;
using spectral::Mode;
using spectral::Shell;

/// Smallest singular value of the stacked field actions on one shell.
struct ShellMinimum {
  Rational lambda;
  double sigma = 0;        // may underflow for deep witnesses; log2_sigma is safe
  double log2_sigma = 0;
  bool is_zero = false;    // exact zero (torus) or below the floating tolerance (su2)
  Mode argmin;             // minimizing mode (torus) or representative mode (su2)
  std::vector<std::complex<double>> argmin_vec;  // su2 eigenvector when available
  std::optional<Rational> sigma_sq_lo, sigma_sq_hi;  // exact enclosure when known
  std::string source = "scan";  // "scan" | "convergent"
};

/// Per-shell sigma_min for the stacked generators: exact-zero detection and
/// closed-form per-mode minima on tori, block eigenvalues on SU(2).
std::vector<ShellMinimum> shell_minima(const SystemSpec& sys, const GroupSpec& g,
                                       const Rational& lambda_max);
std::vector<ShellMinimum> shell_minima_generators(const std::vector<LieElement>& gens,
                                                  const GroupSpec& g, const Rational& lambda_max);

/// Oracle path: assemble the stacked dense action matrices and take the
/// smallest singular value (small shells only).
double shell_minimum_dense(const std::vector<LieElement>& gens, const GroupSpec& g,
                           const Shell& shell);

struct FitResult {
  bool ok = false;
  double C = 0, rho = 0, r2 = 0, slope = 0;
  int points = 0;
  bool used_records = false;
};

/// Least-squares fit of log sigma_min against -rho log(1+lambda) over the
/// running-minimum envelope (every shell is a record for exactly decaying
/// data); falls back to the full positive data when records are scarce.
FitResult fit_exponent(const std::vector<ShellMinimum>& minima, const Rational& lambda0);

struct GhThresholds {
  double super_s = 5.0;          // superpolynomial test exponent
  int super_min_witnesses = 3;
  double fit_quality_min = 0.25;
  double zero_top_fraction = 0.25;  // zeros must recur into the top of the tested range
  int zero_min_count = 2;
  std::optional<Rational> lambda0;  // default: smallest positive tested eigenvalue
};

enum class Verdict { ConsistentGH, FailZeroSymbol, FailSuperpolynomial, Inconclusive };
std::string verdict_name(Verdict v);

struct GhReport {
  std::vector<ShellMinimum> minima;
  Verdict verdict = Verdict::Inconclusive;
  FitResult fit;
  double certified_C = 0, certified_rho = 0;
  Rational lambda0;
  Rational lambda_max;
  std::vector<ShellMinimum> witnesses;  // zero shells or superpolynomial subsequence
  double witness_slope = 0;
  std::string note;
};

GhReport gh_verdict(const std::vector<ShellMinimum>& minima, const Rational& lambda_max,
                    const GhThresholds& th,
                    const std::vector<ShellMinimum>& extra_witnesses = {});

/// Continued-fraction witness modes beyond the scan radius for 2-d torus
/// single-line systems with an irrational slope; empty otherwise.
std::vector<ShellMinimum> convergent_witnesses_for(const SystemSpec& sys, int count);

/// u = sum_nu phi_nu with unit coefficients on the witness shells.
struct SingularSolution {
  bool exact = true;
  op::FourierExact u_exact;
  op::FourierFloat u_float;
  std::vector<Rational> lambdas;
};

SingularSolution build_singular_solution(const GroupSpec& g, int torus_dim,
                                         const std::vector<ShellMinimum>& witnesses);

struct CounterexampleCheck {
  bool unit_norms = false;     // ||F_lambda(u)|| = 1 on every witness shell
  bool image_bounded = false;  // ||F_lambda(L u)|| <= recorded sigma per generator
  op::SmoothnessReport u_report;
  std::vector<op::SmoothnessReport> image_reports;
  bool closed = false;  // u not smooth, every L u consistent-with-smooth
};

CounterexampleCheck check_singular_solution(const SingularSolution& sol,
                                            const std::vector<LieElement>& gens,
                                            const std::vector<ShellMinimum>& witnesses,
                                            double smooth_s);

enum class HullVerdict { HormanderHullFull, CommutativeHullObstruction, Neither };
std::string hull_verdict_name(HullVerdict v);

struct HullCheck {
  HullVerdict verdict = HullVerdict::Neither;
  int hull_dim = 0;
  bool hull_commutative = false;
};

/// Lie hull of the sampled range vectors and range bases: full hull is
/// sufficient for (GH); a commutative proper hull on a non-abelian group is
/// an obstruction.
HullCheck hull_checks(const SystemSpec& sys, const GroupSpec& g);

/// All range-basis generators L_p^l of the system.
std::vector<LieElement> system_generators(const SystemSpec& sys);

}  // namespace ghlab::ghcheck

#endif
