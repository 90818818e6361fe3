#ifndef GHLAB_OPERATOR_HPP
#define GHLAB_OPERATOR_HPP

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fields.hpp"
#include "numeric.hpp"
#include "spectral.hpp"

namespace ghlab::op {

using fields::CoefficientMap;
using fields::FreqVec;
using fields::TrigPoly;
using spectral::GroupSpec;
using spectral::Mode;

/// Vector field on the T factor: W = sum_k b_k(t) d/dt_k.
struct TorusField {
  std::vector<TrigPoly> b;  // size n

  explicit TorusField(int n = 1) : b(static_cast<size_t>(n), TrigPoly(n)) {}
  int dim() const { return static_cast<int>(b.size()); }
  bool is_zero() const;
  bool is_constant() const;
  /// Skew-symmetry on the normalized torus: sum_k d b_k / dt_k == 0 exactly.
  bool divergence_free() const;
  std::vector<Rational> constant_coords() const;  // throws if irrational
  std::vector<ExactScalar> constant_coords_exact() const;
  bool constant_rational() const;
  /// sup_t sqrt(sum_k |b_k(t)|^2) estimated on a uniform grid.
  double sup_norm_grid(int grid) const;
};

enum class QKind { LaplacianT, Zero, ConstantForm };

struct OperatorSpec {
  int torus_dim = 1;
  GroupSpec group = GroupSpec::torus(1);
  QKind q = QKind::LaplacianT;
  std::vector<std::vector<Rational>> q_vectors;  // ConstantForm: q(tau) = sum (w.tau)^2

  struct Term {
    CoefficientMap a;
    TorusField w;
    Term(CoefficientMap a_, TorusField w_) : a(std::move(a_)), w(std::move(w_)) {}
  };
  std::vector<Term> terms;      // the pairs (a_l, W_l)
  std::vector<Term> remainder;  // optional non-commuting remainder

  void validate() const;
  Rational q_symbol(const FreqVec& tau) const;
  fields::SystemSpec system() const;
};

// ---------------------------------------------------------------------------
// FourierData: sparse coefficients on (tau, G-mode), exact or floating
// ---------------------------------------------------------------------------

using BlockKey = std::pair<FreqVec, Mode>;

template <class K>
struct FourierData {
  int torus_dim = 1;
  GroupSpec group = GroupSpec::torus(1);
  std::map<BlockKey, K> coef;

  FourierData() = default;
  FourierData(int n, GroupSpec g) : torus_dim(n), group(g) {}
  void add(const FreqVec& tau, const Mode& mode, const K& v);
  bool empty() const { return coef.empty(); }
  /// distinct G eigenvalues in the support, ascending
  std::vector<Rational> g_eigenvalues() const;
};

using FourierExact = FourierData<CES>;
using FourierFloat = FourierData<std::complex<double>>;

template <class K>
FourierData<K> apply_operator(const OperatorSpec& p, const FourierData<K>& f);

template <class K>
FourierData<K> partial_projection_G(const FourierData<K>& f, const Rational& lambda);
template <class K>
FourierData<K> partial_projection_T(const FourierData<K>& f, const Rational& mu);

CES inner(const FourierExact& f, const FourierExact& g);
std::complex<double> inner(const FourierFloat& f, const FourierFloat& g);
ExactScalar norm_sq(const FourierExact& f);
double norm_sq(const FourierFloat& f);

/// <P psi, psi> - <Q# psi, psi> - sum_l ||Y_l psi||^2 for psi supported on one
/// G eigenvalue; exactly zero in exact arithmetic when the W_l are skew.
CES energy_identity_residual(const OperatorSpec& p, const FourierExact& psi);
std::complex<double> energy_identity_residual(const OperatorSpec& p, const FourierFloat& psi);

// ---------------------------------------------------------------------------
// tilde-P ellipticity
// ---------------------------------------------------------------------------

struct Ellipticity {
  bool elliptic = false;
  bool sampled = false;  // variable coefficients: principal symbol sampled on a grid
  std::vector<long> witness_tau;
  std::string note;
};

Ellipticity tildeP_ellipticity(const OperatorSpec& p);

// ---------------------------------------------------------------------------
// Final-inequality probe
// ---------------------------------------------------------------------------

struct ProbeShell {
  Rational lambda;
  double min_ratio = 0;  // min over sampled psi of <P psi,psi>/||psi||^2
  bool exact_path = false;
};

struct ProbeResult {
  std::vector<ProbeShell> per_shell;
  bool all_positive = false;
  double fitted_C = 0, fitted_rho = 0, fit_r2 = 0;
  bool hypotheses_ok = true;
  std::string hypothesis_note;
  std::uint64_t seed = 0;
  int trials = 0;
  long tau_box = 2;
};

ProbeResult final_inequality_probe(const OperatorSpec& p, const Rational& lambda_max,
                                   int trials, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Smoothness classification
// ---------------------------------------------------------------------------

struct SmoothnessReport {
  enum class Verdict { ConsistentSmooth, DistributionOrder, Inconclusive };
  Verdict verdict = Verdict::Inconclusive;
  double s_tested = 0;      // the decay exponent the data was held to
  double slope = 0;         // fitted log-log slope of block norms
  double order = 0;         // fitted distribution order when not smooth
  double r2 = 0;
  int blocks = 0;
  std::string str() const;
};

template <class K>
SmoothnessReport classify_smoothness(const FourierData<K>& f, double s_req);

struct ConeReport {
  bool smooth_consistent = false;
  bool hyp1_ok = false, hyp2_ok = false, combined_ok = false;
  double combined_exponent = 0;
  std::string note;
};

/// Two-hypothesis smoothness check: full decay of ||F^G_lambda f|| at rate s,
/// block decay on the cone (1+lambda) <= (1+mu)^theta, and the implied bound
/// on the complement via (1+mu+lambda) <= (1+lambda)^{2/theta}.
template <class K>
ConeReport cone_split_check(const FourierData<K>& f, double theta, double s);

// ---------------------------------------------------------------------------
// Auxiliary empirical inequalities (T^1)
// ---------------------------------------------------------------------------

struct PoincareResult {
  double c_hat = 0;              // max of ||psi||^2 / (||psi||^2_{L2(A)} + ||psi'||^2)
  double c_hat_revalidated = 0;  // fresh-seed rerun
  bool stable = false;           // within 20%
  double delta = 0;
  std::uint64_t seed = 0;
  int trials = 0;
};

PoincareResult poincare_estimate(double delta, int trials, std::uint64_t seed);

struct GraphNormResult {
  double max_ratio = 0;       // max ||W psi|| / ||d psi||
  double sup_coeff_bound = 0; // grid sup of the coefficient norm
  std::uint64_t seed = 0;
  int samples_used = 0;
};

GraphNormResult graph_norm_bound(const TorusField& w, int trials, std::uint64_t seed);

}  // namespace ghlab::op

#endif
