#ifndef GHLAB_FIELDS_HPP
#define GHLAB_FIELDS_HPP

#include <complex>
#include <map>
#include <vector>

#include "numeric.hpp"
#include "spectral.hpp"

namespace ghlab::fields {

using spectral::GroupSpec;

/// Frequencies on the T factor (T^n, n small).
using FreqVec = std::vector<long>;

struct zero_map_error : std::invalid_argument {
  zero_map_error() : std::invalid_argument("coefficient map is identically zero") {}
};

/// Sparse trig polynomial on T^n with exact complex coefficients.
class TrigPoly {
 public:
  explicit TrigPoly(int n = 1) : dim_(n) {}
  static TrigPoly constant(int n, ExactScalar v);
  static TrigPoly cosine(int n, int axis, const Rational& amplitude, long freq = 1);
  static TrigPoly sine(int n, int axis, const Rational& amplitude, long freq = 1);

  int dim() const { return dim_; }
  void add_term(const FreqVec& tau, const CES& c);
  const std::map<FreqVec, CES>& coef() const { return coef_; }
  bool is_zero() const { return coef_.empty(); }
  bool is_real() const;      // coef(-tau) == conj(coef(tau))
  bool is_constant() const;  // support within {0}

  TrigPoly operator+(const TrigPoly& o) const;
  TrigPoly operator-(const TrigPoly& o) const;
  TrigPoly operator*(const TrigPoly& o) const;  // convolution
  TrigPoly scaled(const CES& c) const;
  TrigPoly derivative(int axis) const;  // d/dt_axis, multiplies by i*tau_axis

  /// <f, g> in L^2(T^n) (normalized mass 1) via Parseval.
  CES l2_inner(const TrigPoly& o) const;
  std::complex<double> eval(const std::vector<double>& t) const;

 private:
  void prune();
  int dim_;
  std::map<FreqVec, CES> coef_;
};

/// Element of the Lie algebra g in the group's orthonormal basis.
struct LieElement {
  GroupSpec group;
  std::vector<ExactScalar> c;

  LieElement(GroupSpec g, std::vector<ExactScalar> coords)
      : group(g), c(std::move(coords)) {
    if (static_cast<int>(c.size()) != group.dim)
      throw std::invalid_argument("LieElement: coordinate/group dimension mismatch");
  }
  static LieElement basis(GroupSpec g, int axis);

  bool is_zero() const;
  double norm() const;  // Euclidean, the basis is orthonormal
  std::vector<double> coords_d() const;
};

/// Structure-constant bracket; bilinear and antisymmetric. Torus: 0.
LieElement bracket(const LieElement& x, const LieElement& y);

/// Orthonormal basis of the smallest bracket-closed subspace containing S.
std::vector<LieElement> lie_hull(const std::vector<LieElement>& gens);

/// Smooth map a: T^n -> g stored as one real trig polynomial per basis direction.
struct CoefficientMap {
  GroupSpec group;
  int torus_dim;                // n
  std::vector<TrigPoly> comp;   // size group.dim

  CoefficientMap(GroupSpec g, int n);
  void validate() const;  // real components, matching dims
  bool is_zero() const;
  bool is_constant() const;
  LieElement value_at(const std::vector<double>& t) const;  // double coords
  LieElement constant_value() const;                        // exact, requires is_constant
};

/// Basis extraction for span(ran a): indices j_p with a_{j_p} a basis of the
/// coefficient span, expansion L_p = X_{j_p} + sum_q lambda_{qp} X_{i_q},
/// alpha_p = a_{j_p}; reconstruction a(t) = sum_p alpha_p(t) L_p is exact.
struct RangeBasis {
  std::vector<int> basis_idx;  // j_1 < ... < j_{m'}
  std::vector<int> rest_idx;   // i_1 < ... < i_{d}
  std::vector<std::vector<ExactScalar>> lambda;  // lambda[q][p]
  std::vector<LieElement> L;                     // size m'
  std::vector<TrigPoly> alpha;                   // size m'
  bool exact = true;  // false when the Gram elimination fell back to doubles
  int rank() const { return static_cast<int>(basis_idx.size()); }
};

RangeBasis range_basis(const CoefficientMap& a);  // throws zero_map_error

/// True iff all pairwise brackets of the range basis vanish (t-values of a commute).
bool commutativity_check(const CoefficientMap& a);

/// D(t, gamma) = (sum_p alpha_p(t) gamma_p)^2.
double D_value(const CoefficientMap& a, const std::vector<double>& t,
               const std::vector<double>& gamma);
double D_value(const RangeBasis& rb, const std::vector<double>& t,
               const std::vector<double>& gamma);

/// Grid measure of { t : D(t, gamma) > threshold } on a uniform t-grid.
double superlevel_measure(const CoefficientMap& a, const std::vector<double>& gamma,
                          double threshold, int t_grid);

struct AlphaDelta {
  double alpha = 0, delta = 0;
  int rank = 0;
  std::uint64_t seed = 0;
  int gamma_samples = 0, t_grid = 0;
};

/// Empirical certificate for the superlevel lemma: the largest alpha on a
/// fixed threshold grid whose minimal superlevel measure over sampled unit
/// gammas is still positive, together with that measure.
AlphaDelta estimate_alpha_delta(const CoefficientMap& a, int gamma_samples, int t_grid,
                                std::uint64_t seed);

/// The system a_1..a_N.
struct SystemSpec {
  std::vector<CoefficientMap> fields;
  GroupSpec group() const;
  int torus_dim() const;
};

}  // namespace ghlab::fields

#endif
