#ifndef GHLAB_DIOPHANTINE_HPP
#define GHLAB_DIOPHANTINE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "numeric.hpp"

namespace ghlab::dio {

/// A real number given exactly or by a refinable/limited enclosure.
struct RealSpec {
  enum class Kind { Rational, Surd, Liouville, Decimal };
  Kind kind = Kind::Rational;
  Rational rat;                      // Rational
  Rational surd_a, surd_b;           // Surd: a + b*sqrt(d)
  BigInt surd_d;
  long liou_base = 0;                // Liouville: sum base^{-n!}
  int liou_trunc = 0;
  Rational dec_center;               // Decimal: center +- 10^{-prec}
  long dec_prec = 0;

  static RealSpec rational(Rational q);
  static RealSpec surd(Rational a, Rational b, BigInt d);  // folds perfect squares
  static RealSpec liouville(long base, int trunc_order);
  static RealSpec decimal(Rational center, long precision);
  static RealSpec golden_ratio() { return surd(Rational(1, 2), Rational(1, 2), BigInt(5)); }

  bool is_exact() const { return kind == Kind::Rational || kind == Kind::Surd; }
  ExactScalar value() const;
  std::string str() const;
};

/// Inverse of RealSpec::value for the representable shapes (rational, surd,
/// a bare Liouville or decimal atom); nullopt otherwise.
std::optional<RealSpec> realspec_from_exact(const ExactScalar& v);

// ---------------------------------------------------------------------------
// Continued fractions
// ---------------------------------------------------------------------------

struct ContinuedFraction {
  std::vector<BigInt> quotients;                       // a_0; a_1, a_2, ...
  std::vector<std::pair<BigInt, BigInt>> convergents;  // (p_k, q_k), q_k > 0
  bool terminated = false;                             // exact rational expansion ended
};

/// Partial quotients and convergents of x to the requested depth. Rational
/// inputs terminate early; enclosure-backed inputs raise precision_exhausted
/// when a quotient cannot be pinned down.
ContinuedFraction continued_fraction(const RealSpec& x, int depth);

// ---------------------------------------------------------------------------
// Non-simultaneous approximability conditions
// ---------------------------------------------------------------------------

/// Per-l data: index split and the expansion vectors v_p.
struct NsaGroup {
  std::vector<int> j_idx;                  // 0-based, ascending, size m'
  std::vector<int> i_idx;                  // complement, ascending, size d = m - m'
  std::vector<std::vector<RealSpec>> v;    // v[p][q], p < m', q < d
};

struct NsaFamily {
  int m = 0;
  std::vector<NsaGroup> groups;
  void validate() const;
  bool all_rational() const;
};

struct ConditionResult {
  bool pass = true;
  long radius = 0;
  long scan_radius = 0;            // exhaustive enumeration stopped here
  std::vector<long> worst_xi;      // minimizer of the margin ratio
  double worst_log2 = 0;           // log2 of the worst ratio (safe for tiny values)
  std::vector<long> witness_xi;    // a failing xi when pass == false
  bool witness_exact_zero = false; // witness makes the symbol exactly zero
  std::vector<BigInt> witness_big; // candidate witness beyond the scan radius
  long points_scanned = 0;
};

/// Condition (1): (sum_{l,p} |xi_{j_p} + v_p . xi''|^2)^{1/2} >= C (1+|xi|^2)^{-rho}
/// for all 0 < |xi| <= R, decided in exact arithmetic (enclosures refined, never
/// rounded) with the worst xi reported deterministically. The exhaustive scan
/// is capped at radius 4000; past the cap, continued-fraction convergent
/// candidates of the irrational entries are still checked exactly up to R, so
/// deep resonances are found without a full enumeration. A pass is always
/// qualified by scan_radius.
ConditionResult check_condition_G(const NsaFamily& f, long R, const Rational& C,
                                  const Rational& rho);

/// Condition (2): for each xi != 0, |xi| <= R, some (l,p) has
/// |xi_{j_p} + v_p . xi''| >= B (1 + |xi''_{(l)}|)^{-M}.
ConditionResult check_condition_I(const NsaFamily& f, long R, const Rational& B,
                                  const Rational& M);

/// Exact check of condition (1) at a single (possibly huge) frequency.
bool g_holds_at(const NsaFamily& f, const std::vector<BigInt>& xi, const Rational& C,
                const Rational& rho);

struct FitGI {
  bool found = false;
  double B = 0;       // or C
  Rational expo;      // M (or rho)
  bool exact_zero_hit = false;
  std::vector<long> zero_xi;
};

/// Smallest exponent on a fixed grid whose fitted constant is stable between
/// radius R/2 and R (radius-qualified empirical fit).
FitGI fit_condition_I(const NsaFamily& f, long R);
FitGI fit_condition_G(const NsaFamily& f, long R);

struct NsaVerdict {
  bool g_holds = false, i_holds = false;
  bool anomaly = false;  // the two conditions disagreed at this radius
  long radius = 0;
  double fitted_B = 0, fitted_M = 0;
  double fitted_C = 0, fitted_rho = 0;
  Rational derived_C, derived_rho;  // trial derived from (B, M) and confirmed exactly
  std::vector<long> witness_xi;     // nonempty iff a condition fails
  bool witness_exact_zero = false;
  std::string note;
};

/// Runs both conditions; when (2) passes, derives a (C, rho) trial from its
/// constants and confirms (1) exactly at radius R; when one fails, confirms
/// the other fails on the same witness.
NsaVerdict verify_equivalence(const NsaFamily& f, long R);

// ---------------------------------------------------------------------------
// Liouville witnesses
// ---------------------------------------------------------------------------

struct LiouvilleWitness {
  int k = 0;
  BigInt p, q;          // q = base^{k!}, p = numerator of the k-th partial sum
  Rational gap_hi;      // exact upper bound on |q*alpha - p|
  Rational gap_lo;      // exact lower bound
  Rational bound;       // 2 * q^{1-k}
  bool verified = false;
};

std::vector<LiouvilleWitness> liouville_witnesses(long base, int trunc_order, int k_max);

/// Best-approximation witness pairs (p, q) for an irrational slope v together
/// with exact enclosures of (p - v q)^2: Liouville specs use the factorial
/// partial sums, surds use continued-fraction convergents.
struct SlopeWitness {
  BigInt p, q;
  Rational z_sq_lo, z_sq_hi;  // enclosure of (p - v q)^2
  Rational lambda;            // p^2 + q^2
};
std::vector<SlopeWitness> slope_witnesses(const RealSpec& v, int count);

}  // namespace ghlab::dio

#endif
