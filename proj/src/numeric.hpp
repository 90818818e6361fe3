#ifndef GHLAB_NUMERIC_HPP
#define GHLAB_NUMERIC_HPP

#include <gmpxx.h>

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ghlab {

using BigInt = mpz_class;
using Rational = mpq_class;

/// Raised when an enclosure cannot be refined far enough to decide a
/// comparison (decimal literals with finite stated precision, truncated
/// Liouville series). Maps to exit code 3 at the CLI boundary.
struct precision_exhausted : std::runtime_error {
  explicit precision_exhausted(const std::string& what) : std::runtime_error(what) {}
};

/// Internal: a product would mix two distinct irrational generators.
/// Callers fall back to interval evaluation.
struct mixed_atoms : std::runtime_error {
  mixed_atoms() : std::runtime_error("product mixes distinct irrational atoms") {}
};

BigInt factorial(unsigned long n);
Rational pow_rational(const Rational& x, long e);  // e may be negative, x != 0 then
double log2_rational(const Rational& x);           // x > 0, safe for huge/tiny values
long floor_log2_rational(const Rational& x);

// ---------------------------------------------------------------------------
// Exact rational intervals
// ---------------------------------------------------------------------------

struct Interval {
  Rational lo, hi;

  Interval() : lo(0), hi(0) {}
  Interval(Rational both) : lo(both), hi(both) {}
  Interval(Rational l, Rational h) : lo(std::move(l)), hi(std::move(h)) {}

  bool contains_zero() const { return sgn(lo) <= 0 && sgn(hi) >= 0; }
  Rational width() const { return hi - lo; }
  Rational mid() const { return (lo + hi) / 2; }
  double mid_double() const;
};

Interval iv_add(const Interval& a, const Interval& b);
Interval iv_sub(const Interval& a, const Interval& b);
Interval iv_mul(const Interval& a, const Interval& b);
Interval iv_neg(const Interval& a);
Interval iv_scale(const Rational& c, const Interval& a);
Interval iv_square(const Interval& a);
Interval iv_pow(const Interval& a, unsigned e);

/// Enclosure of sqrt(x), x >= 0 rational, to roughly `bits` fractional bits.
Interval iv_sqrt(const Rational& x, unsigned bits);
/// Enclosure of x^(1/n), x >= 0 rational.
Interval iv_root(const Rational& x, unsigned long n, unsigned bits);

// ---------------------------------------------------------------------------
// Atoms: the irrational generators a value may involve
// ---------------------------------------------------------------------------

struct Atom {
  enum class Kind { Sqrt, Liouville, Decimal };
  Kind kind = Kind::Sqrt;

  BigInt sqrt_arg;       // Sqrt: positive non-square integer, value sqrt(d)
  long liou_base = 0;    // Liouville: value sum_{n>=1} base^{-n!}
  int liou_trunc = 0;    //   refinement capped at this many terms
  Rational dec_center;   // Decimal: stated value
  long dec_prec = 0;     //   true value within +-10^{-dec_prec}

  static Atom sqrt_of(BigInt d);
  static Atom liouville(long base, int trunc_order);
  static Atom decimal(Rational center, long precision);

  /// Enclosure at refinement level (higher = tighter where possible).
  Interval enclose(int level) const;
  int max_level() const;

  bool operator<(const Atom& o) const;
  bool operator==(const Atom& o) const;
};

// ---------------------------------------------------------------------------
// ExactScalar: rational + polynomial parts in at most a few atoms.
// Sums across atoms are fine; products may not mix distinct atoms.
// sqrt atoms reduce (sqrt(d)^2 = d) so their parts stay degree 1.
// ---------------------------------------------------------------------------

class ExactScalar {
 public:
  ExactScalar() : rat_(0) {}
  ExactScalar(long v) : rat_(v) {}
  ExactScalar(const Rational& v) : rat_(v) {}
  static ExactScalar atom_value(const Atom& a);
  static ExactScalar surd(const Rational& a, const Rational& b, const BigInt& d);

  bool is_rational() const { return parts_.empty(); }
  const Rational& rational_part() const { return rat_; }
  Rational as_rational() const;  // throws if not rational

  bool is_zero() const;  // formal: all coefficients vanish
  /// Exact for rational and single-sqrt values; otherwise interval refinement.
  int sign() const;
  int compare(const ExactScalar& o) const { return (*this - o).sign(); }

  Interval enclose(int level) const;
  double to_double() const;
  /// log2 of a positive value, safe for magnitudes far outside double range.
  double log2() const;

  ExactScalar operator-() const;
  ExactScalar& operator+=(const ExactScalar& o);
  ExactScalar& operator-=(const ExactScalar& o);
  friend ExactScalar operator+(ExactScalar a, const ExactScalar& b) { return a += b; }
  friend ExactScalar operator-(ExactScalar a, const ExactScalar& b) { return a -= b; }
  friend ExactScalar operator*(const ExactScalar& a, const ExactScalar& b);  // may throw mixed_atoms
  ExactScalar scaled(const Rational& c) const;
  ExactScalar pow(unsigned e) const;

  /// Exact division where representable (divisor rational, or both in the
  /// same quadratic field); nullopt otherwise.
  std::optional<ExactScalar> divided_by(const ExactScalar& o) const;

  bool operator==(const ExactScalar& o) const { return (*this - o).is_zero(); }

  const std::map<Atom, std::vector<Rational>>& parts() const { return parts_; }
  std::string str() const;

 private:
  void prune();
  Rational rat_;
  // atom -> coefficients of atom^1, atom^2, ...
  std::map<Atom, std::vector<Rational>> parts_;
};

/// Complex value over ExactScalar.
struct CES {
  ExactScalar re, im;

  CES() = default;
  CES(ExactScalar r) : re(std::move(r)) {}
  CES(ExactScalar r, ExactScalar i) : re(std::move(r)), im(std::move(i)) {}
  static CES i_times(const ExactScalar& v) { return CES(ExactScalar(0), v); }

  bool is_zero() const { return re.is_zero() && im.is_zero(); }
  CES conj() const { return CES(re, -im); }
  ExactScalar norm_sq() const { return re * re + im * im; }

  CES operator-() const { return CES(-re, -im); }
  CES& operator+=(const CES& o) { re += o.re; im += o.im; return *this; }
  CES& operator-=(const CES& o) { re -= o.re; im -= o.im; return *this; }
  friend CES operator+(CES a, const CES& b) { return a += b; }
  friend CES operator-(CES a, const CES& b) { return a -= b; }
  friend CES operator*(const CES& a, const CES& b) {
    return CES(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
  }
};

Rational rational_from_string(const std::string& s);  // "p/q", "-3", "0.25"

}  // namespace ghlab

#endif
