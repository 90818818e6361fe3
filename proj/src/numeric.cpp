#include "numeric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ghlab {

BigInt factorial(unsigned long n) {
  BigInt r;
  mpz_fac_ui(r.get_mpz_t(), n);
  return r;
}

Rational pow_rational(const Rational& x, long e) {
  if (e == 0) return Rational(1);
  bool neg = e < 0;
  unsigned long ue = static_cast<unsigned long>(neg ? -e : e);
  Rational r;
  mpz_pow_ui(r.get_num_mpz_t(), x.get_num().get_mpz_t(), ue);
  mpz_pow_ui(r.get_den_mpz_t(), x.get_den().get_mpz_t(), ue);
  r.canonicalize();
  if (neg) {
    if (sgn(r) == 0) throw std::invalid_argument("pow_rational: zero to negative power");
    r = 1 / r;
  }
  return r;
}

namespace {
double log2_bigint(const BigInt& n) {  // n > 0
  signed long exp2;
  double mant = mpz_get_d_2exp(&exp2, n.get_mpz_t());
  return std::log2(mant) + static_cast<double>(exp2);
}
}  // namespace

double log2_rational(const Rational& x) {
  if (sgn(x) <= 0) throw std::invalid_argument("log2_rational: nonpositive");
  return log2_bigint(x.get_num()) - log2_bigint(x.get_den());
}

long floor_log2_rational(const Rational& x) {
  return static_cast<long>(std::floor(log2_rational(x)));
}

double Interval::mid_double() const {
  Rational m = mid();
  double d = m.get_d();
  if (d == 0.0 && sgn(m) != 0) {
    // underflow; callers needing magnitudes use log2 paths instead
    return sgn(m) > 0 ? std::numeric_limits<double>::denorm_min()
                      : -std::numeric_limits<double>::denorm_min();
  }
  return d;
}

Interval iv_add(const Interval& a, const Interval& b) { return {a.lo + b.lo, a.hi + b.hi}; }
Interval iv_sub(const Interval& a, const Interval& b) { return {a.lo - b.hi, a.hi - b.lo}; }
Interval iv_neg(const Interval& a) { return {-a.hi, -a.lo}; }

Interval iv_mul(const Interval& a, const Interval& b) {
  Rational p1 = a.lo * b.lo, p2 = a.lo * b.hi, p3 = a.hi * b.lo, p4 = a.hi * b.hi;
  Rational lo = std::min(std::min(p1, p2), std::min(p3, p4));
  Rational hi = std::max(std::max(p1, p2), std::max(p3, p4));
  return {lo, hi};
}

Interval iv_scale(const Rational& c, const Interval& a) {
  if (sgn(c) >= 0) return {c * a.lo, c * a.hi};
  return {c * a.hi, c * a.lo};
}

Interval iv_square(const Interval& a) {
  if (a.contains_zero()) {
    Rational m = std::max(a.hi * a.hi, a.lo * a.lo);
    return {Rational(0), m};
  }
  Rational l = a.lo * a.lo, h = a.hi * a.hi;
  if (l > h) std::swap(l, h);
  return {l, h};
}

Interval iv_pow(const Interval& a, unsigned e) {
  Interval r{Rational(1), Rational(1)};
  Interval base = a;
  unsigned k = e;
  while (k) {
    if (k & 1) r = iv_mul(r, base);
    base = iv_square(base);
    k >>= 1;
  }
  return r;
}

Interval iv_sqrt(const Rational& x, unsigned bits) {
  if (sgn(x) < 0) throw std::invalid_argument("iv_sqrt: negative argument");
  if (sgn(x) == 0) return Interval(Rational(0));
  // sqrt(p/q) = sqrt(p*q)/q; scale by 4^bits for fractional precision
  BigInt pq = x.get_num() * x.get_den();
  BigInt scaled = pq << (2 * bits);
  BigInt r;
  mpz_sqrt(r.get_mpz_t(), scaled.get_mpz_t());
  BigInt den = x.get_den() << bits;
  Rational lo(r, den), hi(r + 1, den);
  lo.canonicalize();
  hi.canonicalize();
  return {lo, hi};
}

Interval iv_root(const Rational& x, unsigned long n, unsigned bits) {
  if (n == 0) throw std::invalid_argument("iv_root: n == 0");
  if (sgn(x) < 0) throw std::invalid_argument("iv_root: negative argument");
  if (sgn(x) == 0) return Interval(Rational(0));
  if (n == 1) return Interval(x);
  // x = p/q: x^{1/n} = (p*q^{n-1})^{1/n} / q
  BigInt qpow;
  mpz_pow_ui(qpow.get_mpz_t(), x.get_den().get_mpz_t(), n - 1);
  BigInt z = x.get_num() * qpow;
  BigInt scaled = z << (n * bits);
  BigInt r;
  mpz_root(r.get_mpz_t(), scaled.get_mpz_t(), n);
  BigInt den = x.get_den() << bits;
  Rational lo(r, den), hi(r + 1, den);
  lo.canonicalize();
  hi.canonicalize();
  return {lo, hi};
}

// ---------------------------------------------------------------------------
// Atom
// ---------------------------------------------------------------------------

Atom Atom::sqrt_of(BigInt d) {
  if (sgn(d) <= 0) throw std::invalid_argument("Atom::sqrt_of: d must be positive");
  if (mpz_perfect_square_p(d.get_mpz_t()))
    throw std::invalid_argument("Atom::sqrt_of: d is a perfect square, value is rational");
  Atom a;
  a.kind = Kind::Sqrt;
  a.sqrt_arg = std::move(d);
  return a;
}

Atom Atom::liouville(long base, int trunc_order) {
  if (base < 2) throw std::invalid_argument("Atom::liouville: base must be >= 2");
  if (trunc_order < 1) throw std::invalid_argument("Atom::liouville: truncation order must be >= 1");
  Atom a;
  a.kind = Kind::Liouville;
  a.liou_base = base;
  a.liou_trunc = trunc_order;
  return a;
}

Atom Atom::decimal(Rational center, long precision) {
  Atom a;
  a.kind = Kind::Decimal;
  a.dec_center = std::move(center);
  a.dec_prec = precision;
  return a;
}

Interval Atom::enclose(int level) const {
  switch (kind) {
    case Kind::Sqrt:
      return iv_sqrt(Rational(sqrt_arg), static_cast<unsigned>(16 + 24 * std::max(level, 0)));
    case Kind::Liouville: {
      int k = std::min(std::max(level + 1, 1), liou_trunc);
      // partial sum S_k = sum_{n=1..k} base^{-n!}, tail in (0, 2*base^{-(k+1)!})
      Rational s(0);
      for (int n = 1; n <= k; ++n) {
        BigInt den;
        mpz_ui_pow_ui(den.get_mpz_t(), static_cast<unsigned long>(liou_base),
                      factorial(static_cast<unsigned long>(n)).get_ui());
        s += Rational(1, den);
      }
      BigInt tden;
      unsigned long fk1 = factorial(static_cast<unsigned long>(k) + 1).get_ui();
      mpz_ui_pow_ui(tden.get_mpz_t(), static_cast<unsigned long>(liou_base), fk1);
      return {s, s + Rational(2, tden)};
    }
    case Kind::Decimal: {
      Rational eps = pow_rational(Rational(1, 10), dec_prec);
      return {dec_center - eps, dec_center + eps};
    }
  }
  throw std::logic_error("Atom::enclose: bad kind");
}

int Atom::max_level() const {
  switch (kind) {
    case Kind::Sqrt: return 40;
    case Kind::Liouville: return liou_trunc;  // (k+1)! exponents explode anyway
    case Kind::Decimal: return 0;
  }
  return 0;
}

bool Atom::operator<(const Atom& o) const {
  if (kind != o.kind) return static_cast<int>(kind) < static_cast<int>(o.kind);
  switch (kind) {
    case Kind::Sqrt: return sqrt_arg < o.sqrt_arg;
    case Kind::Liouville:
      if (liou_base != o.liou_base) return liou_base < o.liou_base;
      return liou_trunc < o.liou_trunc;
    case Kind::Decimal:
      if (dec_center != o.dec_center) return dec_center < o.dec_center;
      return dec_prec < o.dec_prec;
  }
  return false;
}

bool Atom::operator==(const Atom& o) const { return !(*this < o) && !(o < *this); }

// ---------------------------------------------------------------------------
// ExactScalar
// ---------------------------------------------------------------------------

ExactScalar ExactScalar::atom_value(const Atom& a) {
  ExactScalar s;
  s.parts_[a] = {Rational(1)};
  return s;
}

ExactScalar ExactScalar::surd(const Rational& a, const Rational& b, const BigInt& d) {
  ExactScalar s(a);
  if (sgn(b) != 0) s.parts_[Atom::sqrt_of(d)] = {b};
  return s;
}

Rational ExactScalar::as_rational() const {
  if (!is_rational()) throw std::logic_error("ExactScalar::as_rational: value is irrational");
  return rat_;
}

void ExactScalar::prune() {
  for (auto it = parts_.begin(); it != parts_.end();) {
    auto& cs = it->second;
    while (!cs.empty() && sgn(cs.back()) == 0) cs.pop_back();
    if (cs.empty())
      it = parts_.erase(it);
    else
      ++it;
  }
}

bool ExactScalar::is_zero() const {
  if (sgn(rat_) != 0) return false;
  for (const auto& [a, cs] : parts_)
    for (const auto& c : cs)
      if (sgn(c) != 0) return false;
  return true;
}

ExactScalar ExactScalar::operator-() const {
  ExactScalar r;
  r.rat_ = -rat_;
  for (const auto& [a, cs] : parts_) {
    auto& out = r.parts_[a];
    out.reserve(cs.size());
    for (const auto& c : cs) out.push_back(-c);
  }
  return r;
}

ExactScalar& ExactScalar::operator+=(const ExactScalar& o) {
  rat_ += o.rat_;
  for (const auto& [a, cs] : o.parts_) {
    auto& mine = parts_[a];
    if (mine.size() < cs.size()) mine.resize(cs.size(), Rational(0));
    for (size_t i = 0; i < cs.size(); ++i) mine[i] += cs[i];
  }
  prune();
  return *this;
}

ExactScalar& ExactScalar::operator-=(const ExactScalar& o) { return *this += -o; }

ExactScalar operator*(const ExactScalar& a, const ExactScalar& b) {
  ExactScalar r;
  r.rat_ = a.rat_ * b.rat_;
  // rational x parts
  for (const auto& [at, cs] : b.parts_) {
    if (sgn(a.rat_) == 0) break;
    auto& out = r.parts_[at];
    if (out.size() < cs.size()) out.resize(cs.size(), Rational(0));
    for (size_t i = 0; i < cs.size(); ++i) out[i] += a.rat_ * cs[i];
  }
  for (const auto& [at, cs] : a.parts_) {
    if (sgn(b.rat_) != 0) {
      auto& out = r.parts_[at];
      if (out.size() < cs.size()) out.resize(cs.size(), Rational(0));
      for (size_t i = 0; i < cs.size(); ++i) out[i] += b.rat_ * cs[i];
    }
    // parts x parts: same atom only
    for (const auto& [bt, ds] : b.parts_) {
      if (!(at == bt)) throw mixed_atoms();
      std::vector<Rational> conv(cs.size() + ds.size(), Rational(0));
      for (size_t i = 0; i < cs.size(); ++i)
        for (size_t j = 0; j < ds.size(); ++j)
          conv[i + j + 1] += cs[i] * ds[j];  // atom^{i+1} * atom^{j+1}
      if (at.kind == Atom::Kind::Sqrt) {
        // reduce: atom^{2k} = d^k, atom^{2k+1} = d^k * atom
        Rational d(at.sqrt_arg);
        std::vector<Rational> red(1, Rational(0));
        Rational rat_extra(0);
        Rational dpow(1);
        for (size_t deg = 0; deg < conv.size(); ++deg) {
          // conv[deg] multiplies atom^{deg+1}
          size_t p = deg + 1;
          Rational dp = pow_rational(d, static_cast<long>(p / 2));
          if (p % 2 == 0)
            rat_extra += conv[deg] * dp;
          else
            red[0] += conv[deg] * dp;
        }
        r.rat_ += rat_extra;
        auto& out = r.parts_[at];
        if (out.empty()) out.resize(1, Rational(0));
        out[0] += red[0];
      } else {
        auto& out = r.parts_[at];
        if (out.size() < conv.size()) out.resize(conv.size(), Rational(0));
        for (size_t i = 0; i < conv.size(); ++i) out[i] += conv[i];
      }
    }
  }
  r.prune();
  return r;
}

ExactScalar ExactScalar::scaled(const Rational& c) const {
  ExactScalar r;
  if (sgn(c) == 0) return r;
  r.rat_ = rat_ * c;
  for (const auto& [a, cs] : parts_) {
    auto& out = r.parts_[a];
    out.reserve(cs.size());
    for (const auto& q : cs) out.push_back(q * c);
  }
  return r;
}

ExactScalar ExactScalar::pow(unsigned e) const {
  ExactScalar r(Rational(1));
  ExactScalar base = *this;
  while (e) {
    if (e & 1) r = r * base;
    if (e >>= 1) base = base * base;
  }
  return r;
}

Interval ExactScalar::enclose(int level) const {
  Interval acc(rat_);
  for (const auto& [a, cs] : parts_) {
    Interval av = a.enclose(level);
    // Horner over atom^1..atom^n
    Interval poly(Rational(0));
    for (auto it = cs.rbegin(); it != cs.rend(); ++it)
      poly = iv_mul(iv_add(poly, Interval(*it)), av);
    acc = iv_add(acc, poly);
  }
  return acc;
}

int ExactScalar::sign() const {
  if (parts_.empty()) return sgn(rat_);
  if (parts_.size() == 1) {
    const auto& [a, cs] = *parts_.begin();
    if (a.kind == Atom::Kind::Sqrt && cs.size() == 1) {
      // sign of p + q*sqrt(d), exact
      const Rational& p = rat_;
      const Rational& q = cs[0];
      int sp = sgn(p), sq = sgn(q);
      if (sq == 0) return sp;
      if (sp == 0) return sq;
      if (sp == sq) return sp;
      // opposite signs: compare p^2 vs q^2 d
      Rational lhs = p * p, rhs = q * q * Rational(a.sqrt_arg);
      int c = cmp(lhs, rhs);
      if (c == 0) return 0;  // cannot happen for nonsquare d, kept for safety
      return (c > 0) ? sp : sq;
    }
  }
  if (is_zero()) return 0;
  int cap = 0;
  for (const auto& [a, cs] : parts_) cap = std::max(cap, a.max_level());
  for (int level = 0; level <= cap; ++level) {
    Interval iv = enclose(level);
    if (sgn(iv.lo) > 0) return 1;
    if (sgn(iv.hi) < 0) return -1;
  }
  throw precision_exhausted("sign: enclosure cannot separate value from zero");
}

double ExactScalar::to_double() const {
  if (parts_.empty()) return rat_.get_d();
  return enclose(2).mid_double();
}

double ExactScalar::log2() const {
  if (parts_.empty()) return log2_rational(rat_);
  for (int level = 0; level <= 8; ++level) {
    Interval iv = enclose(level);
    if (sgn(iv.lo) > 0) return (log2_rational(iv.lo) + log2_rational(iv.hi)) / 2;
  }
  throw precision_exhausted("log2: value not separated from zero");
}

std::optional<ExactScalar> ExactScalar::divided_by(const ExactScalar& o) const {
  if (o.is_zero()) throw std::invalid_argument("ExactScalar: division by zero");
  if (o.is_rational()) return scaled(1 / o.rat_);
  if (o.parts_.size() == 1) {
    const auto& [a, cs] = *o.parts_.begin();
    if (a.kind == Atom::Kind::Sqrt && cs.size() == 1) {
      // 1/(p + q sqrt(d)) = (p - q sqrt(d)) / (p^2 - q^2 d)
      Rational denom = o.rat_ * o.rat_ - cs[0] * cs[0] * Rational(a.sqrt_arg);
      if (sgn(denom) == 0) return std::nullopt;
      ExactScalar conj = ExactScalar::surd(o.rat_, -cs[0], a.sqrt_arg);
      ExactScalar inv = conj.scaled(1 / denom);
      try {
        return *this * inv;
      } catch (const mixed_atoms&) {
        return std::nullopt;
      }
    }
  }
  return std::nullopt;
}

std::string ExactScalar::str() const {
  std::ostringstream os;
  bool wrote = false;
  if (sgn(rat_) != 0 || parts_.empty()) {
    os << rat_.get_str();
    wrote = true;
  }
  for (const auto& [a, cs] : parts_) {
    for (size_t i = 0; i < cs.size(); ++i) {
      if (sgn(cs[i]) == 0) continue;
      if (wrote) os << (sgn(cs[i]) > 0 ? "+" : "");
      os << cs[i].get_str() << "*";
      switch (a.kind) {
        case Atom::Kind::Sqrt: os << "sqrt(" << a.sqrt_arg.get_str() << ")"; break;
        case Atom::Kind::Liouville: os << "liouville(" << a.liou_base << ")"; break;
        case Atom::Kind::Decimal: os << "decimal(" << a.dec_center.get_str() << ")"; break;
      }
      if (i > 0) os << "^" << (i + 1);
      wrote = true;
    }
  }
  return os.str();
}

Rational rational_from_string(const std::string& s) {
  std::string t = s;
  // allow decimal literals: 0.25 -> 25/100
  auto dot = t.find('.');
  if (dot != std::string::npos) {
    if (t.find('/') != std::string::npos)
      throw std::invalid_argument("rational_from_string: mixed forms in '" + s + "'");
    std::string digits = t.substr(0, dot) + t.substr(dot + 1);
    size_t frac_len = t.size() - dot - 1;
    if (digits.empty() || frac_len == 0)
      throw std::invalid_argument("rational_from_string: bad literal '" + s + "'");
    Rational num(digits, 10);
    Rational den = pow_rational(Rational(10), static_cast<long>(frac_len));
    Rational r = num / den;
    r.canonicalize();
    return r;
  }
  try {
    Rational r(t, 10);
    r.canonicalize();
    if (sgn(r.get_den()) <= 0) throw std::invalid_argument("denominator");
    return r;
  } catch (const std::exception&) {
    throw std::invalid_argument("rational_from_string: cannot parse '" + s + "'");
  }
}

}  // namespace ghlab
