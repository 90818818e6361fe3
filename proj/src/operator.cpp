#include "operator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "fitting.hpp"
#include "parallel.hpp"
#include "prng.hpp"

namespace ghlab::op {

// ---------------------------------------------------------------------------
// TorusField
// ---------------------------------------------------------------------------

bool TorusField::is_zero() const {
  for (const auto& p : b)
    if (!p.is_zero()) return false;
  return true;
}

bool TorusField::is_constant() const {
  for (const auto& p : b)
    if (!p.is_constant()) return false;
  return true;
}

bool TorusField::divergence_free() const {
  if (b.empty()) return true;
  TrigPoly div(b[0].dim());
  for (size_t k = 0; k < b.size(); ++k) div = div + b[k].derivative(static_cast<int>(k));
  return div.is_zero();
}

std::vector<Rational> TorusField::constant_coords() const {
  std::vector<Rational> out;
  FreqVec zero(dim(), 0);
  for (const auto& p : b) {
    auto it = p.coef().find(zero);
    out.push_back(it == p.coef().end() ? Rational(0) : it->second.re.as_rational());
  }
  return out;
}

std::vector<ExactScalar> TorusField::constant_coords_exact() const {
  std::vector<ExactScalar> out;
  FreqVec zero(dim(), 0);
  for (const auto& p : b) {
    auto it = p.coef().find(zero);
    out.push_back(it == p.coef().end() ? ExactScalar(0) : it->second.re);
  }
  return out;
}

bool TorusField::constant_rational() const {
  FreqVec zero(dim(), 0);
  for (const auto& p : b) {
    auto it = p.coef().find(zero);
    if (it != p.coef().end() && !it->second.re.is_rational()) return false;
  }
  return true;
}

double TorusField::sup_norm_grid(int grid) const {
  const int n = dim();
  double best = 0;
  std::vector<int> idx(n, 0);
  std::vector<double> t(n, 0.0);
  const double step = 2.0 * M_PI / grid;
  for (;;) {
    for (int i = 0; i < n; ++i) t[i] = idx[i] * step;
    double s = 0;
    for (const auto& p : b) {
      double v = std::abs(p.eval(t));
      s += v * v;
    }
    best = std::max(best, std::sqrt(s));
    int i = 0;
    while (i < n && ++idx[i] == grid) idx[i++] = 0;
    if (i == n) break;
  }
  return best;
}

// ---------------------------------------------------------------------------
// OperatorSpec
// ---------------------------------------------------------------------------

void OperatorSpec::validate() const {
  auto check_term = [&](const Term& t, const char* what) {
    t.a.validate();
    if (!(t.a.group == group))
      throw std::invalid_argument(std::string(what) + ": coefficient map group mismatch");
    if (t.a.torus_dim != torus_dim)
      throw std::invalid_argument(std::string(what) + ": coefficient map torus dimension mismatch");
    if (t.w.dim() != torus_dim)
      throw std::invalid_argument(std::string(what) + ": torus field dimension mismatch");
    for (const auto& p : t.w.b)
      if (!p.is_real())
        throw std::invalid_argument(std::string(what) + ": torus field coefficients must be real");
    if (!t.w.divergence_free())
      throw std::invalid_argument(std::string(what) +
                                  ": torus field violates the skew-symmetry invariant "
                                  "(divergence not identically zero)");
  };
  for (const auto& t : terms) check_term(t, "operator term");
  for (const auto& t : remainder) check_term(t, "remainder term");
  if (q == QKind::ConstantForm)
    for (const auto& w : q_vectors)
      if (static_cast<int>(w.size()) != torus_dim)
        throw std::invalid_argument("ConstantForm Q: vector dimension mismatch");
}

Rational OperatorSpec::q_symbol(const FreqVec& tau) const {
  switch (q) {
    case QKind::Zero: return Rational(0);
    case QKind::LaplacianT: {
      BigInt s(0);
      for (long x : tau) s += BigInt(x) * BigInt(x);
      return Rational(s);
    }
    case QKind::ConstantForm: {
      Rational acc(0);
      for (const auto& w : q_vectors) {
        Rational dot(0);
        for (size_t k = 0; k < w.size(); ++k) dot += w[k] * Rational(tau[k]);
        acc += dot * dot;
      }
      return acc;
    }
  }
  throw std::logic_error("q_symbol: bad kind");
}

fields::SystemSpec OperatorSpec::system() const {
  fields::SystemSpec s;
  for (const auto& t : terms) s.fields.push_back(t.a);
  return s;
}

// ---------------------------------------------------------------------------
// Scalar traits
// ---------------------------------------------------------------------------

namespace {

template <class K>
struct Ops;

template <>
struct Ops<CES> {
  static bool is_zero(const CES& v) { return v.is_zero(); }
  static CES conj(const CES& v) { return v.conj(); }
  static CES from_ces(const CES& c) { return c; }
  static CES i_times_bigint(const BigInt& x) { return CES::i_times(ExactScalar(Rational(x))); }
  static CES i_times_long(long x) { return CES::i_times(ExactScalar(Rational(x))); }
  static CES scale_rational(const CES& v, const Rational& r) {
    return CES(v.re.scaled(r), v.im.scaled(r));
  }
  static CES mul(const CES& a, const CES& b) { return a * b; }
  static double re_double(const CES& v) { return v.re.to_double(); }
};

template <>
struct Ops<std::complex<double>> {
  using C = std::complex<double>;
  static bool is_zero(const C& v) { return v == C(0, 0); }
  static C conj(const C& v) { return std::conj(v); }
  static C from_ces(const CES& c) { return C(c.re.to_double(), c.im.to_double()); }
  static C i_times_bigint(const BigInt& x) { return C(0.0, x.get_d()); }
  static C i_times_long(long x) { return C(0.0, static_cast<double>(x)); }
  static C scale_rational(const C& v, const Rational& r) { return v * r.get_d(); }
  static C mul(const C& a, const C& b) { return a * b; }
  static double re_double(const C& v) { return v.real(); }
};

FreqVec add_freq(const FreqVec& a, const FreqVec& b) {
  FreqVec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

// per-twoj su2 generator blocks, one per basis axis
struct Su2Cache {
  std::map<int, std::array<Eigen::MatrixXcd, 3>> blocks;
  const std::array<Eigen::MatrixXcd, 3>& get(int twoj) {
    auto it = blocks.find(twoj);
    if (it != blocks.end()) return it->second;
    std::array<Eigen::MatrixXcd, 3> arr;
    for (int axis = 0; axis < 3; ++axis) {
      Eigen::Vector3d c = Eigen::Vector3d::Zero();
      c[axis] = 1.0;
      arr[axis] = spectral::su2_generator_block(twoj, c);
    }
    return blocks.emplace(twoj, std::move(arr)).first->second;
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// FourierData
// ---------------------------------------------------------------------------

template <class K>
void FourierData<K>::add(const FreqVec& tau, const Mode& mode, const K& v) {
  if (Ops<K>::is_zero(v)) return;
  auto key = std::make_pair(tau, mode);
  auto it = coef.find(key);
  if (it == coef.end()) {
    coef.emplace(std::move(key), v);
  } else {
    it->second += v;
    if (Ops<K>::is_zero(it->second)) coef.erase(it);
  }
}

template <class K>
std::vector<Rational> FourierData<K>::g_eigenvalues() const {
  std::vector<Rational> out;
  for (const auto& [key, v] : coef) {
    Rational lam = key.second.eigenvalue();
    if (std::find(out.begin(), out.end(), lam) == out.end()) out.push_back(lam);
  }
  std::sort(out.begin(), out.end());
  return out;
}

template struct FourierData<CES>;
template struct FourierData<std::complex<double>>;

// ---------------------------------------------------------------------------
// Operator application
// ---------------------------------------------------------------------------

namespace {

// Y = a(t,X) + W# applied to f
template <class K>
FourierData<K> apply_Y(const OperatorSpec::Term& term, const FourierData<K>& f, Su2Cache& su2) {
  FourierData<K> out(f.torus_dim, f.group);
  const bool torus_g = f.group.is_torus();
  if constexpr (std::is_same_v<K, CES>) {
    if (!torus_g)
      throw std::invalid_argument(
          "exact coefficients are not available on SU(2) shells; use floating mode");
  }
  for (const auto& [key, v] : f.coef) {
    const auto& [tau, mode] = key;
    // a(t, X) part
    for (int j = 0; j < f.group.dim; ++j) {
      const TrigPoly& aj = term.a.comp[j];
      if (aj.is_zero()) continue;
      if (torus_g) {
        if (sgn(mode.freq[j]) == 0) continue;
        K factor = Ops<K>::mul(Ops<K>::i_times_bigint(mode.freq[j]), v);
        for (const auto& [sigma, c] : aj.coef())
          out.add(add_freq(tau, sigma), mode, Ops<K>::mul(Ops<K>::from_ces(c), factor));
      } else if constexpr (std::is_same_v<K, std::complex<double>>) {
        const auto& blk = su2.get(mode.twoj)[j];
        const int d = mode.twoj + 1;
        for (int k = 0; k < d; ++k) {
          std::complex<double> bkc = blk(k, mode.col - 1);
          if (bkc == std::complex<double>(0, 0)) continue;
          K factor = bkc * v;
          Mode tgt = Mode::su2(mode.twoj, mode.row, k + 1);
          for (const auto& [sigma, c] : aj.coef())
            out.add(add_freq(tau, sigma), tgt, Ops<K>::mul(Ops<K>::from_ces(c), factor));
        }
      }
    }
    // W# part
    for (int k = 0; k < f.torus_dim; ++k) {
      const TrigPoly& bk = term.w.b[k];
      if (bk.is_zero() || tau[k] == 0) continue;
      K factor = Ops<K>::mul(Ops<K>::i_times_long(tau[k]), v);
      for (const auto& [sigma, c] : bk.coef())
        out.add(add_freq(tau, sigma), mode, Ops<K>::mul(Ops<K>::from_ces(c), factor));
    }
  }
  return out;
}

template <class K>
FourierData<K> apply_Q(const OperatorSpec& p, const FourierData<K>& f) {
  FourierData<K> out(f.torus_dim, f.group);
  if (p.q == QKind::Zero) return out;
  for (const auto& [key, v] : f.coef) {
    Rational qs = p.q_symbol(key.first);
    if (sgn(qs) == 0) continue;
    out.add(key.first, key.second, Ops<K>::scale_rational(v, qs));
  }
  return out;
}

template <class K>
FourierData<K> apply_operator_impl(const OperatorSpec& p, const FourierData<K>& f) {
  Su2Cache su2;
  FourierData<K> out = apply_Q(p, f);
  auto subtract_squares = [&](const std::vector<OperatorSpec::Term>& terms) {
    for (const auto& term : terms) {
      FourierData<K> y = apply_Y(term, f, su2);
      FourierData<K> yy = apply_Y(term, y, su2);
      for (const auto& [key, v] : yy.coef) out.add(key.first, key.second, -v);
    }
  };
  subtract_squares(p.terms);
  subtract_squares(p.remainder);
  return out;
}

template <class K>
K inner_impl(const FourierData<K>& f, const FourierData<K>& g) {
  K acc{};
  for (const auto& [key, v] : f.coef) {
    auto it = g.coef.find(key);
    if (it != g.coef.end()) acc += Ops<K>::mul(v, Ops<K>::conj(it->second));
  }
  return acc;
}

}  // namespace

template <class K>
FourierData<K> apply_operator(const OperatorSpec& p, const FourierData<K>& f) {
  return apply_operator_impl(p, f);
}
template FourierData<CES> apply_operator(const OperatorSpec&, const FourierData<CES>&);
template FourierData<std::complex<double>> apply_operator(const OperatorSpec&,
                                                          const FourierData<std::complex<double>>&);

template <class K>
FourierData<K> partial_projection_G(const FourierData<K>& f, const Rational& lambda) {
  FourierData<K> out(f.torus_dim, f.group);
  for (const auto& [key, v] : f.coef)
    if (key.second.eigenvalue() == lambda) out.coef.emplace(key, v);
  return out;
}
template FourierData<CES> partial_projection_G(const FourierData<CES>&, const Rational&);
template FourierData<std::complex<double>> partial_projection_G(
    const FourierData<std::complex<double>>&, const Rational&);

template <class K>
FourierData<K> partial_projection_T(const FourierData<K>& f, const Rational& mu) {
  FourierData<K> out(f.torus_dim, f.group);
  for (const auto& [key, v] : f.coef) {
    BigInt s(0);
    for (long x : key.first) s += BigInt(x) * BigInt(x);
    if (Rational(s) == mu) out.coef.emplace(key, v);
  }
  return out;
}
template FourierData<CES> partial_projection_T(const FourierData<CES>&, const Rational&);
template FourierData<std::complex<double>> partial_projection_T(
    const FourierData<std::complex<double>>&, const Rational&);

CES inner(const FourierExact& f, const FourierExact& g) { return inner_impl(f, g); }
std::complex<double> inner(const FourierFloat& f, const FourierFloat& g) {
  return inner_impl(f, g);
}

ExactScalar norm_sq(const FourierExact& f) {
  ExactScalar acc;
  for (const auto& [key, v] : f.coef) acc += v.norm_sq();
  return acc;
}
double norm_sq(const FourierFloat& f) {
  double acc = 0;
  for (const auto& [key, v] : f.coef) acc += std::norm(v);
  return acc;
}

namespace {

template <class K>
K energy_residual_impl(const OperatorSpec& p, const FourierData<K>& psi) {
  p.validate();
  if (!p.remainder.empty())
    throw std::invalid_argument("energy identity requires an operator without remainder term");
  if (psi.g_eigenvalues().size() != 1)
    throw std::invalid_argument("energy identity requires single-eigenvalue support on G");
  Su2Cache su2;
  FourierData<K> pf = apply_operator_impl(p, psi);
  K acc = inner_impl(pf, psi);
  acc -= inner_impl(apply_Q(p, psi), psi);
  for (const auto& term : p.terms) {
    FourierData<K> y = apply_Y(term, psi, su2);
    acc -= inner_impl(y, y);
  }
  return acc;
}

}  // namespace

CES energy_identity_residual(const OperatorSpec& p, const FourierExact& psi) {
  return energy_residual_impl(p, psi);
}
std::complex<double> energy_identity_residual(const OperatorSpec& p, const FourierFloat& psi) {
  return energy_residual_impl(p, psi);
}

// ---------------------------------------------------------------------------
// tilde-P ellipticity
// ---------------------------------------------------------------------------

namespace {

// exact kernel vector of a singular symmetric rational matrix, scaled to integers
std::vector<long> rational_kernel_integer(std::vector<std::vector<Rational>> a) {
  const size_t n = a.size();
  std::vector<size_t> pivot_col;
  size_t row = 0;
  for (size_t col = 0; col < n && row < n; ++col) {
    size_t piv = row;
    while (piv < n && sgn(a[piv][col]) == 0) ++piv;
    if (piv == n) continue;
    std::swap(a[piv], a[row]);
    Rational d = a[row][col];
    for (size_t c = 0; c < n; ++c) a[row][c] /= d;
    for (size_t r = 0; r < n; ++r) {
      if (r == row || sgn(a[r][col]) == 0) continue;
      Rational f = a[r][col];
      for (size_t c = 0; c < n; ++c) a[r][c] -= f * a[row][c];
    }
    pivot_col.push_back(col);
    ++row;
  }
  // free column -> kernel vector
  std::vector<Rational> v(n, Rational(0));
  for (size_t col = 0; col < n; ++col) {
    if (std::find(pivot_col.begin(), pivot_col.end(), col) != pivot_col.end()) continue;
    v[col] = Rational(1);
    for (size_t r = 0; r < pivot_col.size(); ++r) v[pivot_col[r]] = -a[r][col];
    break;
  }
  BigInt lcm(1);
  for (const auto& q : v) {
    BigInt l;
    mpz_lcm(l.get_mpz_t(), lcm.get_mpz_t(), q.get_den().get_mpz_t());
    lcm = l;
  }
  std::vector<long> out;
  for (const auto& q : v) {
    Rational s = q * Rational(lcm);
    out.push_back(s.get_num().get_si());
  }
  return out;
}

}  // namespace

Ellipticity tildeP_ellipticity(const OperatorSpec& p) {
  p.validate();
  Ellipticity e;
  if (p.q == QKind::LaplacianT) {
    e.elliptic = true;
    e.note = "Q = Laplacian on T: principal symbol dominates |tau|^2";
    return e;
  }
  bool constant_w = true;
  for (const auto& t : p.terms) constant_w &= t.w.is_constant() && t.w.constant_rational();
  for (const auto& t : p.remainder) constant_w &= t.w.is_constant() && t.w.constant_rational();
  const int n = p.torus_dim;
  if (constant_w) {
    // exact: A = Q form + sum w w^T, elliptic iff A (PSD by construction) is nonsingular
    std::vector<std::vector<Rational>> a(n, std::vector<Rational>(n, Rational(0)));
    auto add_vec = [&](const std::vector<Rational>& w) {
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) a[r][c] += w[r] * w[c];
    };
    if (p.q == QKind::ConstantForm)
      for (const auto& w : p.q_vectors) add_vec(w);
    for (const auto& t : p.terms) add_vec(t.w.constant_coords());
    for (const auto& t : p.remainder) add_vec(t.w.constant_coords());
    // determinant by exact elimination
    auto m = a;
    Rational det(1);
    for (int col = 0; col < n; ++col) {
      int piv = col;
      while (piv < n && sgn(m[piv][col]) == 0) ++piv;
      if (piv == n) {
        det = 0;
        break;
      }
      if (piv != col) {
        std::swap(m[piv], m[col]);
        det = -det;
      }
      det *= m[col][col];
      for (int r = col + 1; r < n; ++r) {
        Rational f = m[r][col] / m[col][col];
        for (int c = col; c < n; ++c) m[r][c] -= f * m[col][c];
      }
    }
    if (sgn(det) != 0) {
      e.elliptic = true;
      e.note = "constant-coefficient symbol form is positive definite";
    } else {
      e.elliptic = false;
      e.witness_tau = rational_kernel_integer(a);
      e.note = "symbol form is singular";
    }
    return e;
  }
  // variable coefficients: sample the principal symbol on a grid
  e.sampled = true;
  const int tgrid = 24, dirs = 64;
  double min_sym = std::numeric_limits<double>::infinity();
  std::vector<double> worst_dir(n, 0.0);
  std::vector<int> idx(n, 0);
  std::vector<double> t(n, 0.0);
  Prng rng(0x5eedULL);
  std::vector<std::vector<double>> directions;
  for (int i = 0; i < n; ++i) {
    std::vector<double> d(n, 0.0);
    d[i] = 1.0;
    directions.push_back(d);
  }
  for (int k = 0; k < dirs; ++k) {
    std::vector<double> d(n);
    double s = 0;
    for (int i = 0; i < n; ++i) {
      d[i] = rng.next_gauss();
      s += d[i] * d[i];
    }
    if (s < 1e-12) continue;
    for (auto& x : d) x /= std::sqrt(s);
    directions.push_back(std::move(d));
  }
  const double step = 2.0 * M_PI / tgrid;
  for (;;) {
    for (int i = 0; i < n; ++i) t[i] = idx[i] * step;
    for (const auto& d : directions) {
      double sym = 0;
      if (p.q == QKind::ConstantForm)
        for (const auto& w : p.q_vectors) {
          double dot = 0;
          for (int i = 0; i < n; ++i) dot += w[i].get_d() * d[i];
          sym += dot * dot;
        }
      auto add_field = [&](const TorusField& w) {
        double dot = 0;
        for (int k = 0; k < n; ++k) dot += w.b[k].eval(t).real() * d[k];
        sym += dot * dot;
      };
      for (const auto& term : p.terms) add_field(term.w);
      for (const auto& term : p.remainder) add_field(term.w);
      if (sym < min_sym) {
        min_sym = sym;
        worst_dir = d;
      }
    }
    int i = 0;
    while (i < n && ++idx[i] == tgrid) idx[i++] = 0;
    if (i == n) break;
  }
  if (min_sym > 1e-9) {
    e.elliptic = true;
    e.note = "sampled principal symbol bounded below on the grid";
  } else {
    e.elliptic = false;
    for (double x : worst_dir) e.witness_tau.push_back(std::lround(x * 8));
    e.note = "sampled principal symbol vanishes";
  }
  return e;
}

// ---------------------------------------------------------------------------
// Final-inequality probe
// ---------------------------------------------------------------------------

ProbeResult final_inequality_probe(const OperatorSpec& p, const Rational& lambda_max,
                                   int trials, std::uint64_t seed) {
  p.validate();
  ProbeResult out;
  out.seed = seed;
  out.trials = trials;
  // hypotheses of the sufficiency theorem: commuting range per term
  for (size_t l = 0; l < p.terms.size(); ++l) {
    if (p.terms[l].a.is_zero()) continue;
    if (!fields::commutativity_check(p.terms[l].a)) {
      out.hypotheses_ok = false;
      out.hypothesis_note = "term " + std::to_string(l + 1) +
                            ": range does not span a commutative subalgebra (probe still run)";
    }
  }
  auto shells = spectral::enumerate_shells(p.group, lambda_max);
  const long tb = out.tau_box;
  std::vector<ProbeShell> per(shells.size());
  parallel_chunks(shells.size(), 1, [&](std::size_t c, std::size_t b, std::size_t eend) {
    (void)c;
    for (std::size_t si = b; si < eend; ++si) {
      const auto& shell = shells[si];
      if (sgn(shell.lambda) == 0) {
        per[si].lambda = shell.lambda;
        per[si].min_ratio = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      ProbeShell ps;
      ps.lambda = shell.lambda;
      double best = std::numeric_limits<double>::infinity();
      // tau support box on T^n
      std::vector<FreqVec> taus;
      {
        FreqVec tau(p.torus_dim, 0);
        std::function<void(int)> rec = [&](int pos) {
          if (pos == p.torus_dim) {
            taus.push_back(tau);
            return;
          }
          for (long x = -tb; x <= tb; ++x) {
            tau[pos] = x;
            rec(pos + 1);
          }
        };
        rec(0);
      }
      if (p.group.is_torus()) {
        // exact per-mode path: <P e, e> at unit basis vectors
        ps.exact_path = true;
        for (const auto& mode : shell.modes)
          for (const auto& tau : taus) {
            FourierExact e(p.torus_dim, p.group);
            e.add(tau, mode, CES(ExactScalar(Rational(1))));
            FourierExact pe = apply_operator(p, e);
            CES val = inner(pe, e);
            best = std::min(best, val.re.to_double());
          }
      }
      for (int trial = 0; trial < trials; ++trial) {
        Prng rng(seed + 0xabcdef * static_cast<std::uint64_t>(si) + trial);
        FourierFloat psi(p.torus_dim, p.group);
        for (const auto& mode : shell.modes)
          for (const auto& tau : taus) {
            bool tau_zero = std::all_of(tau.begin(), tau.end(), [](long x) { return x == 0; });
            // on the lambda=0 shell P annihilates global constants; sample zero-mean in t
            if (sgn(shell.lambda) == 0 && tau_zero) continue;
            psi.add(tau, mode, std::complex<double>(rng.next_sym(), rng.next_sym()));
          }
        double n2 = norm_sq(psi);
        if (n2 < 1e-12) continue;
        FourierFloat ppsi = apply_operator(p, psi);
        best = std::min(best, inner(ppsi, psi).real() / n2);
      }
      ps.min_ratio = best;
      per[si] = ps;
    }
  });
  out.all_positive = true;
  for (const auto& ps : per) {
    if (std::isnan(ps.min_ratio)) continue;
    out.per_shell.push_back(ps);
    if (!(ps.min_ratio > 0)) out.all_positive = false;
  }
  // lower-envelope fit of the per-shell minima
  std::vector<std::pair<double, double>> pts;
  double run = std::numeric_limits<double>::infinity();
  for (const auto& ps : out.per_shell) {
    if (!(ps.min_ratio > 0)) continue;
    if (ps.min_ratio < run) {
      run = ps.min_ratio;
      pts.emplace_back(std::log2(1.0 + ps.lambda.get_d()), std::log2(ps.min_ratio));
    }
  }
  if (pts.size() < 3) {
    pts.clear();
    for (const auto& ps : out.per_shell)
      if (ps.min_ratio > 0)
        pts.emplace_back(std::log2(1.0 + ps.lambda.get_d()), std::log2(ps.min_ratio));
  }
  LogFit fit = log_fit(pts);
  if (fit.ok) {
    out.fitted_rho = -fit.slope;
    out.fitted_C = std::exp2(fit.intercept);
    out.fit_r2 = fit.r2;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Smoothness classification
// ---------------------------------------------------------------------------

namespace {

struct BlockTable {
  // (mu, lambda) -> log2 of block norm (0.5*log2 of norm^2), skipping zero blocks
  std::vector<std::tuple<Rational, Rational, double>> rows;
};

template <class K>
BlockTable block_norms(const FourierData<K>& f) {
  BlockTable t;
  std::map<std::pair<Rational, Rational>, ExactScalar> acc_exact;
  std::map<std::pair<Rational, Rational>, double> acc_float;
  for (const auto& [key, v] : f.coef) {
    BigInt s(0);
    for (long x : key.first) s += BigInt(x) * BigInt(x);
    auto mk = std::make_pair(Rational(s), key.second.eigenvalue());
    if constexpr (std::is_same_v<K, CES>)
      acc_exact[mk] += v.norm_sq();
    else
      acc_float[mk] += std::norm(v);
  }
  if constexpr (std::is_same_v<K, CES>) {
    for (const auto& [mk, n2] : acc_exact) {
      if (n2.is_zero()) continue;
      t.rows.emplace_back(mk.first, mk.second, 0.5 * n2.log2());
    }
  } else {
    for (const auto& [mk, n2] : acc_float) {
      if (n2 <= 0) continue;
      t.rows.emplace_back(mk.first, mk.second, 0.5 * std::log2(n2));
    }
  }
  return t;
}

double log2_1p_sum(const Rational& mu, const Rational& lambda) {
  return log2_rational(1 + mu + lambda);
}

}  // namespace

std::string SmoothnessReport::str() const {
  switch (verdict) {
    case Verdict::ConsistentSmooth: return "ConsistentSmooth";
    case Verdict::DistributionOrder: return "DistributionOrder";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

template <class K>
SmoothnessReport classify_smoothness(const FourierData<K>& f, double s_req) {
  SmoothnessReport rep;
  rep.s_tested = s_req;
  BlockTable t = block_norms(f);
  rep.blocks = static_cast<int>(t.rows.size());
  if (t.rows.empty()) {
    // exactly annihilated data decays trivially
    rep.verdict = SmoothnessReport::Verdict::ConsistentSmooth;
    rep.slope = -std::numeric_limits<double>::infinity();
    rep.r2 = 1.0;
    return rep;
  }
  std::vector<double> keys;
  std::vector<std::pair<double, double>> pts;
  for (const auto& [mu, lam, l2n] : t.rows) {
    double x = log2_1p_sum(mu, lam);
    pts.emplace_back(x, l2n);
    if (std::find_if(keys.begin(), keys.end(), [&](double k) { return std::abs(k - x) < 1e-12; }) ==
        keys.end())
      keys.push_back(x);
  }
  if (keys.size() < 3)
    throw std::invalid_argument("classify_smoothness: support spans fewer than 3 distinct mu+lambda values");
  LogFit fit = log_fit(pts);
  rep.slope = fit.slope;
  rep.r2 = fit.r2;
  if (fit.slope <= -s_req) {
    rep.verdict = SmoothnessReport::Verdict::ConsistentSmooth;
  } else {
    rep.verdict = SmoothnessReport::Verdict::DistributionOrder;
    rep.order = std::max(0.0, fit.slope);
  }
  return rep;
}
template SmoothnessReport classify_smoothness(const FourierData<CES>&, double);
template SmoothnessReport classify_smoothness(const FourierData<std::complex<double>>&, double);

template <class K>
ConeReport cone_split_check(const FourierData<K>& f, double theta, double s) {
  if (!(theta > 0.0 && theta < 1.0))
    throw std::invalid_argument("cone_split_check: theta must lie in (0,1)");
  if (!(s > 0)) throw std::invalid_argument("cone_split_check: s must be positive");
  ConeReport rep;
  BlockTable t = block_norms(f);
  if (t.rows.empty()) {
    rep.hyp1_ok = rep.hyp2_ok = rep.combined_ok = rep.smooth_consistent = true;
    rep.combined_exponent = s;
    rep.note = "data is exactly zero";
    return rep;
  }
  // hypothesis (1): per-lambda norms vs (1+lambda)
  std::map<Rational, double> lam_n2;  // log2-accumulated per lambda: store linear in log space
  std::map<Rational, double> lam_acc;
  for (const auto& [mu, lam, l2n] : t.rows) {
    double n2 = std::exp2(2.0 * l2n);
    lam_acc[lam] += n2;
  }
  double c1 = -std::numeric_limits<double>::infinity();  // log2 C of hypothesis (1) at rate s
  bool hyp1_decay = true;
  {
    std::vector<std::pair<double, double>> pts;
    for (const auto& [lam, n2] : lam_acc) {
      double l2 = 0.5 * std::log2(n2);
      double x = log2_rational(1 + lam);
      pts.emplace_back(x, l2);
      c1 = std::max(c1, l2 + s * x);
    }
    if (pts.size() >= 3) {
      LogFit fit = log_fit(pts);
      hyp1_decay = fit.ok && fit.slope <= -s + 1e-9;
    }
  }
  rep.hyp1_ok = hyp1_decay;
  // hypothesis (2) on the cone (1+lambda) <= (1+mu)^theta
  bool hyp2 = true;
  {
    std::vector<std::pair<double, double>> pts;
    for (const auto& [mu, lam, l2n] : t.rows) {
      if (log2_rational(1 + lam) <= theta * log2_rational(1 + mu)) {
        pts.emplace_back(log2_1p_sum(mu, lam), l2n);
      }
    }
    if (pts.size() >= 3) {
      LogFit fit = log_fit(pts);
      hyp2 = fit.ok && fit.slope <= -s + 1e-9;
    }
  }
  rep.hyp2_ok = hyp2;
  // combined bound on the complement: norm <= C1 (1+mu+lambda)^{-s*theta/2}
  bool combined = true;
  const double srate = s * theta / 2.0;
  for (const auto& [mu, lam, l2n] : t.rows) {
    if (log2_rational(1 + lam) <= theta * log2_rational(1 + mu)) continue;
    if (l2n > c1 - srate * log2_1p_sum(mu, lam) + 1e-9) {
      combined = false;
      break;
    }
  }
  rep.combined_ok = combined;
  rep.smooth_consistent = rep.hyp1_ok && rep.hyp2_ok && rep.combined_ok;
  rep.combined_exponent = std::min(s, srate);
  if (!rep.smooth_consistent) rep.note = "a hypothesis failed on the tested window";
  return rep;
}
template ConeReport cone_split_check(const FourierData<CES>&, double, double);
template ConeReport cone_split_check(const FourierData<std::complex<double>>&, double, double);

// ---------------------------------------------------------------------------
// Poincare-type estimate and graph-norm bound on T^1
// ---------------------------------------------------------------------------

namespace {

// integral over A (union of intervals in [0,2pi)) of e^{i k t} dt / (2pi)
std::complex<double> interval_fourier(const std::vector<std::pair<double, double>>& A, long k) {
  std::complex<double> acc(0, 0);
  for (const auto& [a, b] : A) {
    if (k == 0) {
      acc += (b - a) / (2.0 * M_PI);
    } else {
      std::complex<double> ik(0, static_cast<double>(k));
      acc += (std::exp(ik * b) - std::exp(ik * a)) / (2.0 * M_PI * ik);
    }
  }
  return acc;
}

double poincare_run(double delta, int trials, std::uint64_t seed) {
  Prng rng(seed);
  double worst = 0;
  const int deg = 5;
  for (int trial = 0; trial < trials; ++trial) {
    // random open set: 1..3 intervals of total measure >= delta
    int pieces = (trial == 0) ? 1 : 1 + static_cast<int>(rng.next_below(3));
    double target = (trial == 0) ? delta : delta + (1.0 - delta) * rng.next_double() * 0.5;
    std::vector<std::pair<double, double>> A;
    double len = target * 2.0 * M_PI / pieces;
    for (int p = 0; p < pieces; ++p) {
      double start = 2.0 * M_PI * (p + 0.3 * rng.next_double()) / pieces;
      A.emplace_back(start, start + len);
    }
    // random trig polynomial (trial 0: the constant 1, the flat extremal candidate)
    std::map<long, std::complex<double>> c;
    if (trial == 0) {
      c[0] = 1.0;
    } else {
      for (long k = -deg; k <= deg; ++k)
        c[k] = std::complex<double>(rng.next_sym(), rng.next_sym());
    }
    double n2 = 0, d2 = 0;
    for (const auto& [k, v] : c) {
      n2 += std::norm(v);
      d2 += static_cast<double>(k) * k * std::norm(v);
    }
    // ||psi||^2_{L2(A)} = sum_{k,k'} c_k conj(c_k') Int_A e^{i(k-k')t}
    double a2 = 0;
    for (const auto& [k, v] : c)
      for (const auto& [k2, v2] : c)
        a2 += (v * std::conj(v2) * interval_fourier(A, k - k2)).real();
    double denom = a2 + d2;
    if (denom <= 1e-12) continue;
    worst = std::max(worst, n2 / denom);
  }
  return worst;
}

}  // namespace

PoincareResult poincare_estimate(double delta, int trials, std::uint64_t seed) {
  if (!(delta > 0.0 && delta <= 1.0))
    throw std::invalid_argument("poincare_estimate: delta must lie in (0,1]");
  if (trials < 1) throw std::invalid_argument("poincare_estimate: trials must be >= 1");
  PoincareResult out;
  out.delta = delta;
  out.seed = seed;
  out.trials = trials;
  out.c_hat = poincare_run(delta, trials, seed);
  out.c_hat_revalidated = poincare_run(delta, trials, seed + 1);
  double hi = std::max(out.c_hat, out.c_hat_revalidated);
  out.stable = hi > 0 && std::abs(out.c_hat - out.c_hat_revalidated) <= 0.2 * hi;
  return out;
}

GraphNormResult graph_norm_bound(const TorusField& w, int trials, std::uint64_t seed) {
  for (const auto& p : w.b)
    if (!p.is_real())
      throw std::invalid_argument("graph_norm_bound: field coefficients must be real");
  GraphNormResult out;
  out.seed = seed;
  out.sup_coeff_bound = w.sup_norm_grid(512);
  Prng rng(seed);
  const int n = w.dim();
  const long deg = 3;
  for (int trial = 0; trial < trials; ++trial) {
    // random exact trig polynomial with small rational coefficients
    TrigPoly psi(n);
    FreqVec tau(n, 0);
    std::function<void(int)> rec = [&](int pos) {
      if (pos == n) {
        Rational re(static_cast<long>(rng.next_below(17)) - 8, 1 + static_cast<long>(rng.next_below(4)));
        Rational im(static_cast<long>(rng.next_below(17)) - 8, 1 + static_cast<long>(rng.next_below(4)));
        psi.add_term(tau, CES(ExactScalar(re), ExactScalar(im)));
        return;
      }
      for (long x = -deg; x <= deg; ++x) {
        tau[pos] = x;
        rec(pos + 1);
      }
    };
    rec(0);
    // ||d psi||^2 = sum_k ||d_k psi||^2 (exact), skip near-constant draws
    ExactScalar d2;
    std::vector<TrigPoly> dpsi;
    for (int k = 0; k < n; ++k) {
      dpsi.push_back(psi.derivative(k));
      d2 += dpsi.back().l2_inner(dpsi.back()).re;
    }
    if (d2.is_zero()) continue;  // constant psi: both norms vanish
    TrigPoly wpsi(n);
    for (int k = 0; k < n; ++k) wpsi = wpsi + (w.b[k] * dpsi[k]);
    ExactScalar w2 = wpsi.l2_inner(wpsi).re;
    double ratio = std::sqrt(w2.to_double() / d2.to_double());
    out.max_ratio = std::max(out.max_ratio, ratio);
    ++out.samples_used;
  }
  return out;
}

}  // namespace ghlab::op
