#include "fields.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "prng.hpp"

namespace ghlab::fields {

// ---------------------------------------------------------------------------
// TrigPoly
// ---------------------------------------------------------------------------

TrigPoly TrigPoly::constant(int n, ExactScalar v) {
  TrigPoly p(n);
  p.add_term(FreqVec(n, 0), CES(std::move(v)));
  return p;
}

TrigPoly TrigPoly::cosine(int n, int axis, const Rational& amplitude, long freq) {
  // amp*cos(freq*t_axis) = amp/2 (e^{i freq t} + e^{-i freq t})
  TrigPoly p(n);
  FreqVec tau(n, 0);
  tau[axis] = freq;
  p.add_term(tau, CES(ExactScalar(amplitude / 2)));
  tau[axis] = -freq;
  p.add_term(tau, CES(ExactScalar(amplitude / 2)));
  return p;
}

TrigPoly TrigPoly::sine(int n, int axis, const Rational& amplitude, long freq) {
  // amp*sin(freq*t_axis) = amp/(2i) (e^{i freq t} - e^{-i freq t})
  TrigPoly p(n);
  FreqVec tau(n, 0);
  tau[axis] = freq;
  p.add_term(tau, CES(ExactScalar(0), ExactScalar(-amplitude / 2)));
  tau[axis] = -freq;
  p.add_term(tau, CES(ExactScalar(0), ExactScalar(amplitude / 2)));
  return p;
}

void TrigPoly::add_term(const FreqVec& tau, const CES& c) {
  if (static_cast<int>(tau.size()) != dim_)
    throw std::invalid_argument("TrigPoly: frequency dimension mismatch");
  auto it = coef_.find(tau);
  if (it == coef_.end()) {
    if (!c.is_zero()) coef_.emplace(tau, c);
  } else {
    it->second += c;
    if (it->second.is_zero()) coef_.erase(it);
  }
}

void TrigPoly::prune() {
  for (auto it = coef_.begin(); it != coef_.end();)
    it = it->second.is_zero() ? coef_.erase(it) : std::next(it);
}

bool TrigPoly::is_real() const {
  for (const auto& [tau, c] : coef_) {
    FreqVec neg(tau.size());
    for (size_t i = 0; i < tau.size(); ++i) neg[i] = -tau[i];
    auto it = coef_.find(neg);
    if (it == coef_.end()) return false;
    if (!(it->second - c.conj()).is_zero()) return false;
  }
  return true;
}

bool TrigPoly::is_constant() const {
  for (const auto& [tau, c] : coef_)
    for (long f : tau)
      if (f != 0) return false;
  return true;
}

TrigPoly TrigPoly::operator+(const TrigPoly& o) const {
  TrigPoly r = *this;
  for (const auto& [tau, c] : o.coef_) r.add_term(tau, c);
  return r;
}

TrigPoly TrigPoly::operator-(const TrigPoly& o) const {
  TrigPoly r = *this;
  for (const auto& [tau, c] : o.coef_) r.add_term(tau, -c);
  return r;
}

TrigPoly TrigPoly::operator*(const TrigPoly& o) const {
  TrigPoly r(dim_);
  for (const auto& [ta, ca] : coef_)
    for (const auto& [tb, cb] : o.coef_) {
      FreqVec s(ta.size());
      for (size_t i = 0; i < ta.size(); ++i) s[i] = ta[i] + tb[i];
      r.add_term(s, ca * cb);
    }
  return r;
}

TrigPoly TrigPoly::scaled(const CES& c) const {
  TrigPoly r(dim_);
  if (c.is_zero()) return r;
  for (const auto& [tau, v] : coef_) r.coef_.emplace(tau, v * c);
  r.prune();
  return r;
}

TrigPoly TrigPoly::derivative(int axis) const {
  TrigPoly r(dim_);
  for (const auto& [tau, v] : coef_) {
    if (tau[axis] == 0) continue;
    r.coef_.emplace(tau, v * CES::i_times(ExactScalar(tau[axis])));
  }
  return r;
}

CES TrigPoly::l2_inner(const TrigPoly& o) const {
  CES acc;
  for (const auto& [tau, v] : coef_) {
    auto it = o.coef_.find(tau);
    if (it != o.coef_.end()) acc += v * it->second.conj();
  }
  return acc;
}

std::complex<double> TrigPoly::eval(const std::vector<double>& t) const {
  std::complex<double> acc(0, 0);
  for (const auto& [tau, v] : coef_) {
    double phase = 0;
    for (size_t i = 0; i < tau.size(); ++i) phase += tau[i] * t[i];
    acc += std::complex<double>(v.re.to_double(), v.im.to_double()) *
           std::exp(std::complex<double>(0, phase));
  }
  return acc;
}

// ---------------------------------------------------------------------------
// LieElement, bracket, hull
// ---------------------------------------------------------------------------

LieElement LieElement::basis(GroupSpec g, int axis) {
  std::vector<ExactScalar> c(g.dim, ExactScalar(0));
  c.at(axis) = ExactScalar(1);
  return LieElement(g, std::move(c));
}

bool LieElement::is_zero() const {
  for (const auto& v : c)
    if (!v.is_zero()) return false;
  return true;
}

double LieElement::norm() const {
  double s = 0;
  for (const auto& v : c) {
    double d = v.to_double();
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<double> LieElement::coords_d() const {
  std::vector<double> d;
  d.reserve(c.size());
  for (const auto& v : c) d.push_back(v.to_double());
  return d;
}

LieElement bracket(const LieElement& x, const LieElement& y) {
  if (!(x.group == y.group)) throw std::invalid_argument("bracket: group mismatch");
  if (x.group.is_torus())
    return LieElement(x.group, std::vector<ExactScalar>(x.group.dim, ExactScalar(0)));
  // su(2) cyclic brackets: [x, y]_c = sum eps_{abc} x_a y_b
  std::vector<ExactScalar> r(3, ExactScalar(0));
  r[0] = x.c[1] * y.c[2] - x.c[2] * y.c[1];
  r[1] = x.c[2] * y.c[0] - x.c[0] * y.c[2];
  r[2] = x.c[0] * y.c[1] - x.c[1] * y.c[0];
  return LieElement(x.group, std::move(r));
}

namespace {

Rational rational_of_double(double d) {
  Rational r;
  mpq_set_d(r.get_mpq_t(), d);
  return r;
}

constexpr double kHullTol = 1e-10;

// appends v orthonormalized against basis if independent; returns true if added
bool gs_append(std::vector<Eigen::VectorXd>& basis, Eigen::VectorXd v) {
  for (const auto& b : basis) v -= b.dot(v) * b;
  double n = v.norm();
  if (n <= kHullTol) return false;
  basis.push_back(v / n);
  return true;
}

Eigen::Vector3d cross3(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return Eigen::Vector3d(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
                         a[0] * b[1] - a[1] * b[0]);
}

}  // namespace

std::vector<LieElement> lie_hull(const std::vector<LieElement>& gens) {
  if (gens.empty()) throw std::invalid_argument("lie_hull: empty generator set");
  GroupSpec g = gens.front().group;
  std::vector<Eigen::VectorXd> basis;
  for (const auto& x : gens) {
    if (!(x.group == g)) throw std::invalid_argument("lie_hull: group mismatch");
    Eigen::VectorXd v(g.dim);
    auto cd = x.coords_d();
    for (int i = 0; i < g.dim; ++i) v[i] = cd[i];
    gs_append(basis, v);
    if (static_cast<int>(basis.size()) == g.dim) break;
  }
  if (!g.is_torus()) {
    bool grew = true;
    while (grew && static_cast<int>(basis.size()) < g.dim) {
      grew = false;
      size_t n = basis.size();
      for (size_t i = 0; i < n && !grew; ++i)
        for (size_t j = i + 1; j < n && !grew; ++j)
          grew = gs_append(basis, cross3(basis[i], basis[j]));
    }
  }
  std::vector<LieElement> out;
  out.reserve(basis.size());
  for (const auto& b : basis) {
    std::vector<ExactScalar> c;
    c.reserve(g.dim);
    for (int i = 0; i < g.dim; ++i) c.emplace_back(rational_of_double(b[i]));
    out.emplace_back(g, std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// CoefficientMap and range basis
// ---------------------------------------------------------------------------

CoefficientMap::CoefficientMap(GroupSpec g, int n) : group(g), torus_dim(n) {
  if (n < 1) throw std::invalid_argument("CoefficientMap: torus dimension must be >= 1");
  comp.assign(static_cast<size_t>(g.dim), TrigPoly(n));
}

void CoefficientMap::validate() const {
  if (static_cast<int>(comp.size()) != group.dim)
    throw std::invalid_argument("CoefficientMap: component count != group dimension");
  for (size_t j = 0; j < comp.size(); ++j) {
    if (comp[j].dim() != torus_dim)
      throw std::invalid_argument("CoefficientMap: component " + std::to_string(j + 1) +
                                  " has wrong torus dimension");
    if (!comp[j].is_real())
      throw std::invalid_argument("CoefficientMap: component " + std::to_string(j + 1) +
                                  " violates conjugate symmetry (must be real-valued)");
  }
}

bool CoefficientMap::is_zero() const {
  for (const auto& p : comp)
    if (!p.is_zero()) return false;
  return true;
}

bool CoefficientMap::is_constant() const {
  for (const auto& p : comp)
    if (!p.is_constant()) return false;
  return true;
}

LieElement CoefficientMap::value_at(const std::vector<double>& t) const {
  std::vector<ExactScalar> c;
  c.reserve(comp.size());
  for (const auto& p : comp) c.emplace_back(rational_of_double(p.eval(t).real()));
  return LieElement(group, std::move(c));
}

LieElement CoefficientMap::constant_value() const {
  std::vector<ExactScalar> c;
  c.reserve(comp.size());
  FreqVec zero(torus_dim, 0);
  for (const auto& p : comp) {
    auto it = p.coef().find(zero);
    c.push_back(it == p.coef().end() ? ExactScalar(0) : it->second.re);
  }
  return LieElement(group, std::move(c));
}

namespace {

ExactScalar es_det(std::vector<std::vector<ExactScalar>> m) {
  size_t n = m.size();
  if (n == 0) return ExactScalar(1);
  if (n == 1) return m[0][0];
  if (n == 2) return m[0][0] * m[1][1] - m[0][1] * m[1][0];
  ExactScalar acc;
  for (size_t k = 0; k < n; ++k) {
    std::vector<std::vector<ExactScalar>> sub;
    sub.reserve(n - 1);
    for (size_t r = 1; r < n; ++r) {
      std::vector<ExactScalar> row;
      row.reserve(n - 1);
      for (size_t c = 0; c < n; ++c)
        if (c != k) row.push_back(m[r][c]);
      sub.push_back(std::move(row));
    }
    ExactScalar term = m[0][k] * es_det(std::move(sub));
    if (k % 2 == 0)
      acc += term;
    else
      acc -= term;
  }
  return acc;
}

}  // namespace

RangeBasis range_basis(const CoefficientMap& a) {
  a.validate();
  if (a.is_zero()) throw zero_map_error();
  const int m = a.group.dim;

  // exact Gram matrix in L^2 via Parseval; components are real so entries are real
  std::vector<std::vector<ExactScalar>> gram(m, std::vector<ExactScalar>(m, ExactScalar(0)));
  for (int j = 0; j < m; ++j)
    for (int k = 0; k <= j; ++k) {
      CES ip = a.comp[j].l2_inner(a.comp[k]);
      gram[j][k] = ip.re;
      gram[k][j] = ip.re;
    }

  RangeBasis rb;
  bool exact_ok = true;
  try {
    // greedy: keep j if the bordered Gram determinant stays nonzero
    for (int j = 0; j < m; ++j) {
      std::vector<int> cand = rb.basis_idx;
      cand.push_back(j);
      std::vector<std::vector<ExactScalar>> sub(cand.size(),
                                                std::vector<ExactScalar>(cand.size()));
      for (size_t r = 0; r < cand.size(); ++r)
        for (size_t c = 0; c < cand.size(); ++c) sub[r][c] = gram[cand[r]][cand[c]];
      if (!es_det(std::move(sub)).is_zero())
        rb.basis_idx.push_back(j);
      else
        rb.rest_idx.push_back(j);
    }
    // expansion coefficients lambda_{qp}: a_{i_q} = sum_p lambda_{qp} a_{j_p},
    // solved from the selected Gram block by Cramer's rule
    const size_t mp = rb.basis_idx.size(), d = rb.rest_idx.size();
    std::vector<std::vector<ExactScalar>> gsel(mp, std::vector<ExactScalar>(mp));
    for (size_t r = 0; r < mp; ++r)
      for (size_t c = 0; c < mp; ++c) gsel[r][c] = gram[rb.basis_idx[r]][rb.basis_idx[c]];
    ExactScalar det = es_det(gsel);
    rb.lambda.assign(d, std::vector<ExactScalar>(mp, ExactScalar(0)));
    for (size_t q = 0; q < d; ++q) {
      for (size_t p = 0; p < mp; ++p) {
        auto mod = gsel;
        for (size_t r = 0; r < mp; ++r) mod[r][p] = gram[rb.basis_idx[r]][rb.rest_idx[q]];
        auto quot = es_det(std::move(mod)).divided_by(det);
        if (!quot) throw mixed_atoms();
        rb.lambda[q][p] = *quot;
      }
    }
  } catch (const mixed_atoms&) {
    exact_ok = false;
  }

  if (!exact_ok) {
    // double-precision fallback, rank decisions with a fixed tolerance
    rb = RangeBasis{};
    rb.exact = false;
    Eigen::MatrixXd gd(m, m);
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) gd(j, k) = gram[j][k].to_double();
    Eigen::MatrixXd chol = Eigen::MatrixXd::Zero(0, 0);
    std::vector<int> sel;
    for (int j = 0; j < m; ++j) {
      std::vector<int> cand = sel;
      cand.push_back(j);
      Eigen::MatrixXd sub(cand.size(), cand.size());
      for (size_t r = 0; r < cand.size(); ++r)
        for (size_t c = 0; c < cand.size(); ++c) sub(r, c) = gd(cand[r], cand[c]);
      if (std::abs(sub.determinant()) > 1e-12)
        sel.push_back(j);
      else
        rb.rest_idx.push_back(j);
    }
    rb.basis_idx = sel;
    const size_t mp = sel.size(), d = rb.rest_idx.size();
    Eigen::MatrixXd gsel(mp, mp);
    for (size_t r = 0; r < mp; ++r)
      for (size_t c = 0; c < mp; ++c) gsel(r, c) = gd(sel[r], sel[c]);
    rb.lambda.assign(d, std::vector<ExactScalar>(mp, ExactScalar(0)));
    for (size_t q = 0; q < d; ++q) {
      Eigen::VectorXd rhs(mp);
      for (size_t r = 0; r < mp; ++r) rhs(r) = gd(sel[r], rb.rest_idx[q]);
      Eigen::VectorXd sol = gsel.ldlt().solve(rhs);
      for (size_t p = 0; p < mp; ++p) rb.lambda[q][p] = ExactScalar(rational_of_double(sol(p)));
    }
  }

  // L_p = X_{j_p} + sum_q lambda_{qp} X_{i_q}; alpha_p = a_{j_p}
  for (size_t p = 0; p < rb.basis_idx.size(); ++p) {
    std::vector<ExactScalar> c(m, ExactScalar(0));
    c[rb.basis_idx[p]] = ExactScalar(1);
    for (size_t q = 0; q < rb.rest_idx.size(); ++q) c[rb.rest_idx[q]] = rb.lambda[q][p];
    rb.L.emplace_back(a.group, std::move(c));
    rb.alpha.push_back(a.comp[rb.basis_idx[p]]);
  }
  return rb;
}

bool commutativity_check(const CoefficientMap& a) {
  if (a.group.is_torus()) return true;
  RangeBasis rb = range_basis(a);
  for (size_t i = 0; i < rb.L.size(); ++i)
    for (size_t j = i + 1; j < rb.L.size(); ++j)
      if (!bracket(rb.L[i], rb.L[j]).is_zero()) return false;
  return true;
}

double D_value(const RangeBasis& rb, const std::vector<double>& t,
               const std::vector<double>& gamma) {
  if (gamma.size() != rb.alpha.size())
    throw std::invalid_argument("D_value: gamma length != range basis rank");
  double s = 0;
  for (size_t p = 0; p < gamma.size(); ++p) s += rb.alpha[p].eval(t).real() * gamma[p];
  return s * s;
}

double D_value(const CoefficientMap& a, const std::vector<double>& t,
               const std::vector<double>& gamma) {
  return D_value(range_basis(a), t, gamma);
}

namespace {

// uniform grid on [0, 2pi)^n; calls fn(t)
template <class Fn>
void for_grid(int n, int t_grid, Fn&& fn) {
  std::vector<int> idx(n, 0);
  std::vector<double> t(n, 0.0);
  const double step = 2.0 * M_PI / t_grid;
  for (;;) {
    for (int i = 0; i < n; ++i) t[i] = idx[i] * step;
    fn(t);
    int i = 0;
    while (i < n && ++idx[i] == t_grid) idx[i++] = 0;
    if (i == n) break;
  }
}

}  // namespace

double superlevel_measure(const CoefficientMap& a, const std::vector<double>& gamma,
                          double threshold, int t_grid) {
  RangeBasis rb = range_basis(a);
  long count = 0, total = 0;
  for_grid(a.torus_dim, t_grid, [&](const std::vector<double>& t) {
    ++total;
    if (D_value(rb, t, gamma) > threshold) ++count;
  });
  return static_cast<double>(count) / static_cast<double>(total);
}

AlphaDelta estimate_alpha_delta(const CoefficientMap& a, int gamma_samples, int t_grid,
                                std::uint64_t seed) {
  if (gamma_samples < 1 || t_grid < 2)
    throw std::invalid_argument("estimate_alpha_delta: positive sample counts required");
  RangeBasis rb = range_basis(a);
  const int mp = rb.rank();

  std::vector<std::vector<double>> gammas;
  for (int p = 0; p < mp; ++p) {  // canonical directions always included
    std::vector<double> g(mp, 0.0);
    g[p] = 1.0;
    gammas.push_back(g);
  }
  Prng rng(seed);
  while (static_cast<int>(gammas.size()) < mp + gamma_samples) {
    std::vector<double> g(mp);
    double n2 = 0;
    for (int p = 0; p < mp; ++p) {
      g[p] = rng.next_gauss();
      n2 += g[p] * g[p];
    }
    if (n2 < 1e-12) continue;
    double n = std::sqrt(n2);
    for (auto& v : g) v /= n;
    gammas.push_back(std::move(g));
  }

  // D values per gamma over the grid
  std::vector<std::vector<double>> dvals(gammas.size());
  for (size_t gi = 0; gi < gammas.size(); ++gi) {
    auto& dv = dvals[gi];
    for_grid(a.torus_dim, t_grid, [&](const std::vector<double>& t) {
      dv.push_back(D_value(rb, t, gammas[gi]));
    });
  }
  double min_max = std::numeric_limits<double>::infinity();
  for (const auto& dv : dvals) min_max = std::min(min_max, *std::max_element(dv.begin(), dv.end()));

  AlphaDelta out;
  out.rank = mp;
  out.seed = seed;
  out.gamma_samples = gamma_samples;
  out.t_grid = t_grid;
  const int kLevels = 16;
  const double total = dvals.empty() ? 1.0 : static_cast<double>(dvals[0].size());
  for (int i = kLevels - 1; i >= 1; --i) {
    double alpha = min_max * i / kLevels;
    double delta = 1.0;
    for (const auto& dv : dvals) {
      long cnt = std::count_if(dv.begin(), dv.end(), [&](double v) { return v > alpha; });
      delta = std::min(delta, cnt / total);
    }
    if (delta > 0) {
      out.alpha = alpha;
      out.delta = delta;
      break;
    }
  }
  return out;
}

GroupSpec SystemSpec::group() const {
  if (fields.empty()) throw std::invalid_argument("SystemSpec: empty system");
  return fields.front().group;
}

int SystemSpec::torus_dim() const {
  if (fields.empty()) throw std::invalid_argument("SystemSpec: empty system");
  return fields.front().torus_dim;
}

}  // namespace ghlab::fields
