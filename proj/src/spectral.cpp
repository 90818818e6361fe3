#include "spectral.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace ghlab::spectral {

std::string GroupSpec::str() const {
  if (is_torus()) return "T^" + std::to_string(dim);
  return "SU(2)";
}

Mode Mode::torus_freq(std::vector<BigInt> xi) {
  Mode m;
  m.kind = Kind::TorusFreq;
  m.freq = std::move(xi);
  return m;
}

Mode Mode::torus_freq_i(const std::vector<long>& xi) {
  std::vector<BigInt> v;
  v.reserve(xi.size());
  for (long x : xi) v.emplace_back(x);
  return torus_freq(std::move(v));
}

Mode Mode::su2(int twoj, int row, int col) {
  if (twoj < 0 || row < 1 || col < 1 || row > twoj + 1 || col > twoj + 1)
    throw std::invalid_argument("Mode::su2: indices out of range");
  Mode m;
  m.kind = Kind::Su2;
  m.twoj = twoj;
  m.row = row;
  m.col = col;
  return m;
}

Rational Mode::eigenvalue() const {
  if (kind == Kind::TorusFreq) {
    BigInt s(0);
    for (const auto& x : freq) s += x * x;
    return Rational(s);
  }
  // j(j+1) = twoj(twoj+2)/4
  Rational r(BigInt(twoj) * BigInt(twoj + 2), BigInt(4));
  r.canonicalize();
  return r;
}

bool Mode::operator<(const Mode& o) const {
  if (kind != o.kind) return kind < o.kind;
  if (kind == Kind::TorusFreq) {
    if (freq.size() != o.freq.size()) return freq.size() < o.freq.size();
    for (size_t i = 0; i < freq.size(); ++i) {
      int c = cmp(freq[i], o.freq[i]);
      if (c != 0) return c < 0;
    }
    return false;
  }
  if (twoj != o.twoj) return twoj < o.twoj;
  if (row != o.row) return row < o.row;
  return col < o.col;
}

bool Mode::operator==(const Mode& o) const { return !(*this < o) && !(o < *this); }

std::string Mode::str() const {
  std::ostringstream os;
  if (kind == Kind::TorusFreq) {
    os << "(";
    for (size_t i = 0; i < freq.size(); ++i) {
      if (i) os << ",";
      os << freq[i].get_str();
    }
    os << ")";
  } else {
    os << "(2j=" << twoj << ",r=" << row << ",c=" << col << ")";
  }
  return os.str();
}

namespace {

void torus_modes_rec(int m, long bound, const Rational& lambda_max, std::vector<long>& cur,
                     std::map<Rational, std::vector<Mode>>& buckets) {
  if (static_cast<int>(cur.size()) == m) {
    BigInt s(0);
    for (long x : cur) s += BigInt(x) * BigInt(x);
    Rational lam{s};
    if (lam <= lambda_max) buckets[lam].push_back(Mode::torus_freq_i(cur));
    return;
  }
  for (long x = -bound; x <= bound; ++x) {
    cur.push_back(x);
    torus_modes_rec(m, bound, lambda_max, cur, buckets);
    cur.pop_back();
  }
}

}  // namespace

std::vector<Shell> enumerate_shells(const GroupSpec& g, const Rational& lambda_max) {
  if (sgn(lambda_max) < 0) throw std::invalid_argument("enumerate_shells: lambda_max < 0");
  std::vector<Shell> shells;
  if (g.is_torus()) {
    // |xi|_inf <= floor(sqrt(lambda_max))
    BigInt num_floor = lambda_max.get_num() / lambda_max.get_den();
    BigInt root;
    mpz_sqrt(root.get_mpz_t(), num_floor.get_mpz_t());
    long bound = root.get_si();
    std::map<Rational, std::vector<Mode>> buckets;
    std::vector<long> cur;
    torus_modes_rec(g.dim, bound, lambda_max, cur, buckets);
    shells.reserve(buckets.size());
    for (auto& [lam, modes] : buckets) {
      std::sort(modes.begin(), modes.end());
      shells.push_back(Shell{lam, std::move(modes)});
    }
  } else {
    for (int twoj = 0;; ++twoj) {
      Rational lam(BigInt(twoj) * BigInt(twoj + 2), BigInt(4));
      lam.canonicalize();
      if (lam > lambda_max) break;
      Shell s;
      s.lambda = lam;
      int d = twoj + 1;
      s.modes.reserve(static_cast<size_t>(d) * d);
      for (int r = 1; r <= d; ++r)
        for (int c = 1; c <= d; ++c) s.modes.push_back(Mode::su2(twoj, r, c));
      shells.push_back(std::move(s));
    }
  }
  return shells;
}

Eigen::MatrixXcd su2_generator_block(int twoj, const Eigen::Vector3d& coords) {
  const int d = twoj + 1;
  const double j = twoj / 2.0;
  using Cx = std::complex<double>;
  Eigen::MatrixXcd jp = Eigen::MatrixXcd::Zero(d, d);  // J+
  for (int k = 0; k < d - 1; ++k) {
    double mval = -j + k;  // J+ |m> = sqrt((j-m)(j+m+1)) |m+1>
    jp(k + 1, k) = std::sqrt((j - mval) * (j + mval + 1.0));
  }
  Eigen::MatrixXcd jm = jp.adjoint();  // J-
  Eigen::MatrixXcd j3 = Eigen::MatrixXcd::Zero(d, d);
  for (int k = 0; k < d; ++k) j3(k, k) = Cx(-j + k, 0.0);
  Eigen::MatrixXcd x1 = Cx(0, -0.5) * (jp + jm);  // -i J1
  Eigen::MatrixXcd x2 = 0.5 * (jp - jm);          // +i J2
  Eigen::MatrixXcd x3 = Cx(0, 1) * j3;            // +i J3
  return coords[0] * x1 + coords[1] * x2 + coords[2] * x3;
}

Eigen::MatrixXcd field_action(const GroupSpec& g, const std::vector<double>& coords,
                              const Shell& shell) {
  if (static_cast<int>(coords.size()) != g.dim)
    throw std::invalid_argument("field_action: coordinate/group dimension mismatch");
  const int d = shell.dim();
  if (g.is_torus()) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
    for (int k = 0; k < d; ++k) {
      double dot = 0;
      for (int i = 0; i < g.dim; ++i) dot += coords[i] * shell.modes[k].freq[i].get_d();
      a(k, k) = std::complex<double>(0.0, dot);
    }
    return a;
  }
  const int twoj = shell.modes.empty() ? 0 : shell.modes[0].twoj;
  Eigen::MatrixXcd block =
      su2_generator_block(twoj, Eigen::Vector3d(coords[0], coords[1], coords[2]));
  const int b = twoj + 1;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(d, d);
  // modes ordered (row, col) with col fastest: I (x) block
  for (int r = 0; r < b; ++r) a.block(r * b, r * b, b, b) = block;
  return a;
}

ExactScalar torus_symbol(const std::vector<ExactScalar>& coords, const Mode& mode) {
  if (mode.kind != Mode::Kind::TorusFreq)
    throw std::invalid_argument("torus_symbol: not a torus mode");
  if (coords.size() != mode.freq.size())
    throw std::invalid_argument("torus_symbol: dimension mismatch");
  ExactScalar acc;
  for (size_t i = 0; i < coords.size(); ++i) acc += coords[i].scaled(Rational(mode.freq[i]));
  return acc;
}

double casimir_residual(const GroupSpec& g, const Shell& shell) {
  if (g.is_torus()) return 0.0;  // diagonal multipliers sum to -|xi|^2 exactly
  const int twoj = shell.modes.empty() ? 0 : shell.modes[0].twoj;
  const int b = twoj + 1;
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(b, b);
  for (int axis = 0; axis < 3; ++axis) {
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    c[axis] = 1.0;
    Eigen::MatrixXcd blk = su2_generator_block(twoj, c);
    acc += blk * blk;
  }
  acc += shell.lambda.get_d() * Eigen::MatrixXcd::Identity(b, b);
  // Frobenius norm of the full d x d residual = sqrt(b) * block Frobenius
  return std::sqrt(static_cast<double>(b)) * acc.norm();
}

double field_action_norm(const GroupSpec& g, const std::vector<double>& coords,
                         const Shell& shell) {
  if (g.is_torus()) {
    double best = 0;
    for (const auto& mode : shell.modes) {
      double dot = 0;
      for (int i = 0; i < g.dim; ++i) dot += coords[i] * mode.freq[i].get_d();
      best = std::max(best, std::abs(dot));
    }
    return best;
  }
  const int twoj = shell.modes.empty() ? 0 : shell.modes[0].twoj;
  Eigen::MatrixXcd blk =
      su2_generator_block(twoj, Eigen::Vector3d(coords[0], coords[1], coords[2]));
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(blk);
  return blk.rows() == 0 ? 0.0 : svd.singularValues()(0);
}

std::vector<double> weyl_partial_sums(const GroupSpec& g, const Rational& lambda_max) {
  std::vector<double> sums;
  double acc = 0;
  const double expo = -2.0 * g.dim;
  for (const auto& shell : enumerate_shells(g, lambda_max)) {
    if (sgn(shell.lambda) == 0) continue;
    acc += shell.dim() * std::pow(shell.lambda.get_d(), expo);
    sums.push_back(acc);
  }
  return sums;
}

}  // namespace ghlab::spectral
