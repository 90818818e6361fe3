#include "ghcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "fitting.hpp"

namespace ghlab::ghcheck {

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::ConsistentGH: return "ConsistentGH";
    case Verdict::FailZeroSymbol: return "FailZeroSymbol";
    case Verdict::FailSuperpolynomial: return "FailSuperpolynomial";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

std::string hull_verdict_name(HullVerdict v) {
  switch (v) {
    case HullVerdict::HormanderHullFull: return "HormanderHullFull";
    case HullVerdict::CommutativeHullObstruction: return "CommutativeHullObstruction";
    case HullVerdict::Neither: return "Neither";
  }
  return "?";
}

std::vector<LieElement> system_generators(const SystemSpec& sys) {
  std::vector<LieElement> gens;
  for (const auto& a : sys.fields) {
    fields::RangeBasis rb = fields::range_basis(a);
    for (const auto& L : rb.L) gens.push_back(L);
  }
  return gens;
}

// ---------------------------------------------------------------------------
// Shell minima
// ---------------------------------------------------------------------------

namespace {

// one generator's torus symbol xi -> sum_i c_i xi_i, decomposed for exact zero
// tests (rational part and per-atom coefficient sums must all vanish)
struct SymbolForm {
  std::vector<double> cd;
  std::vector<Rational> rat;  // rational part per coordinate
  struct AtomCol {
    Atom atom;
    std::vector<Rational> coeff;
  };
  std::vector<AtomCol> atoms;
  // int64 fast path (numerators over a common denominator)
  bool fast = false;
  std::vector<long> rat_num;
  std::vector<std::vector<long>> atom_num;
};

SymbolForm make_form(const LieElement& L) {
  const int m = L.group.dim;
  SymbolForm f;
  f.cd.resize(m);
  f.rat.assign(m, Rational(0));
  for (int i = 0; i < m; ++i) {
    f.cd[i] = L.c[i].to_double();
    f.rat[i] = L.c[i].rational_part();
    for (const auto& [atom, coeffs] : L.c[i].parts()) {
      if (coeffs.size() != 1) continue;  // higher powers never appear in symbols
      auto it = std::find_if(f.atoms.begin(), f.atoms.end(),
                             [&](const SymbolForm::AtomCol& ac) { return ac.atom == atom; });
      if (it == f.atoms.end()) {
        f.atoms.push_back({atom, std::vector<Rational>(m, Rational(0))});
        it = std::prev(f.atoms.end());
      }
      it->coeff[i] = coeffs[0];
    }
  }
  // int64 scaling when all numerators stay small
  auto scale_row = [](const std::vector<Rational>& row, std::vector<long>& out) {
    BigInt lcm(1);
    for (const auto& q : row) {
      BigInt l;
      mpz_lcm(l.get_mpz_t(), lcm.get_mpz_t(), q.get_den().get_mpz_t());
      lcm = l;
    }
    if (!lcm.fits_slong_p() || lcm.get_si() > (1L << 20)) return false;
    out.clear();
    for (const auto& q : row) {
      Rational s = q * Rational(lcm);
      if (!s.get_num().fits_slong_p()) return false;
      long v = s.get_num().get_si();
      if (std::llabs(v) > (1LL << 40)) return false;
      out.push_back(v);
    }
    return true;
  };
  f.fast = scale_row(f.rat, f.rat_num);
  if (f.fast)
    for (const auto& ac : f.atoms) {
      std::vector<long> nums;
      if (!scale_row(ac.coeff, nums)) {
        f.fast = false;
        break;
      }
      f.atom_num.push_back(std::move(nums));
    }
  return f;
}

bool symbol_exact_zero(const SymbolForm& f, const long* xi, int m) {
  if (f.fast) {
    long long acc = 0;
    for (int i = 0; i < m; ++i) acc += static_cast<long long>(f.rat_num[i]) * xi[i];
    if (acc != 0) return false;
    for (const auto& nums : f.atom_num) {
      long long a = 0;
      for (int i = 0; i < m; ++i) a += static_cast<long long>(nums[i]) * xi[i];
      if (a != 0) return false;
    }
    return true;
  }
  Rational acc(0);
  for (int i = 0; i < m; ++i)
    if (sgn(f.rat[i]) != 0) acc += f.rat[i] * Rational(xi[i]);
  if (sgn(acc) != 0) return false;
  for (const auto& ac : f.atoms) {
    Rational a(0);
    for (int i = 0; i < m; ++i)
      if (sgn(ac.coeff[i]) != 0) a += ac.coeff[i] * Rational(xi[i]);
    if (sgn(a) != 0) return false;
  }
  return true;
}

// exact s^2 at a mode, as an ExactScalar (used for witnesses and bounds)
ExactScalar symbol_s2_exact(const std::vector<LieElement>& gens, const Mode& mode) {
  ExactScalar acc;
  for (const auto& L : gens) {
    ExactScalar z = spectral::torus_symbol(L.c, mode);
    acc += z * z;
  }
  return acc;
}

struct TorusAcc {
  bool seen = false;
  double best = 0;
  std::array<long, 4> best_xi{};
  bool zero = false;
  std::array<long, 4> zero_xi{};
};

}  // namespace

std::vector<ShellMinimum> shell_minima_generators(const std::vector<LieElement>& gens,
                                                  const GroupSpec& g,
                                                  const Rational& lambda_max) {
  if (gens.empty()) throw std::invalid_argument("shell_minima: no generators");
  std::vector<ShellMinimum> out;
  if (g.is_torus()) {
    const int m = g.dim;
    if (m > 4) throw std::invalid_argument("shell_minima: torus dimension > 4 unsupported");
    BigInt lam_floor = lambda_max.get_num() / lambda_max.get_den();
    if (!lam_floor.fits_slong_p() || lam_floor.get_si() > 8'000'000)
      throw std::invalid_argument("shell_minima: lambda_max too large for the dense scan");
    const long lam_max = lam_floor.get_si();
    long bound = static_cast<long>(std::sqrt(static_cast<double>(lam_max))) + 1;
    while (bound * bound > lam_max) --bound;

    std::vector<SymbolForm> forms;
    forms.reserve(gens.size());
    for (const auto& L : gens) {
      if (!(L.group == g)) throw std::invalid_argument("shell_minima: generator group mismatch");
      forms.push_back(make_form(L));
    }

    std::vector<TorusAcc> acc(static_cast<size_t>(lam_max) + 1);
    std::array<long, 4> xi{};
    // lexicographic scan over the box, filtered to |xi|^2 <= lam_max
    std::function<void(int, long)> rec = [&](int pos, long partial) {
      if (pos == m) {
        if (partial == 0) return;
        TorusAcc& a = acc[static_cast<size_t>(partial)];
        double s2 = 0;
        bool all_zero = true;
        for (const auto& f : forms) {
          double z = 0;
          for (int i = 0; i < m; ++i) z += f.cd[i] * xi[i];
          s2 += z * z;
          if (all_zero && !symbol_exact_zero(f, xi.data(), m)) all_zero = false;
        }
        if (all_zero) {
          s2 = 0;
          if (!a.zero) {
            a.zero = true;
            a.zero_xi = xi;
          }
        }
        if (!a.seen || s2 < a.best) {
          a.seen = true;
          a.best = s2;
          a.best_xi = xi;
        }
        return;
      }
      long rem = lam_max - partial;
      long b = static_cast<long>(std::sqrt(static_cast<double>(rem))) + 1;
      while (b * b > rem) --b;
      for (long x = -b; x <= b; ++x) {
        xi[pos] = x;
        rec(pos + 1, partial + x * x);
      }
      xi[pos] = 0;
    };
    rec(0, 0);

    for (long lam = 1; lam <= lam_max; ++lam) {
      const TorusAcc& a = acc[static_cast<size_t>(lam)];
      if (!a.seen) continue;
      ShellMinimum sm;
      sm.lambda = Rational(lam);
      std::vector<BigInt> freq;
      const auto& src = a.zero ? a.zero_xi : a.best_xi;
      for (int i = 0; i < m; ++i) freq.emplace_back(src[i]);
      sm.argmin = Mode::torus_freq(std::move(freq));
      if (a.zero) {
        sm.is_zero = true;
        sm.sigma = 0;
        sm.log2_sigma = -std::numeric_limits<double>::infinity();
        sm.sigma_sq_lo = Rational(0);
        sm.sigma_sq_hi = Rational(0);
      } else {
        sm.sigma = std::sqrt(a.best);
        sm.log2_sigma = 0.5 * std::log2(a.best);
        // exact enclosure at the argmin
        ExactScalar s2 = symbol_s2_exact(gens, sm.argmin);
        if (s2.is_rational()) {
          sm.sigma_sq_lo = s2.rational_part();
          sm.sigma_sq_hi = s2.rational_part();
          if (sgn(s2.rational_part()) > 0) sm.log2_sigma = 0.5 * log2_rational(s2.rational_part());
        } else {
          Interval iv = s2.enclose(4);
          sm.sigma_sq_lo = std::max(Rational(0), iv.lo);
          sm.sigma_sq_hi = iv.hi;
        }
      }
      out.push_back(std::move(sm));
    }
    return out;
  }

  // SU(2): sigma_min over the shell = sqrt(lambda_min(sum_g B_g^* B_g)) on the
  // (2j+1)-dimensional column block (the stack is I (x) B_g)
  auto shells = spectral::enumerate_shells(g, lambda_max);
  for (const auto& shell : shells) {
    if (sgn(shell.lambda) == 0) continue;
    const int twoj = shell.modes[0].twoj;
    const int d = twoj + 1;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
    for (const auto& L : gens) {
      auto cd = L.coords_d();
      Eigen::MatrixXcd b =
          spectral::su2_generator_block(twoj, Eigen::Vector3d(cd[0], cd[1], cd[2]));
      h += b.adjoint() * b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    double lam_min = std::max(0.0, es.eigenvalues()(0));
    ShellMinimum sm;
    sm.lambda = shell.lambda;
    sm.sigma = std::sqrt(lam_min);
    sm.is_zero = sm.sigma <= 1e-10;  // documented floating zero tolerance
    sm.log2_sigma = sm.is_zero ? -std::numeric_limits<double>::infinity() : std::log2(sm.sigma);
    Eigen::VectorXcd v = es.eigenvectors().col(0);
    int cstar = 0;
    for (int c = 1; c < d; ++c)
      if (std::abs(v(c)) > std::abs(v(cstar)) + 1e-12) cstar = c;
    sm.argmin = Mode::su2(twoj, 1, cstar + 1);
    sm.argmin_vec.assign(v.data(), v.data() + d);
    out.push_back(std::move(sm));
  }
  return out;
}

std::vector<ShellMinimum> shell_minima(const SystemSpec& sys, const GroupSpec& g,
                                       const Rational& lambda_max) {
  return shell_minima_generators(system_generators(sys), g, lambda_max);
}

double shell_minimum_dense(const std::vector<LieElement>& gens, const GroupSpec& g,
                           const Shell& shell) {
  const int d = shell.dim();
  Eigen::MatrixXcd stack(static_cast<long>(gens.size()) * d, d);
  for (size_t k = 0; k < gens.size(); ++k)
    stack.block(static_cast<long>(k) * d, 0, d, d) =
        spectral::field_action(g, gens[k].coords_d(), shell);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(stack);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

// ---------------------------------------------------------------------------
// Exponent fit and verdict
// ---------------------------------------------------------------------------

namespace {

double log2_1p(const Rational& lam) { return log2_rational(1 + lam); }

}  // namespace

FitResult fit_exponent(const std::vector<ShellMinimum>& minima, const Rational& lambda0) {
  FitResult out;
  std::vector<std::pair<double, double>> records, all;
  double run = std::numeric_limits<double>::infinity();
  for (const auto& sm : minima) {
    if (sm.lambda < lambda0 || sm.is_zero) continue;
    double x = log2_1p(sm.lambda), y = sm.log2_sigma;
    all.emplace_back(x, y);
    if (y < run) {
      run = y;
      records.emplace_back(x, y);
    }
  }
  if (all.size() < 3) return out;  // insufficient positive data
  bool use_records = records.size() >= 3;
  LogFit fit = log_fit(use_records ? records : all);
  if (!fit.ok) return out;
  out.ok = true;
  out.used_records = use_records;
  out.points = use_records ? static_cast<int>(records.size()) : static_cast<int>(all.size());
  out.slope = fit.slope;
  out.rho = -fit.slope;
  out.C = std::exp2(fit.intercept);
  out.r2 = fit.r2;
  return out;
}

GhReport gh_verdict(const std::vector<ShellMinimum>& minima, const Rational& lambda_max,
                    const GhThresholds& th, const std::vector<ShellMinimum>& extra_witnesses) {
  GhReport rep;
  rep.minima = minima;
  rep.lambda_max = lambda_max;
  if (th.lambda0) {
    rep.lambda0 = *th.lambda0;
  } else {
    rep.lambda0 = Rational(0);
    for (const auto& sm : minima)
      if (sgn(sm.lambda) > 0) {
        rep.lambda0 = sm.lambda;
        break;
      }
  }

  // exact zeros recurring into the top of the tested range
  std::vector<const ShellMinimum*> zeros;
  for (const auto& sm : minima)
    if (sm.is_zero && sm.lambda >= rep.lambda0) zeros.push_back(&sm);
  if (static_cast<int>(zeros.size()) >= th.zero_min_count) {
    Rational top = zeros.back()->lambda;
    Rational cut;
    {
      Rational frac;
      mpq_set_d(frac.get_mpq_t(), th.zero_top_fraction);
      cut = lambda_max * frac;
    }
    if (top >= cut) {
      rep.verdict = Verdict::FailZeroSymbol;
      for (size_t i = 0; i < zeros.size() && i < 32; ++i) rep.witnesses.push_back(*zeros[i]);
      rep.note = "sigma_min vanishes on " + std::to_string(zeros.size()) +
                 " shells up to lambda = " + top.get_str();
      rep.fit = fit_exponent(minima, rep.lambda0);
      return rep;
    }
  }

  // superpolynomial decay along a witness subsequence (scan records + injected
  // convergent witnesses beyond the scan radius)
  {
    std::vector<const ShellMinimum*> cand;
    double run = std::numeric_limits<double>::infinity();
    for (const auto& sm : minima) {
      if (sm.is_zero || sm.lambda < rep.lambda0) continue;
      if (sm.log2_sigma < run) {
        run = sm.log2_sigma;
        cand.push_back(&sm);
      }
    }
    for (const auto& sm : extra_witnesses) {
      if (sm.lambda <= lambda_max) continue;  // scan already covers it
      if (sm.log2_sigma < run) {
        run = sm.log2_sigma;
        cand.push_back(&sm);
      }
    }
    if (static_cast<int>(cand.size()) >= th.super_min_witnesses) {
      std::vector<std::pair<double, double>> pts;
      for (const auto* sm : cand) pts.emplace_back(log2_1p(sm->lambda), sm->log2_sigma);
      LogFit fit = log_fit(pts);
      if (fit.ok && fit.slope <= -th.super_s) {
        rep.verdict = Verdict::FailSuperpolynomial;
        rep.witness_slope = fit.slope;
        for (const auto* sm : cand) rep.witnesses.push_back(*sm);
        rep.note = "witness subsequence decays with log-log slope " +
                   std::to_string(fit.slope) + " <= -" + std::to_string(th.super_s);
        rep.fit = fit_exponent(minima, rep.lambda0);
        return rep;
      }
    }
  }

  rep.fit = fit_exponent(minima, rep.lambda0);
  if (!rep.fit.ok) {
    rep.verdict = Verdict::Inconclusive;
    rep.note = "fewer than 3 positive shell minima above lambda0";
    return rep;
  }
  if (rep.fit.slope >= 0) {
    // non-decaying minima: any rho > 0 certifies; pin a small one
    rep.certified_rho = 0.01;
  } else {
    if (rep.fit.r2 < th.fit_quality_min) {
      rep.verdict = Verdict::Inconclusive;
      rep.note = "power-law fit quality below threshold";
      return rep;
    }
    rep.certified_rho = rep.fit.rho;
  }
  // certify C on the tested data: C = min sigma (1+lambda)^rho over the range
  double logc = std::numeric_limits<double>::infinity();
  for (const auto& sm : minima) {
    if (sm.is_zero || sm.lambda < rep.lambda0) continue;
    logc = std::min(logc, sm.log2_sigma + rep.certified_rho * log2_1p(sm.lambda));
  }
  rep.certified_C = std::exp2(logc);
  rep.verdict = Verdict::ConsistentGH;
  return rep;
}

// ---------------------------------------------------------------------------
// Convergent witnesses for 2-d single-line systems
// ---------------------------------------------------------------------------

std::vector<ShellMinimum> convergent_witnesses_for(const SystemSpec& sys, int count) {
  std::vector<ShellMinimum> out;
  if (sys.fields.size() != 1) return out;
  const auto& a = sys.fields.front();
  if (!a.group.is_torus() || a.group.dim != 2) return out;
  fields::RangeBasis rb = fields::range_basis(a);
  if (rb.rank() != 1 || rb.rest_idx.size() != 1) return out;
  auto v = dio::realspec_from_exact(rb.lambda[0][0]);
  if (!v || v->kind == dio::RealSpec::Kind::Rational) return out;
  auto sws = dio::slope_witnesses(*v, count);
  for (const auto& sw : sws) {
    ShellMinimum sm;
    sm.lambda = sw.lambda;
    std::vector<BigInt> freq(2);
    freq[static_cast<size_t>(rb.basis_idx[0])] = sw.p;
    freq[static_cast<size_t>(rb.rest_idx[0])] = -sw.q;
    sm.argmin = Mode::torus_freq(std::move(freq));
    sm.sigma_sq_lo = sw.z_sq_lo;
    sm.sigma_sq_hi = sw.z_sq_hi;
    Rational mid = (sw.z_sq_lo + sw.z_sq_hi) / 2;
    sm.log2_sigma = sgn(mid) > 0 ? 0.5 * log2_rational(mid) : -1e300;
    sm.sigma = std::exp2(sm.log2_sigma);
    sm.is_zero = false;
    sm.source = "convergent";
    out.push_back(std::move(sm));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Singular solutions
// ---------------------------------------------------------------------------

SingularSolution build_singular_solution(const GroupSpec& g, int torus_dim,
                                         const std::vector<ShellMinimum>& witnesses) {
  if (witnesses.empty())
    throw std::invalid_argument("build_singular_solution: empty witness sequence");
  for (size_t i = 1; i < witnesses.size(); ++i)
    if (!(witnesses[i - 1].lambda < witnesses[i].lambda))
      throw std::invalid_argument(
          "build_singular_solution: witness eigenvalues must increase strictly");
  SingularSolution sol;
  sol.exact = g.is_torus();
  sol.u_exact = op::FourierExact(torus_dim, g);
  sol.u_float = op::FourierFloat(torus_dim, g);
  fields::FreqVec tau0(torus_dim, 0);
  for (const auto& w : witnesses) {
    sol.lambdas.push_back(w.lambda);
    if (g.is_torus()) {
      sol.u_exact.add(tau0, w.argmin, CES(ExactScalar(Rational(1))));
    } else if (!w.argmin_vec.empty()) {
      double n = 0;
      for (const auto& c : w.argmin_vec) n += std::norm(c);
      n = std::sqrt(n);
      const int twoj = w.argmin.twoj;
      for (int c = 0; c < static_cast<int>(w.argmin_vec.size()); ++c)
        if (std::abs(w.argmin_vec[c]) > 0)
          sol.u_float.add(tau0, Mode::su2(twoj, 1, c + 1), w.argmin_vec[c] / n);
    } else {
      sol.u_float.add(tau0, w.argmin, std::complex<double>(1, 0));
    }
  }
  return sol;
}

CounterexampleCheck check_singular_solution(const SingularSolution& sol,
                                            const std::vector<LieElement>& gens,
                                            const std::vector<ShellMinimum>& witnesses,
                                            double smooth_s) {
  CounterexampleCheck out;
  // unit norms per witness shell
  out.unit_norms = true;
  for (const auto& w : witnesses) {
    if (sol.exact) {
      ExactScalar n2 = op::norm_sq(op::partial_projection_G(sol.u_exact, w.lambda));
      if (!(n2 - ExactScalar(Rational(1))).is_zero()) out.unit_norms = false;
    } else {
      double n2 = op::norm_sq(op::partial_projection_G(sol.u_float, w.lambda));
      if (std::abs(n2 - 1.0) > 1e-9) out.unit_norms = false;
    }
  }
  // images under the generators
  out.image_bounded = true;
  if (sol.exact) {
    out.u_report = op::classify_smoothness(sol.u_exact, smooth_s);
    for (const auto& L : gens) {
      op::FourierExact lu(sol.u_exact.torus_dim, sol.u_exact.group);
      for (const auto& [key, v] : sol.u_exact.coef) {
        ExactScalar z = spectral::torus_symbol(L.c, key.second);
        lu.add(key.first, key.second, v * CES::i_times(z));
      }
      // per-witness norm bound against the recorded sigma
      for (const auto& w : witnesses) {
        if (!w.sigma_sq_hi) continue;
        ExactScalar n2 = op::norm_sq(op::partial_projection_G(lu, w.lambda));
        bool ok = false;
        for (int level = 0; level <= 12 && !ok; ++level) {
          Interval iv = n2.enclose(level);
          // the recorded sigma is for the whole stack; a single generator
          // contributes at most that much
          Rational cap = *w.sigma_sq_hi * static_cast<long>(std::max<size_t>(1, gens.size()));
          if (iv.hi <= cap) ok = true;
          if (iv.lo > cap) break;
        }
        if (!ok) out.image_bounded = false;
      }
      out.image_reports.push_back(op::classify_smoothness(lu, smooth_s));
    }
  } else {
    out.u_report = op::classify_smoothness(sol.u_float, smooth_s);
    for (const auto& L : gens) {
      op::FourierFloat lu(sol.u_float.torus_dim, sol.u_float.group);
      auto cd = L.coords_d();
      for (const auto& [key, v] : sol.u_float.coef) {
        const int twoj = key.second.twoj;
        Eigen::MatrixXcd b =
            spectral::su2_generator_block(twoj, Eigen::Vector3d(cd[0], cd[1], cd[2]));
        for (int k = 0; k < twoj + 1; ++k) {
          std::complex<double> f = b(k, key.second.col - 1);
          if (f != std::complex<double>(0, 0))
            lu.add(key.first, Mode::su2(twoj, key.second.row, k + 1), f * v);
        }
      }
      for (const auto& w : witnesses) {
        double n2 = op::norm_sq(op::partial_projection_G(lu, w.lambda));
        double cap = w.sigma * w.sigma * static_cast<double>(gens.size()) + 1e-9;
        if (n2 > cap) out.image_bounded = false;
      }
      out.image_reports.push_back(op::classify_smoothness(lu, smooth_s));
    }
  }
  bool images_smooth = true;
  for (const auto& r : out.image_reports)
    images_smooth &= r.verdict == op::SmoothnessReport::Verdict::ConsistentSmooth;
  out.closed = out.unit_norms && out.image_bounded && images_smooth &&
               out.u_report.verdict != op::SmoothnessReport::Verdict::ConsistentSmooth;
  return out;
}

// ---------------------------------------------------------------------------
// Hull checks
// ---------------------------------------------------------------------------

HullCheck hull_checks(const SystemSpec& sys, const GroupSpec& g) {
  std::vector<LieElement> gens = system_generators(sys);
  // sampled range vectors on a coarse grid (same span, keeps faith with the
  // definition of the system as a union of ranges)
  const int grid = 8;
  for (const auto& a : sys.fields) {
    std::vector<double> t(a.torus_dim, 0.0);
    for (int i = 0; i < grid; ++i) {
      for (int k = 0; k < a.torus_dim; ++k)
        t[k] = 2.0 * M_PI * ((i + k) % grid) / grid;
      LieElement v = a.value_at(t);
      if (v.norm() > 1e-9) gens.push_back(v);
    }
  }
  HullCheck out;
  auto hull = fields::lie_hull(gens);
  out.hull_dim = static_cast<int>(hull.size());
  out.hull_commutative = true;
  for (size_t i = 0; i < hull.size() && out.hull_commutative; ++i)
    for (size_t j = i + 1; j < hull.size() && out.hull_commutative; ++j)
      if (fields::bracket(hull[i], hull[j]).norm() > 1e-9) out.hull_commutative = false;
  if (out.hull_dim == g.dim) {
    out.verdict = HullVerdict::HormanderHullFull;
  } else if (!g.is_torus() && out.hull_commutative) {
    out.verdict = HullVerdict::CommutativeHullObstruction;
  } else {
    out.verdict = HullVerdict::Neither;
  }
  return out;
}

}  // namespace ghlab::ghcheck
