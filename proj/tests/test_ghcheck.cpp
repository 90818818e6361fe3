#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "ghcheck.hpp"

using namespace ghlab;
using namespace ghlab::ghcheck;
using fields::CoefficientMap;
using fields::LieElement;
using fields::SystemSpec;
using fields::TrigPoly;
using spectral::GroupSpec;

namespace {

CoefficientMap constant_map(GroupSpec g, const std::vector<ExactScalar>& coords) {
  CoefficientMap a(g, 1);
  for (int j = 0; j < g.dim; ++j)
    if (!coords[static_cast<size_t>(j)].is_zero())
      a.comp[static_cast<size_t>(j)] = TrigPoly::constant(1, coords[static_cast<size_t>(j)]);
  return a;
}

SystemSpec single_constant_system(GroupSpec g, const std::vector<ExactScalar>& coords) {
  SystemSpec sys;
  sys.fields.push_back(constant_map(g, coords));
  return sys;
}

ExactScalar golden() { return ExactScalar::surd(Rational(1, 2), Rational(1, 2), BigInt(5)); }

}  // namespace

TEST_CASE("dx1 on T^2: zero symbol on the xi_1 = 0 line") {
  GroupSpec t2 = GroupSpec::torus(2);
  auto sys = single_constant_system(t2, {ExactScalar(Rational(1)), ExactScalar(0)});
  auto minima = shell_minima(sys, t2, Rational(100));
  for (const auto& sm : minima) {
    // every square lambda = k^2 contains (0, +-k), an exact zero
    BigInt lam_int = sm.lambda.get_num();
    if (mpz_perfect_square_p(lam_int.get_mpz_t())) {
      CHECK(sm.is_zero);
      CHECK(sm.argmin.freq[0] == 0);
    }
  }
  auto rep = gh_verdict(minima, Rational(100), GhThresholds{});
  CHECK(rep.verdict == Verdict::FailZeroSymbol);
  CHECK(!rep.witnesses.empty());
}

TEST_CASE("closed-form scan matches the dense SVD oracle") {
  GroupSpec t2 = GroupSpec::torus(2);
  std::vector<LieElement> gens = {
      LieElement(t2, {ExactScalar(Rational(1)), ExactScalar(Rational(1, 3))}),
      LieElement(t2, {ExactScalar(Rational(-1, 2)), ExactScalar(Rational(1))})};
  auto minima = shell_minima_generators(gens, t2, Rational(40));
  auto shells = spectral::enumerate_shells(t2, Rational(40));
  size_t mi = 0;
  for (const auto& shell : shells) {
    if (sgn(shell.lambda) == 0) continue;
    REQUIRE(mi < minima.size());
    REQUIRE(minima[mi].lambda == shell.lambda);
    double dense = shell_minimum_dense(gens, t2, shell);
    CHECK(minima[mi].sigma == doctest::Approx(dense).epsilon(1e-9));
    ++mi;
  }
}

TEST_CASE("su2 {X1, X2}: sigma_min = sqrt(j) on every shell") {
  GroupSpec g = GroupSpec::su2();
  std::vector<LieElement> gens = {LieElement::basis(g, 0), LieElement::basis(g, 1)};
  auto minima = shell_minima_generators(gens, g, Rational(420));  // spins up to 20
  REQUIRE(minima.size() == 40);
  for (const auto& sm : minima) {
    CHECK_FALSE(sm.is_zero);
    // lambda = j(j+1): j = (-1 + sqrt(1+4 lambda))/2
    double lam = sm.lambda.get_d();
    double j = 0.5 * (-1 + std::sqrt(1 + 4 * lam));
    CHECK(sm.sigma == doctest::Approx(std::sqrt(j)).epsilon(1e-9));
  }
  // dense SVD oracle on small spins
  auto shells = spectral::enumerate_shells(g, Rational(4));
  for (const auto& shell : shells) {
    if (sgn(shell.lambda) == 0) continue;
    double dense = shell_minimum_dense(gens, g, shell);
    double j = 0.5 * (-1 + std::sqrt(1 + 4 * shell.lambda.get_d()));
    CHECK(dense == doctest::Approx(std::sqrt(j)).epsilon(1e-9));
  }
  auto rep = gh_verdict(minima, Rational(420), GhThresholds{});
  CHECK(rep.verdict == Verdict::ConsistentGH);
  CHECK(rep.certified_C > 0);
  CHECK(rep.certified_rho > 0);
}

TEST_CASE("su2 {X3}: zeros recur at integer spins") {
  GroupSpec g = GroupSpec::su2();
  std::vector<LieElement> gens = {LieElement::basis(g, 2)};
  auto minima = shell_minima_generators(gens, g, Rational(420));
  int zero_count = 0;
  for (const auto& sm : minima) {
    long twoj = sm.argmin.twoj;
    if (twoj % 2 == 0) {
      CHECK(sm.is_zero);  // integer spin has the m = 0 column
      ++zero_count;
    } else {
      CHECK(sm.sigma == doctest::Approx(0.5).epsilon(1e-9));
    }
  }
  CHECK(zero_count == 20);
  auto rep = gh_verdict(minima, Rational(420), GhThresholds{});
  CHECK(rep.verdict == Verdict::FailZeroSymbol);
}

TEST_CASE("appending a generator never decreases sigma_min") {
  GroupSpec t2 = GroupSpec::torus(2);
  std::vector<LieElement> one = {
      LieElement(t2, {ExactScalar(Rational(1)), ExactScalar(Rational(1, 4))})};
  std::vector<LieElement> two = one;
  two.push_back(LieElement(t2, {ExactScalar(Rational(0)), ExactScalar(Rational(1))}));
  auto m1 = shell_minima_generators(one, t2, Rational(60));
  auto m2 = shell_minima_generators(two, t2, Rational(60));
  REQUIRE(m1.size() == m2.size());
  for (size_t i = 0; i < m1.size(); ++i) CHECK(m2[i].sigma >= m1[i].sigma - 1e-12);
}

TEST_CASE("verdicts are invariant under change of generator basis") {
  GroupSpec t2 = GroupSpec::torus(2);
  std::vector<LieElement> basis_a = {
      LieElement(t2, {ExactScalar(Rational(1)), ExactScalar(Rational(1, 3))}),
      LieElement(t2, {ExactScalar(Rational(1, 2)), ExactScalar(Rational(1))})};
  // second basis of the same span: sums and differences
  std::vector<LieElement> basis_b = {
      LieElement(t2, {ExactScalar(Rational(3, 2)), ExactScalar(Rational(4, 3))}),
      LieElement(t2, {ExactScalar(Rational(1, 2)), ExactScalar(Rational(-2, 3))})};
  auto ra = gh_verdict(shell_minima_generators(basis_a, t2, Rational(200)), Rational(200),
                       GhThresholds{});
  auto rb = gh_verdict(shell_minima_generators(basis_b, t2, Rational(200)), Rational(200),
                       GhThresholds{});
  CHECK(ra.verdict == rb.verdict);
}

TEST_CASE("sigma_min never exceeds the norm bound for the stack") {
  GroupSpec t2 = GroupSpec::torus(2);
  std::vector<LieElement> gens = {
      LieElement(t2, {ExactScalar(Rational(2)), ExactScalar(Rational(-1, 2))}),
      LieElement(t2, {ExactScalar(Rational(1, 3)), ExactScalar(Rational(1))})};
  double stack_norm_sq = 0;
  for (const auto& g : gens) stack_norm_sq += g.norm() * g.norm();
  for (const auto& sm : shell_minima_generators(gens, t2, Rational(80)))
    CHECK(sm.sigma <= std::sqrt(stack_norm_sq * sm.lambda.get_d()) + 1e-9);
}

TEST_CASE("exponent fit recovers an exact power law") {
  std::vector<ShellMinimum> minima;
  for (long lam = 1; lam <= 60; ++lam) {
    ShellMinimum sm;
    sm.lambda = Rational(lam);
    sm.sigma = std::pow(1.0 + lam, -0.5);
    sm.log2_sigma = -0.5 * std::log2(1.0 + lam);
    minima.push_back(sm);
  }
  FitResult fit = fit_exponent(minima, Rational(1));
  REQUIRE(fit.ok);
  CHECK(fit.rho == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-9));
  // a zero gets excluded but does not spoil the fit
  ShellMinimum z;
  z.lambda = Rational(30);
  z.is_zero = true;
  z.log2_sigma = -std::numeric_limits<double>::infinity();
  minima.insert(minima.begin() + 29, z);
  FitResult fit2 = fit_exponent(minima, Rational(1));
  REQUIRE(fit2.ok);
  CHECK(fit2.rho == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("golden-ratio field: ConsistentGH with rho near 1/2") {
  GroupSpec t2 = GroupSpec::torus(2);
  auto sys = single_constant_system(t2, {ExactScalar(Rational(1)), golden()});
  auto minima = shell_minima(sys, t2, Rational(10000));
  auto extra = convergent_witnesses_for(sys, 4);
  auto rep = gh_verdict(minima, Rational(10000), GhThresholds{}, extra);
  CHECK(rep.verdict == Verdict::ConsistentGH);
  CHECK(rep.fit.used_records);
  CHECK(rep.fit.rho > 0.35);
  CHECK(rep.fit.rho < 0.65);
  // record envelope: sigma * sqrt(lambda) bounded on record shells (CF theory)
  double run = std::numeric_limits<double>::infinity();
  for (const auto& sm : minima) {
    if (sm.is_zero) continue;
    if (sm.sigma < run) {
      run = sm.sigma;
      double v = sm.sigma * std::sqrt(sm.lambda.get_d());
      CHECK(v > 0.3);
      CHECK(v < 2.7);
    }
  }
}

TEST_CASE("liouville field: FailSuperpolynomial via convergent witnesses") {
  GroupSpec t2 = GroupSpec::torus(2);
  ExactScalar alpha = ExactScalar::atom_value(Atom::liouville(10, 7));
  auto sys = single_constant_system(t2, {ExactScalar(Rational(1)), alpha});
  auto minima = shell_minima(sys, t2, Rational(20000));
  auto extra = convergent_witnesses_for(sys, 4);
  REQUIRE(static_cast<int>(extra.size()) >= 3);
  for (const auto& w : extra) CHECK(w.source == "convergent");
  GhThresholds th;
  th.super_s = 2.0;  // factorial convergent spacing: pairwise slopes start at 1.25
  auto rep = gh_verdict(minima, Rational(20000), th, extra);
  CHECK(rep.verdict == Verdict::FailSuperpolynomial);
  CHECK(rep.witness_slope <= -2.0);
  int convergent_wits = 0;
  for (const auto& w : rep.witnesses)
    if (w.source == "convergent") ++convergent_wits;
  CHECK(convergent_wits >= 3);
}

TEST_CASE("main-theorem rational pair is ConsistentGH") {
  GroupSpec t2 = GroupSpec::torus(2);
  SystemSpec sys;
  sys.fields.push_back(constant_map(t2, {ExactScalar(Rational(1)), ExactScalar(Rational(2, 3))}));
  sys.fields.push_back(constant_map(t2, {ExactScalar(Rational(1, 5)), ExactScalar(Rational(1))}));
  auto minima = shell_minima(sys, t2, Rational(2000));
  auto rep = gh_verdict(minima, Rational(2000), GhThresholds{});
  CHECK(rep.verdict == Verdict::ConsistentGH);
  for (const auto& sm : minima) CHECK_FALSE(sm.is_zero);
}

TEST_CASE("hull checks") {
  GroupSpec su2 = GroupSpec::su2();
  // a1(t) X1, a2(t) X2 with nonvanishing coefficients: full hull
  SystemSpec lines;
  {
    CoefficientMap a1(su2, 1), a2(su2, 1);
    a1.comp[0] = TrigPoly::constant(1, ExactScalar(Rational(1))) +
                 TrigPoly::cosine(1, 0, Rational(1, 2));
    a2.comp[1] = TrigPoly::constant(1, ExactScalar(Rational(1))) +
                 TrigPoly::sine(1, 0, Rational(1, 2));
    lines.fields.push_back(std::move(a1));
    lines.fields.push_back(std::move(a2));
  }
  auto h1 = hull_checks(lines, su2);
  CHECK(h1.verdict == HullVerdict::HormanderHullFull);
  CHECK(h1.hull_dim == 3);

  auto obstructed = single_constant_system(su2, {ExactScalar(0), ExactScalar(0), ExactScalar(Rational(1))});
  auto h2 = hull_checks(obstructed, su2);
  CHECK(h2.verdict == HullVerdict::CommutativeHullObstruction);
  CHECK(h2.hull_dim == 1);

  GroupSpec t2 = GroupSpec::torus(2);
  auto partial = single_constant_system(t2, {ExactScalar(Rational(1)), ExactScalar(0)});
  CHECK(hull_checks(partial, t2).verdict == HullVerdict::Neither);
}

TEST_CASE("singular solution for dx1 on T^2 is annihilated and not smooth") {
  GroupSpec t2 = GroupSpec::torus(2);
  auto sys = single_constant_system(t2, {ExactScalar(Rational(1)), ExactScalar(0)});
  auto minima = shell_minima(sys, t2, Rational(450));
  GhThresholds th;
  auto rep = gh_verdict(minima, Rational(450), th);
  REQUIRE(rep.verdict == Verdict::FailZeroSymbol);
  auto wits = rep.witnesses;
  REQUIRE(wits.size() >= 3);
  auto sol = build_singular_solution(t2, 1, wits);
  auto gens = system_generators(sys);
  auto chk = check_singular_solution(sol, gens, wits, 2.0);
  CHECK(chk.unit_norms);
  CHECK(chk.image_bounded);
  CHECK(chk.u_report.verdict != op::SmoothnessReport::Verdict::ConsistentSmooth);
  for (const auto& r : chk.image_reports)
    CHECK(r.verdict == op::SmoothnessReport::Verdict::ConsistentSmooth);
  CHECK(chk.closed);
}

TEST_CASE("su2 singular solution for {X3} is annihilated on the m = 0 column") {
  GroupSpec g = GroupSpec::su2();
  std::vector<LieElement> gens = {LieElement::basis(g, 2)};
  auto minima = shell_minima_generators(gens, g, Rational(90));
  std::vector<ShellMinimum> wits;
  for (const auto& sm : minima)
    if (sm.is_zero) wits.push_back(sm);
  REQUIRE(wits.size() >= 3);
  auto sol = build_singular_solution(g, 1, wits);
  CHECK_FALSE(sol.exact);
  auto chk = check_singular_solution(sol, gens, wits, 2.0);
  CHECK(chk.unit_norms);
  CHECK(chk.image_bounded);
  CHECK(chk.u_report.verdict != op::SmoothnessReport::Verdict::ConsistentSmooth);
  CHECK(chk.closed);
}

TEST_CASE("singular solution edge cases") {
  GroupSpec t2 = GroupSpec::torus(2);
  CHECK_THROWS_AS(build_singular_solution(t2, 1, {}), std::invalid_argument);
  // single witness is valid
  ShellMinimum w;
  w.lambda = Rational(4);
  w.argmin = spectral::Mode::torus_freq_i({0, 2});
  w.is_zero = true;
  auto sol = build_singular_solution(t2, 1, {w});
  CHECK(sol.u_exact.coef.size() == 1);
  // non-increasing witnesses are rejected
  ShellMinimum w2 = w;
  CHECK_THROWS_AS(build_singular_solution(t2, 1, {w, w2}), std::invalid_argument);
}
