#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fields.hpp"

using namespace ghlab;
using namespace ghlab::fields;
using spectral::GroupSpec;

namespace {

CoefficientMap cos_sin_map() {
  // a(t) = cos(t) X1 + sin(t) X2 on su(2)
  CoefficientMap a(GroupSpec::su2(), 1);
  a.comp[0] = TrigPoly::cosine(1, 0, Rational(1));
  a.comp[1] = TrigPoly::sine(1, 0, Rational(1));
  return a;
}

}  // namespace

TEST_CASE("trig polynomial products: cos^2 = 1/2 + cos(2t)/2") {
  TrigPoly c = TrigPoly::cosine(1, 0, Rational(1));
  TrigPoly sq = c * c;
  TrigPoly expect = TrigPoly::constant(1, ExactScalar(Rational(1, 2))) +
                    TrigPoly::cosine(1, 0, Rational(1, 2), 2);
  CHECK((sq - expect).is_zero());
  CHECK(sq.is_real());
}

TEST_CASE("trig polynomial derivative and inner product") {
  TrigPoly s = TrigPoly::sine(1, 0, Rational(1));
  TrigPoly c = TrigPoly::cosine(1, 0, Rational(1));
  // d/dt sin = cos
  CHECK((s.derivative(0) - c).is_zero());
  // <cos, cos> = 1/2, <cos, sin> = 0
  CHECK((c.l2_inner(c).re - ExactScalar(Rational(1, 2))).is_zero());
  CHECK(c.l2_inner(s).is_zero());
}

TEST_CASE("su2 brackets and Jacobi identity are exact") {
  GroupSpec g = GroupSpec::su2();
  auto x1 = LieElement::basis(g, 0), x2 = LieElement::basis(g, 1), x3 = LieElement::basis(g, 2);
  auto b12 = bracket(x1, x2);
  CHECK((b12.c[2] - ExactScalar(Rational(1))).is_zero());
  CHECK(b12.c[0].is_zero());
  CHECK(bracket(x1, x1).is_zero());
  // Jacobi: [x,[y,z]] + [y,[z,x]] + [z,[x,y]] = 0
  auto j = bracket(x1, bracket(x2, x3));
  auto k = bracket(x2, bracket(x3, x1));
  auto l = bracket(x3, bracket(x1, x2));
  for (int i = 0; i < 3; ++i) CHECK((j.c[i] + k.c[i] + l.c[i]).is_zero());
  // torus is abelian
  GroupSpec t = GroupSpec::torus(3);
  auto v = LieElement::basis(t, 0), w = LieElement::basis(t, 2);
  CHECK(bracket(v, w).is_zero());
}

TEST_CASE("lie hull dimensions") {
  GroupSpec g = GroupSpec::su2();
  auto x1 = LieElement::basis(g, 0), x2 = LieElement::basis(g, 1), x3 = LieElement::basis(g, 2);
  CHECK(lie_hull({x1, x2}).size() == 3);  // brackets generate the third direction
  CHECK(lie_hull({x3}).size() == 1);
  GroupSpec t = GroupSpec::torus(2);
  CHECK(lie_hull({LieElement::basis(t, 1)}).size() == 1);
  // idempotent and monotone
  auto h = lie_hull({x1, x2});
  CHECK(lie_hull(h).size() == h.size());
  CHECK(lie_hull({x1}).size() <= lie_hull({x1, x2}).size());
}

TEST_CASE("range basis of cos X1 + sin X2") {
  CoefficientMap a = cos_sin_map();
  // oracle: Gram of {cos, sin} is diag(1/2, 1/2), rank 2
  RangeBasis rb = range_basis(a);
  CHECK(rb.exact);
  REQUIRE(rb.rank() == 2);
  CHECK(rb.basis_idx == std::vector<int>{0, 1});
  CHECK(rb.L[0].c[0].rational_part() == 1);
  CHECK(rb.L[1].c[1].rational_part() == 1);
}

TEST_CASE("range basis of a rank-one map") {
  // a(t) = (1 + cos t)(X1 + X2)
  CoefficientMap a(GroupSpec::su2(), 1);
  TrigPoly f = TrigPoly::constant(1, ExactScalar(Rational(1))) +
               TrigPoly::cosine(1, 0, Rational(1));
  a.comp[0] = f;
  a.comp[1] = f;
  RangeBasis rb = range_basis(a);
  REQUIRE(rb.rank() == 1);
  CHECK(rb.basis_idx == std::vector<int>{0});
  // L = X1 + 1*X2
  CHECK((rb.L[0].c[1] - ExactScalar(Rational(1))).is_zero());
  CHECK((rb.lambda[0][0] - ExactScalar(Rational(1))).is_zero());
}

TEST_CASE("zero maps are rejected") {
  CoefficientMap a(GroupSpec::torus(2), 1);
  CHECK_THROWS_AS(range_basis(a), zero_map_error);
}

TEST_CASE("range basis reconstruction is exact") {
  // random-ish rational map on T^1 -> R^3
  CoefficientMap a(GroupSpec::su2(), 1);
  a.comp[0] = TrigPoly::cosine(1, 0, Rational(2, 3)) + TrigPoly::constant(1, ExactScalar(Rational(1)));
  a.comp[1] = TrigPoly::sine(1, 0, Rational(1, 2));
  // a_3 = 2 a_1 - a_2 (dependent)
  a.comp[2] = a.comp[0].scaled(CES(ExactScalar(Rational(2)))) - a.comp[1];
  RangeBasis rb = range_basis(a);
  REQUIRE(rb.rank() == 2);
  // reconstruct each component: a_j == sum_p alpha_p * (L_p)_j
  for (int j = 0; j < 3; ++j) {
    TrigPoly rec(1);
    for (int p = 0; p < rb.rank(); ++p)
      rec = rec + rb.alpha[p].scaled(CES(rb.L[p].c[j]));
    CHECK((rec - a.comp[j]).is_zero());
  }
}

TEST_CASE("commutativity of coefficient map ranges") {
  GroupSpec t = GroupSpec::torus(2);
  CoefficientMap at(t, 1);
  at.comp[0] = TrigPoly::constant(1, ExactScalar(Rational(1)));
  CHECK(commutativity_check(at));  // abelian g

  CHECK_FALSE(commutativity_check(cos_sin_map()));  // [X1, X2] = X3 != 0

  CoefficientMap line(GroupSpec::su2(), 1);  // a(t) = (1 + cos t/2) X1: single line
  line.comp[0] = TrigPoly::constant(1, ExactScalar(Rational(1))) +
                 TrigPoly::cosine(1, 0, Rational(1, 2));
  CHECK(commutativity_check(line));
}

TEST_CASE("D values") {
  CoefficientMap a = cos_sin_map();
  CHECK(D_value(a, {0.0}, {1.0, 0.0}) == doctest::Approx(1.0));
  CHECK(D_value(a, {M_PI / 2}, {1.0, 0.0}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(D_value(a, {0.3}, {0.0, 0.0}) == doctest::Approx(0.0));
  // positive homogeneity
  double base = D_value(a, {0.7}, {0.6, 0.8});
  double scaled = D_value(a, {0.7}, {1.8, 2.4});
  CHECK(scaled == doctest::Approx(9.0 * base).epsilon(1e-9));
  CHECK_THROWS_AS(D_value(a, {0.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("superlevel measure matches the closed form") {
  CoefficientMap a = cos_sin_map();
  // D(t, gamma) = cos^2(t - phase); vol{cos^2 > alpha} = (2/pi) acos(sqrt(alpha))
  for (double alpha : {0.25, 0.5, 0.75}) {
    double expect = 2.0 / M_PI * std::acos(std::sqrt(alpha));
    for (auto gamma : {std::vector<double>{1, 0}, {0, 1}, {0.6, 0.8}}) {
      double got = superlevel_measure(a, gamma, alpha, 4096);
      CHECK(got == doctest::Approx(expect).epsilon(2e-3));
    }
  }
}

TEST_CASE("alpha-delta certificate") {
  CoefficientMap a = cos_sin_map();
  AlphaDelta ad = estimate_alpha_delta(a, 8, 512, 42);
  CHECK(ad.rank == 2);
  CHECK(ad.alpha > 0);
  CHECK(ad.delta > 0);
  // certificate must actually hold on a finer grid for a few unit gammas
  for (auto gamma : {std::vector<double>{1, 0}, {0.6, 0.8}}) {
    CHECK(superlevel_measure(a, gamma, ad.alpha, 2048) >= ad.delta * 0.9);
  }
  // constant nonzero map: D is t-independent, so delta = 1
  CoefficientMap c(GroupSpec::torus(2), 1);
  c.comp[0] = TrigPoly::constant(1, ExactScalar(Rational(2)));
  c.comp[1] = TrigPoly::constant(1, ExactScalar(Rational(1)));
  AlphaDelta cd = estimate_alpha_delta(c, 8, 128, 7);
  CHECK(cd.delta == doctest::Approx(1.0));
  CHECK(cd.alpha > 0);
}
