#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mkm/operators.hpp"
#include "mkm/spectral.hpp"

using namespace mkm;

namespace {

std::vector<InteractionModel> shipped_models() {
  auto g = SmoothFactor::from_cosine_table({-1.0, 0.0, 1.0}, {0.5, 1.0, 2.0});
  return {make_model_A(3),
          make_model_A(2),
          make_model_A(3, g),
          make_model_B(3, SmoothFactor::constant(), 1.0, 1.0),
          make_model_B(3, SmoothFactor::constant(), 0.5, 0.5),
          make_model_C(3, 0.5),
          make_atomic_model({{0.5, 1.0}}, AffineMap::constant(0.7), AffineMap::constant(0.7), AffineMap::constant(1.0))};
}

GridFunction random_unit_ball(const GridPtr& g, std::mt19937_64& rng, bool smooth) {
  std::uniform_real_distribution<double> U(-1.0, 1.0), R(0.1, 3.0);
  if (!smooth) {
    std::vector<double> v(g->size());
    for (auto& x : v) x = U(rng);
    return GridFunction(g, v);
  }
  double c1 = R(rng), c2 = R(rng), w = 0.5 * (U(rng) + 1.0), f = R(rng);
  return GridFunction::sample(g, [=](double x) {
    return w * std::exp(-c1 * x) + (1 - w) * std::exp(-c2 * x * x) * std::cos(f * x);
  });
}

}  // namespace

TEST(Operators, GammaFixesMaxwellianForModelA) {
  auto g = make_grid();
  auto u = GridFunction::sample(g, [](double x) { return std::exp(-x); });
  for (int d : {2, 3, 4}) {
    auto gu = apply_gamma(make_model_A(d), u);
    double err = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) err = std::max(err, std::abs(gu[i] - u[i]));
    EXPECT_LT(err, 5e-9) << d;
  }
}

TEST(Operators, ConstantsAreFixed) {
  auto g = make_grid({400, 1e-6, 50.0});
  auto one = GridFunction::sample(g, [](double) { return 1.0; });
  auto zero = GridFunction::sample(g, [](double) { return 0.0; });
  for (const auto& m : shipped_models()) {
    auto a = apply_gamma(m, one);
    auto b = apply_gamma(m, zero);
    EXPECT_EQ(a[0], 1.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_NEAR(a[i], 1.0, 1e-14);
      EXPECT_EQ(b[i], 0.0);
    }
  }
  auto op = make_multilinear({{1, 0.3, ProductAtomKernel{{{{0.5}, 1.0}}}}, {3, 0.7, ProductAtomKernel{{{{0.2, 0.4, 0.9}, 1.0}}}}});
  auto z = apply_gamma(op, zero);
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_EQ(z[i], 0.0);
}

TEST(Operators, RejectsOutsideUnitBall) {
  auto g = make_grid({100, 1e-4, 10.0});
  auto u = GridFunction::sample(g, [](double x) { return 1.0 + 1e-6 * x; });
  EXPECT_THROW(apply_gamma(make_model_A(3), u), ValidationError);
  EXPECT_THROW(lipschitz_gap(make_model_A(3), u, u), ValidationError);
  EXPECT_NO_THROW(apply_L(make_model_A(3), u));
}

TEST(Operators, LinearEigenfunctions) {
  auto g = make_grid({1600, 1e-6, 10.0});
  auto m = make_model_A(3);
  auto x2 = GridFunction::sample(g, [](double x) { return x * x; });
  auto l2 = apply_L(m, x2);
  for (std::size_t i = 1; i < g->size(); ++i) EXPECT_NEAR(l2[i] / x2[i], 2.0 / 3.0, 1e-8);
  auto x1 = GridFunction::sample(g, [](double x) { return x; });
  auto l1 = apply_L(m, x1);
  for (std::size_t i = 1; i < g->size(); ++i) EXPECT_NEAR(l1[i] / x1[i], 1.0, 1e-8);
  auto one = GridFunction::sample(g, [](double) { return 1.0; });
  auto l0 = apply_L(m, one);
  for (std::size_t i = 0; i < g->size(); ++i) EXPECT_NEAR(l0[i], 2.0, 1e-13);
}

TEST(Operators, PowerEigenfunctionsExactCallable) {
  std::vector<double> xs;
  for (int i = 0; i <= 60; ++i) xs.push_back(std::pow(10.0, -6.0 + i * 0.12));
  for (const auto& m : shipped_models()) {
    auto sf = spectral_function(m);
    for (double p : {0.5, 1.0, 2.0, 3.0}) {
      auto f = [p](double x) { return std::pow(x, p); };
      auto lu = apply_L_at(m, f, xs);
      for (std::size_t j = 0; j < xs.size(); ++j)
        EXPECT_LT(std::abs(lu[j] - sf.lambda(p) * f(xs[j])) / f(xs[j]), 1e-8);
    }
  }
}

TEST(Operators, PowerEigenfunctionsOnGrid) {
  auto g = make_grid({1600, 1e-6, 10.0});
  for (const auto& m : shipped_models()) {
    auto sf = spectral_function(m);
    // the first grid interval [0, x_min] limits higher powers: x^3 reaches ~3e-7
    for (auto [p, tol] : {std::pair{1.0, 1e-8}, {2.0, 1e-8}, {3.0, 1e-6}}) {
      auto u = GridFunction::sample(g, [p](double x) { return std::pow(x, p); });
      auto lu = apply_L(m, u);
      double err = 0.0;
      for (std::size_t i = 1; i < g->size(); ++i) err = std::max(err, std::abs(lu[i] - sf.lambda(p) * u[i]) / u[i]);
      EXPECT_LT(err, tol) << p;
    }
  }
}

TEST(Operators, PlanMatchesDirectEvaluation) {
  auto g = make_grid({300, 1e-5, 20.0});
  auto m = make_model_C(3, 0.5);
  auto u = GridFunction::sample(g, [](double x) { return std::exp(-x) * (1 + 0.3 * std::sin(x)); });
  auto a = apply_gamma(m, u);
  auto b = apply_gamma_at(discretize(to_multilinear(m), kOperatorNodes), u, g->nodes());
  for (std::size_t i = 1; i < g->size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-15);
}

TEST(Operators, NormalizationAtZeroExact) {
  auto g = make_grid({200, 1e-5, 20.0});
  std::mt19937_64 rng(3);
  for (const auto& m : shipped_models()) {
    for (int k = 0; k < 5; ++k) {
      auto u = random_unit_ball(g, rng, true);
      std::vector<double> v = u.values();
      v[0] = 1.0;
      GridFunction w(g, v);
      EXPECT_EQ(apply_gamma(m, w)[0], 1.0);
    }
  }
}

TEST(Operators, UnitBallLipschitzPositivity) {
  auto g = make_grid({400, 1e-6, 50.0});
  std::mt19937_64 rng(11);
  for (const auto& m : shipped_models()) {
    OperatorPlan plan(m, g);
    for (int k = 0; k < 20; ++k) {
      auto u1 = random_unit_ball(g, rng, k % 2 == 0);
      auto u2 = random_unit_ball(g, rng, k % 3 == 0);
      auto gu = plan.gamma(u1);
      for (double v : gu) EXPECT_LE(std::abs(v), 1.0 + 1e-9);
      auto gap = plan.lipschitz_gap(u1, u2);
      for (double v : gap) EXPECT_GE(v, -1e-8);
      // L positivity
      auto pos = GridFunction::sample(g, [&](double x) { return std::abs(u1(x)); });
      for (double v : plan.linear(pos)) EXPECT_GE(v, 0.0);
    }
  }
}

TEST(Operators, LipschitzGapExamples) {
  auto g = make_grid({400, 1e-6, 50.0});
  auto m = make_model_A(3);
  auto e = GridFunction::sample(g, [](double x) { return std::exp(-x); });
  auto one = GridFunction::sample(g, [](double) { return 1.0; });
  auto same = lipschitz_gap(m, e, e);
  for (std::size_t i = 0; i < same.size(); ++i) EXPECT_EQ(same[i], 0.0);
  auto gap = lipschitz_gap(m, e, one);
  for (std::size_t i = 0; i < gap.size(); ++i) EXPECT_GE(gap[i], 0.0);
}
