#include <gtest/gtest.h>

#include <cmath>

#include "mkm/model.hpp"
#include "mkm/spectral.hpp"

using namespace mkm;

TEST(ModelA, ConstantKernelIsUnitDensity) {
  auto m = make_model_A(3);
  EXPECT_NEAR(m.G.mass(), 1.0, 1e-15);
  EXPECT_NEAR(m.G.density(0.3), 1.0, 1e-14);
  EXPECT_EQ(m.a.intercept, 0.0);
  EXPECT_EQ(m.a.slope, 1.0);
  EXPECT_EQ(m.b.intercept, 1.0);
  EXPECT_EQ(m.b.slope, -1.0);
  EXPECT_TRUE(m.H.empty());
}

TEST(ModelA, TwoDimensionalExponents) {
  auto m = make_model_A(2);
  ASSERT_TRUE(m.G.smooth().has_value());
  EXPECT_EQ(m.G.smooth()->alpha_left, -0.5);
  EXPECT_EQ(m.G.smooth()->alpha_right, -0.5);
  EXPECT_NEAR(m.G.mass(), 1.0, 1e-14);
}

TEST(ModelA, Rejections) {
  EXPECT_THROW(make_model_A(1), ValidationError);
  EXPECT_THROW(SmoothFactor::tabulated({0.0, 0.5, 1.0}, {1.0, -0.1, 1.0}), ValidationError);
  EXPECT_THROW(make_model_A(3, SmoothFactor::constant(0.0)), ValidationError);
}

TEST(ModelA, TabulatedFactorNormalizes) {
  auto g = SmoothFactor::from_cosine_table({-1.0, 0.0, 1.0}, {0.5, 1.0, 2.0});
  auto m = make_model_A(3, g);
  EXPECT_NEAR(m.G.mass(), 1.0, 1e-12);
  // phi(s) = g(1 - 2s): larger weight near s = 0
  EXPECT_GT(m.G.density(0.01), m.G.density(0.99));
}

TEST(ModelB, Masses) {
  auto m = make_model_B(3, SmoothFactor::constant(), 1.0, 1.0);
  EXPECT_NEAR(*m.params.beta, 1.0, 1e-15);
  EXPECT_NEAR(m.G.mass(), 0.5, 1e-15);
  EXPECT_NEAR(m.H.mass(), 0.5, 1e-15);
  EXPECT_EQ(m.c(0.0), 1.0);
  EXPECT_EQ(m.c(1.0), 0.0);
  EXPECT_THROW(make_model_B(3, SmoothFactor::constant(), -1.0, 1.0), ValidationError);
  EXPECT_THROW(make_model_B(3, SmoothFactor::constant(), 0.0, 1.0), ValidationError);
  EXPECT_THROW(make_model_B(3, SmoothFactor::constant(), 1.0, 0.0), ValidationError);
}

TEST(ModelB, SmallThetaApproachesModelA) {
  auto b = make_model_B(3, SmoothFactor::constant(), 1e-12, 1.0);
  auto a = make_model_A(3);
  for (double p : {0.5, 1.0, 2.0}) EXPECT_NEAR(lambda_p(b, p), lambda_p(a, p), 1e-11);
}

TEST(ModelC, Slopes) {
  auto m = make_model_C(3, 0.5);
  EXPECT_DOUBLE_EQ(m.a.slope, 0.5625);
  EXPECT_DOUBLE_EQ(m.b.slope, -0.9375);
  EXPECT_NEAR(m.G.mass(), 1.0, 1e-15);
  auto e1 = make_model_C(3, 1.0);
  EXPECT_DOUBLE_EQ(e1.a.slope, 1.0);
  EXPECT_DOUBLE_EQ(e1.b.slope, -1.0);
  EXPECT_THROW(make_model_C(3, 0.0), ValidationError);
  EXPECT_THROW(make_model_C(3, 1.5), ValidationError);
}

TEST(ModelAtomic, Construction) {
  auto m = make_atomic_model({{0.5, 1.0}}, AffineMap::constant(0.7), AffineMap::constant(0.7), AffineMap::constant(1.0));
  EXPECT_DOUBLE_EQ(m.support_radius, 0.7);
  auto big = make_atomic_model({{0.5, 1.0}}, AffineMap::constant(1.2), AffineMap::constant(0.4), AffineMap::constant(1.0));
  EXPECT_DOUBLE_EQ(big.support_radius, 1.2);
  EXPECT_THROW(make_atomic_model({{0.5, -1.0}}, AffineMap::constant(1.0), AffineMap::constant(1.0), AffineMap::constant(1.0)),
               ValidationError);
  EXPECT_THROW(make_atomic_model({}, AffineMap::constant(1.0), AffineMap::constant(1.0), AffineMap::constant(1.0)),
               ValidationError);
  auto op = to_multilinear(m);
  ASSERT_EQ(op.terms.size(), 1u);
  auto d = discretize(op, 64);
  ASSERT_EQ(d.size(), 1u);
  ASSERT_EQ(d[0].size(), 1u);
  EXPECT_DOUBLE_EQ(d[0].weights[0], 1.0);
  EXPECT_DOUBLE_EQ(d[0].coords[0], 0.7);
  EXPECT_DOUBLE_EQ(d[0].coords[1], 0.7);
}

TEST(ToMultilinear, Weights) {
  auto a = to_multilinear(make_model_A(3));
  EXPECT_EQ(a.alpha(1), 0.0);
  EXPECT_NEAR(a.alpha(2), 1.0, 1e-15);
  auto b = to_multilinear(make_model_B(3, SmoothFactor::constant(), 1.0, 1.0));
  EXPECT_NEAR(b.alpha(1), 0.5, 1e-15);
  EXPECT_NEAR(b.alpha(2), 0.5, 1e-15);
}

TEST(ModelInvariants, MassesAndMapRanges) {
  std::vector<InteractionModel> models = {make_model_A(2), make_model_A(3), make_model_A(5),
                                          make_model_B(3, SmoothFactor::constant(), 0.7, 0.3),
                                          make_model_C(3, 0.5), make_model_C(4, 0.2)};
  for (const auto& m : models) {
    EXPECT_NEAR(m.G.mass() + m.H.mass(), 1.0, 1e-12);
    for (int i = 0; i <= 1000; ++i) {
      double s = i / 1000.0;
      for (const AffineMap* f : {&m.a, &m.b, &m.c}) {
        EXPECT_GE((*f)(s), -1e-15);
        EXPECT_LE((*f)(s), 1.0 + 1e-15);
      }
    }
    // marginal mass lambda(0) = sum n alpha_n
    auto op = to_multilinear(m);
    double l0 = op.alpha(1) + 2 * op.alpha(2);
    EXPECT_NEAR(lambda_p(op, 0.0), l0, 1e-13);
  }
}

TEST(ModelInvariants, RoundTripLambda) {
  std::vector<InteractionModel> models = {make_model_A(2), make_model_A(3),
                                          make_model_B(3, SmoothFactor::constant(), 0.7, 0.3), make_model_C(3, 0.5)};
  for (const auto& m : models) {
    auto op = to_multilinear(m);
    for (double p : {0.5, 1.0, 2.0, 3.0}) EXPECT_NEAR(lambda_p(m, p), lambda_p(op, p), 1e-10);
  }
}

TEST(Multilinear, ValidationAndArity) {
  ProductAtomKernel k3{{{{0.5, 0.5, 0.5}, 1.0}}};
  ProductAtomKernel k1{{{{1.0}, 1.0}}};
  auto op = make_multilinear({{3, 0.5, k3}, {1, 0.5, k1}});
  EXPECT_EQ(op.max_arity(), 3);
  EXPECT_NEAR(op.alpha(3), 0.5, 1e-15);
  EXPECT_NEAR(lambda_p(op, 0.0), 0.5 * 3 + 0.5, 1e-14);
  EXPECT_THROW(make_multilinear({{3, 0.7, k3}}), ValidationError);
  ProductAtomKernel bad{{{{0.5, 0.5}, 1.0}}};
  EXPECT_THROW(make_multilinear({{3, 1.0, bad}}), ValidationError);
}
