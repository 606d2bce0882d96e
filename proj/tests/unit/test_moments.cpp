#include <gtest/gtest.h>

#include <cmath>

#include "mkm/moments.hpp"

using namespace mkm;

TEST(Moments, ModelAAllOne) {
  for (int d : {2, 3}) {
    auto t = moment_recursion(make_model_A(d), 6);
    ASSERT_EQ(t.s.size(), 7u);
    for (std::size_t i = 0; i < t.s.size(); ++i) {
      EXPECT_TRUE(t.finite[i]);
      EXPECT_NEAR(t.m[i], 1.0, 1e-12) << "s=" << t.s[i];
    }
    if (d == 3) {
      EXPECT_NEAR(t.denominator[2], 1.0 / 3.0, 1e-12);
      EXPECT_NEAR(t.numerator[2], 1.0 / 3.0, 1e-12);
    }
    EXPECT_FALSE(t.s_star.has_value());
  }
}

TEST(Moments, ModelCGolden) {
  auto t = moment_recursion(make_model_C(3, 0.5), 6);
  EXPECT_NEAR(t.m[2], 9.0 / 7.0, 1e-12);
  EXPECT_NEAR(t.numerator[2], 0.2109375, 1e-12);
  EXPECT_NEAR(t.denominator[2], 0.1640625, 1e-12);
  EXPECT_TRUE(t.finite[4]);
  EXPECT_LT(t.denominator[5], 0.0);
  EXPECT_FALSE(t.finite[5]);
  EXPECT_TRUE(std::isinf(t.m[5]));
  ASSERT_TRUE(t.s_star.has_value());
  EXPECT_GT(*t.s_star, 4.1);
  EXPECT_LT(*t.s_star, 4.2);
  for (std::size_t i = 0; i < t.s.size(); ++i)
    if (t.finite[i]) EXPECT_GT(t.m[i], 0.0);
}

TEST(Moments, DenominatorIdentity) {
  // D(s) = s (mu(1) - mu(s)); positive on (1, s*) and negative beyond
  auto sf = spectral_function(make_model_C(3, 0.5));
  auto t = moment_recursion(sf, 8);
  double s_star = *t.s_star;
  for (std::size_t i = 2; i < t.s.size(); ++i) {
    double s = t.s[i];
    EXPECT_NEAR(t.denominator[i], s * (sf.mu(1.0) - sf.mu(s)), 1e-12);
    if (s < s_star) EXPECT_GT(t.denominator[i], 0.0);
    if (s > s_star) EXPECT_LT(t.denominator[i], 0.0);
  }
}

TEST(Moments, MultinomialExpansionTernary) {
  // one ternary atom with coordinates y: I(2) = sum_{j != k} y_j y_k m_1^2 = (sum y)^2 - sum y^2
  std::vector<double> y{0.2, 0.5, 0.7};
  std::vector<double> m{1.0, 1.0, 1.0};
  std::vector<double> lf{0.0, 0.0, std::log(2.0)};
  double total = 0, sq = 0;
  for (double v : y) {
    total += v;
    sq += v * v;
  }
  EXPECT_NEAR(detail::multinomial_moment_sum(y, 2, m, lf), total * total - sq, 1e-15);
}

TEST(Moments, Errors) {
  EXPECT_THROW(moment_recursion(make_model_A(3), 1), ValidationError);
  auto pa = make_model_A(3);
  auto g = make_grid({300, 1e-6, 50.0});
  auto prof = solve_profile(pa, 1.0, g);
  EXPECT_THROW(profile_moment_check(prof, 4), ValidationError);
}

TEST(Moments, TailClassification) {
  auto a = tail_classification(make_model_A(3), 1.0);
  EXPECT_EQ(a.kind, TailReport::Kind::all_finite);
  auto c = tail_classification(make_model_C(3, 0.5), 1.0);
  EXPECT_EQ(c.kind, TailReport::Kind::finite_below_s_star);
  ASSERT_TRUE(c.bound.has_value());
  EXPECT_GT(*c.bound, 4.1);
  EXPECT_LT(*c.bound, 4.2);
  for (const auto& m : {make_model_A(3), make_model_C(3, 0.5)}) {
    auto h = tail_classification(m, 0.5);
    EXPECT_EQ(h.kind, TailReport::Kind::finite_below_p);
    EXPECT_EQ(*h.bound, 0.5);
  }
  EXPECT_THROW(tail_classification(make_model_A(3), 1.5), ValidationError);
}

TEST(Moments, ProfileCrossCheck) {
  auto g = make_grid();
  auto pa = solve_profile(make_model_A(3), 1.0, g);
  EXPECT_NEAR(profile_moment_check(pa, 2), 1.0, 0.02);
  EXPECT_NEAR(profile_moment_check(pa, 3), 1.0, 0.02);
  auto pc = solve_profile(make_model_C(3, 0.5), 1.0, g);
  auto t = moment_recursion(make_model_C(3, 0.5), 3);
  EXPECT_NEAR(profile_moment_check(pc, 2), t.m[2], 0.02 * t.m[2]);
  EXPECT_NEAR(profile_moment_check(pc, 3, 0.05), t.m[3], 0.02 * t.m[3]);
}
