#include <gtest/gtest.h>

#include <cmath>

#include "mkm/quadrature.hpp"

using namespace mkm;

TEST(Quadrature, GaussJacobiIntegratesPolynomialsExactly) {
  for (auto [a, b] : {std::pair{0.0, 0.0}, {-0.5, -0.5}, {1.5, 0.0}, {0.0, 3.0}, {-0.9, 2.2}}) {
    const QuadratureRule& r = gauss_jacobi(12, a, b);
    for (int k = 0; k < 20; ++k) {
      double q = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) q += r.weights[i] * std::pow(r.nodes[i], k);
      double exact = std::exp(log_beta(a + k + 1.0, b + 1.0));
      EXPECT_NEAR(q, exact, 1e-13 * std::max(1.0, exact)) << "a=" << a << " b=" << b << " k=" << k;
    }
  }
}

TEST(Quadrature, NodesAndComplementsConsistent) {
  const QuadratureRule& r = gauss_jacobi(64, 0.3, -0.4);
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_GT(r.nodes[i], 0.0);
    EXPECT_LT(r.nodes[i], 1.0);
    EXPECT_NEAR(r.nodes[i] + r.complements[i], 1.0, 1e-15);
    EXPECT_GT(r.weights[i], 0.0);
  }
}

TEST(Quadrature, ClusteredRuleHandlesEndpointPowers) {
  // int s^0.5 = 2/3, int s ln s = -1/4, int s^{-1/2}(1-s)^{-1/2} s = B(1.5, 0.5) = pi/2
  const QuadratureRule& r = clustered_rule(64, 0.0, 0.0);
  double a = 0, b = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    a += r.weights[i] * std::sqrt(r.nodes[i]);
    b += r.weights[i] * r.nodes[i] * std::log(r.nodes[i]);
  }
  EXPECT_NEAR(a, 2.0 / 3.0, 1e-13);
  EXPECT_NEAR(b, -0.25, 1e-13);
  const QuadratureRule& c = clustered_rule(64, -0.5, -0.5);
  double s = 0;
  for (std::size_t i = 0; i < c.size(); ++i) s += c.weights[i] * c.nodes[i];
  EXPECT_NEAR(s, M_PI / 2, 1e-12);
}
