#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "error.hpp"

namespace mkm {

// Rule on [0,1]; complements[i] = 1 - nodes[i] computed without cancellation.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> complements;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
  double total_weight() const {
    double s = 0;
    for (double w : weights) s += w;
    return s;
  }
};

inline double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

namespace detail {

// Golub-Welsch for weight (1-x)^alpha (1+x)^beta on [-1,1], mapped to [0,1]
// so that the weight becomes s^beta (1-s)^alpha times 2^-(alpha+beta+1).
inline QuadratureRule golub_welsch_jacobi(int n, double alpha, double beta) {
  Eigen::VectorXd diag(n), sub(std::max(n - 1, 1));
  double ab = alpha + beta;
  for (int k = 0; k < n; ++k) {
    double den = (2.0 * k + ab) * (2.0 * k + ab + 2.0);
    diag(k) = (k == 0) ? (beta - alpha) / (ab + 2.0) : (beta * beta - alpha * alpha) / den;
  }
  for (int k = 1; k < n; ++k) {
    double kk = k, t = 2.0 * kk + ab;
    double b2;
    if (k == 1)
      b2 = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab));
    else
      b2 = 4.0 * kk * (kk + alpha) * (kk + beta) * (kk + ab) / (t * t * (t + 1.0) * (t - 1.0));
    sub(k - 1) = std::sqrt(b2);
  }
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.complements.resize(n);
  rule.weights.resize(n);
  double mass01 = std::exp(log_beta(alpha + 1.0, beta + 1.0));
  if (n == 1) {
    double x = diag(0);
    rule.nodes[0] = 0.5 * (1.0 + x);
    rule.complements[0] = 0.5 * (1.0 - x);
    rule.weights[0] = mass01;
    return rule;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub.head(n - 1), Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw ConvergenceError("Golub-Welsch eigen-solve failed");
  for (int i = 0; i < n; ++i) {
    double x = solver.eigenvalues()(i);
    double v0 = solver.eigenvectors()(0, i);
    rule.nodes[i] = 0.5 * (1.0 + x);
    rule.complements[i] = 0.5 * (1.0 - x);
    rule.weights[i] = mass01 * v0 * v0;
  }
  return rule;
}

template <class Build>
const QuadratureRule& cached_rule(int kind, int n, double a, double b, Build build) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, double, double>, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_tuple(kind, n, a, b);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build()).first;
  return it->second;  // std::map references stay valid
}

}  // namespace detail

// Gauss-Jacobi on [0,1] for weight s^alpha_left (1-s)^alpha_right.
inline const QuadratureRule& gauss_jacobi(int n, double alpha_left, double alpha_right) {
  require(n >= 1, "quadrature needs at least one node");
  require(alpha_left > -1.0 && alpha_right > -1.0, "Jacobi exponents must exceed -1");
  return detail::cached_rule(0, n, alpha_left, alpha_right,
                             [&] { return detail::golub_welsch_jacobi(n, alpha_right, alpha_left); });
}

inline const QuadratureRule& gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

// Gauss-Legendre after the sigmoidal endpoint map s = t^k / (t^k + (1-t)^k).
// The Jacobi weight is folded into the returned weights, so the rule targets
// integrands f(s) that are smooth in the interior but may carry s^q or s ln s
// behaviour at the endpoints.
inline const QuadratureRule& clustered_rule(int n, double alpha_left, double alpha_right) {
  require(n >= 1, "quadrature needs at least one node");
  require(alpha_left > -1.0 && alpha_right > -1.0, "Jacobi exponents must exceed -1");
  return detail::cached_rule(1, n, alpha_left, alpha_right, [&] {
    double amin = std::min({alpha_left, alpha_right, 0.0});
    double k = std::max(4.0, std::ceil(2.0 / (amin + 1.0)));
    const QuadratureRule& gl = gauss_legendre(n);
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.complements.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
      double t = gl.nodes[i], u = gl.complements[i];
      double tk = std::pow(t, k), uk = std::pow(u, k), den = tk + uk;
      double s = tk / den, c = uk / den;
      double jac = k * std::pow(t * u, k - 1.0) / (den * den);
      rule.nodes[i] = s;
      rule.complements[i] = c;
      rule.weights[i] = gl.weights[i] * jac * std::pow(s, alpha_left) * std::pow(c, alpha_right);
    }
    return rule;
  });
}

}  // namespace mkm
