#pragma once

#include <cmath>
#include <concepts>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "model.hpp"
#include "parallel.hpp"

namespace mkm {

constexpr int kOperatorNodes = 64;
constexpr double kUnitBallSlack = 1e-9;

template <class F>
concept RadialFunction = requires(const F& f, double x) {
  { f(x) } -> std::convertible_to<double>;
};

// Precomputed interpolation stencils for every (grid node, quadrature node,
// argument) triple, so repeated applications on one grid are cheap.
class OperatorPlan {
 public:
  OperatorPlan(std::vector<DiscreteTerm> terms, GridPtr grid) : grid_(std::move(grid)) {
    std::size_t n = grid_->size();
    for (auto& t : terms) {
      TermPlan tp;
      tp.arity = t.arity;
      tp.alpha = 0.0;
      for (double w : t.weights) tp.alpha += w;
      tp.per_node = t.size() * t.arity;
      tp.stencils.resize((n - 1) * tp.per_node);
      for (std::size_t j = 1; j < n; ++j) {
        double x = (*grid_)[j];
        for (std::size_t q = 0; q < tp.per_node; ++q) tp.stencils[(j - 1) * tp.per_node + q] = grid_->stencil(t.coords[q] * x);
      }
      tp.weights = std::move(t.weights);
      terms_.push_back(std::move(tp));
    }
  }

  OperatorPlan(const InteractionModel& m, GridPtr grid, int nodes = kOperatorNodes)
      : OperatorPlan(discretize(to_multilinear(m), nodes), std::move(grid)) {}
  OperatorPlan(const MultilinearOperator& op, GridPtr grid, int nodes = kOperatorNodes)
      : OperatorPlan(discretize(op, nodes), std::move(grid)) {}

  const GridPtr& grid() const { return grid_; }

  std::vector<double> gamma(const GridFunction& u) const {
    check_grid(u);
    std::vector<double> out(grid_->size());
    double u0 = u[0];
    // Gamma(u)(0) = sum alpha_n u(0)^n, returned as exactly 1 when u(0) = 1
    double g0 = 0.0;
    for (const auto& t : terms_) g0 += t.alpha * std::pow(u0, t.arity);
    out[0] = u0 == 1.0 ? 1.0 : g0;
    parallel_for(grid_->size() - 1, [&](std::size_t j) {
      double sum = 0.0;
      for (const auto& t : terms_) {
        const Stencil* st = &t.stencils[j * t.per_node];
        double acc = 0.0;
        for (std::size_t i = 0; i < t.weights.size(); ++i) {
          double prod = t.weights[i];
          for (int k = 0; k < t.arity; ++k) prod *= u.at(*st++);
          acc += prod;
        }
        sum += acc;
      }
      out[j + 1] = sum;
    });
    return out;
  }

  std::vector<double> linear(const GridFunction& u) const {
    check_grid(u);
    std::vector<double> out(grid_->size());
    double l0 = 0.0;
    for (const auto& t : terms_) l0 += t.alpha * t.arity;
    out[0] = l0 * u[0];
    parallel_for(grid_->size() - 1, [&](std::size_t j) {
      double sum = 0.0;
      for (const auto& t : terms_) {
        const Stencil* st = &t.stencils[j * t.per_node];
        for (std::size_t i = 0; i < t.weights.size(); ++i) {
          double inner = 0.0;
          for (int k = 0; k < t.arity; ++k) inner += u.at(*st++);
          sum += t.weights[i] * inner;
        }
      }
      out[j + 1] = sum;
    });
    return out;
  }

  // L(|u1 - u2|) - |Gamma(u1) - Gamma(u2)| with |u1 - u2| taken pointwise at
  // the query points.
  std::vector<double> lipschitz_gap(const GridFunction& u1, const GridFunction& u2) const {
    check_grid(u1);
    check_grid(u2);
    std::vector<double> out(grid_->size());
    auto node_gap = [&](auto&& value1, auto&& value2, std::size_t j) {
      double l = 0.0, g = 0.0;
      for (const auto& t : terms_) {
        for (std::size_t i = 0; i < t.weights.size(); ++i) {
          double p1 = 1.0, p2 = 1.0, inner = 0.0;
          for (int k = 0; k < t.arity; ++k) {
            double a = value1(t, j, i, k), b = value2(t, j, i, k);
            p1 *= a;
            p2 *= b;
            inner += std::abs(a - b);
          }
          l += t.weights[i] * inner;
          g += t.weights[i] * (p1 - p2);
        }
      }
      return l - std::abs(g);
    };
    auto at0 = [](const GridFunction& u) {
      return [&u](const TermPlan&, std::size_t, std::size_t, int) { return u[0]; };
    };
    out[0] = node_gap(at0(u1), at0(u2), 0);
    parallel_for(grid_->size() - 1, [&](std::size_t j) {
      auto v1 = [&](const TermPlan& t, std::size_t jj, std::size_t i, int k) {
        return u1.at(t.stencils[jj * t.per_node + i * t.arity + k]);
      };
      auto v2 = [&](const TermPlan& t, std::size_t jj, std::size_t i, int k) {
        return u2.at(t.stencils[jj * t.per_node + i * t.arity + k]);
      };
      out[j + 1] = node_gap(v1, v2, j);
    });
    return out;
  }

 private:
  struct TermPlan {
    int arity = 0;
    double alpha = 0.0;
    std::size_t per_node = 0;
    std::vector<double> weights;
    std::vector<Stencil> stencils;
  };

  void check_grid(const GridFunction& u) const {
    require(u.grid() == grid_ || u.nodes() == grid_->nodes(), "grid function lives on a different grid");
  }

  GridPtr grid_;
  std::vector<TermPlan> terms_;
};

// Direct evaluation for any radial callable at the given points.
template <RadialFunction F>
std::vector<double> apply_gamma_at(const std::vector<DiscreteTerm>& terms, const F& u, const std::vector<double>& xs) {
  std::vector<double> out(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    double sum = 0.0;
    for (const auto& t : terms)
      for (std::size_t i = 0; i < t.size(); ++i) {
        double prod = t.weights[i];
        for (int k = 0; k < t.arity; ++k) prod *= u(t.coords[i * t.arity + k] * xs[j]);
        sum += prod;
      }
    out[j] = sum;
  }
  return out;
}

template <RadialFunction F>
std::vector<double> apply_L_at(const std::vector<DiscreteTerm>& terms, const F& u, const std::vector<double>& xs) {
  std::vector<double> out(xs.size());
  for (std::size_t j = 0; j < xs.size(); ++j) {
    double sum = 0.0;
    for (const auto& t : terms)
      for (std::size_t i = 0; i < t.size(); ++i) {
        double inner = 0.0;
        for (int k = 0; k < t.arity; ++k) inner += u(t.coords[i * t.arity + k] * xs[j]);
        sum += t.weights[i] * inner;
      }
    out[j] = sum;
  }
  return out;
}

template <class Model>
std::vector<double> apply_L_at(const Model& m, const RadialFunction auto& u, const std::vector<double>& xs,
                               int nodes = kOperatorNodes) {
  return apply_L_at(discretize(m, nodes), u, xs);
}

inline void require_unit_ball(const GridFunction& u, const char* what) {
  require(u.in_unit_ball(kUnitBallSlack), std::string(what) + ": input outside the unit ball (sup |u| > 1 + 1e-9)");
}

template <class Model>
GridFunction apply_gamma(const Model& m, const GridFunction& u, int nodes = kOperatorNodes) {
  require_unit_ball(u, "apply_gamma");
  OperatorPlan plan(m, u.grid(), nodes);
  return GridFunction(u.grid(), plan.gamma(u));
}

template <class Model>
GridFunction apply_L(const Model& m, const GridFunction& u, int nodes = kOperatorNodes) {
  OperatorPlan plan(m, u.grid(), nodes);
  return GridFunction(u.grid(), plan.linear(u));
}

template <class Model>
GridFunction lipschitz_gap(const Model& m, const GridFunction& u1, const GridFunction& u2, int nodes = kOperatorNodes) {
  require_unit_ball(u1, "lipschitz_gap");
  require_unit_ball(u2, "lipschitz_gap");
  OperatorPlan plan(m, u1.grid(), nodes);
  return GridFunction(u1.grid(), plan.lipschitz_gap(u1, u2));
}

}  // namespace mkm
