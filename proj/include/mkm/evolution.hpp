#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "operators.hpp"

namespace mkm {

struct EvolveOptions {
  int snapshot_every = 10;  // store every k-th step (plus t = 0 and the final step)
  int quad_nodes = kOperatorNodes;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<GridFunction> snapshots;
  // per step, index 0 is the initial state
  std::vector<double> step_times;
  std::vector<double> sup_norm;
  std::vector<double> value_at_zero;
  std::vector<double> slope_at_zero;  // -du/dx(0)
};

// -u'(0) for data smooth at 0.
inline double slope_at_zero(const GridFunction& u) { return -SlopeFunctional(*u.grid(), 2.0)(u.values()); }

// u_t + u = Gamma(u) by the exponential midpoint predictor-corrector.
template <class Model>
Trajectory evolve(const Model& m, const GridFunction& u0, double t_end, double dt, const EvolveOptions& opt = {}) {
  require(std::isfinite(dt) && dt > 0.0, "evolve needs dt > 0");
  require(std::isfinite(t_end) && t_end >= 0.0, "evolve needs t_end >= 0");
  require(opt.snapshot_every >= 1, "snapshot stride must be >= 1");
  require(u0.in_unit_ball(), "evolve: initial datum outside the unit ball");
  OperatorPlan plan(m, u0.grid(), opt.quad_nodes);
  long steps = std::lround(std::ceil(t_end / dt - 1e-9));
  double h = steps > 0 ? t_end / steps : dt;
  double e_half = std::exp(-0.5 * h), e_full = std::exp(-h);
  double c_half = -std::expm1(-0.5 * h), c_full = -std::expm1(-h);

  Trajectory tr;
  SlopeFunctional slope(*u0.grid(), 2.0);
  auto record = [&](double t, const GridFunction& u, bool snapshot) {
    tr.step_times.push_back(t);
    tr.sup_norm.push_back(u.sup_norm());
    tr.value_at_zero.push_back(u[0]);
    tr.slope_at_zero.push_back(-slope(u.values()));
    if (snapshot) {
      tr.times.push_back(t);
      tr.snapshots.push_back(u);
    }
  };
  GridFunction u = u0;
  record(0.0, u, true);
  std::size_t n = u.size();
  std::vector<double> mid(n), next(n);
  for (long s = 1; s <= steps; ++s) {
    std::vector<double> g = plan.gamma(u);
    // convex combinations of values in [-1,1]; the clamp only removes rounding
    for (std::size_t i = 0; i < n; ++i) mid[i] = std::clamp(e_half * u[i] + c_half * g[i], -1.0, 1.0);
    if (u[0] == 1.0 && g[0] == 1.0) mid[0] = 1.0;
    GridFunction um(u.grid(), mid);
    std::vector<double> gm = plan.gamma(um);
    for (std::size_t i = 0; i < n; ++i) next[i] = std::clamp(e_full * u[i] + c_full * gm[i], -1.0, 1.0);
    if (u[0] == 1.0 && gm[0] == 1.0) next[0] = 1.0;
    u = GridFunction(u.grid(), next);
    record(s * h, u, s % opt.snapshot_every == 0 || s == steps);
  }
  return tr;
}

// x -> u(x e^{-mu t}) on the target grid (default: u's own grid).
inline GridFunction rescale(const GridFunction& u, double mu, double t, GridPtr target = nullptr) {
  if (!target) target = u.grid();
  double f = std::exp(-mu * t);
  if (f == 1.0 && target == u.grid()) return u;
  return GridFunction::sample(target, [&](double x) { return u(x * f); });
}

// max over nodes x > 0 (up to x_upper) of |u1 - u2| / x^p; +inf if the
// functions already differ at x = 0.
inline double contraction_metric(const GridFunction& u1, const GridFunction& u2, double p,
                                 double x_upper = std::numeric_limits<double>::infinity()) {
  require(std::isfinite(p) && p > 0.0, "contraction metric needs p > 0");
  require(u1.nodes() == u2.nodes(), "contraction metric needs functions on the same grid");
  if (std::abs(u1[0] - u2[0]) > 1e-14) return std::numeric_limits<double>::infinity();
  double m = 0.0;
  const auto& x = u1.nodes();
  for (std::size_t i = 1; i < x.size() && x[i] <= x_upper; ++i)
    m = std::max(m, std::abs(u1[i] - u2[i]) / std::pow(x[i], p));
  return m;
}

// Least-squares decay rate of log(metric) over the second half of the series.
// Returns +inf when the metric vanishes identically.
inline double decay_rate_fit(const std::vector<double>& times, const std::vector<double>& metric) {
  require(times.size() == metric.size(), "decay fit: mismatched series");
  require(times.size() >= 4, "decay fit needs at least 4 stored snapshots");
  std::size_t start = times.size() / 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = start; i < times.size(); ++i) {
    if (!(metric[i] > 0.0)) {
      if (metric[i] == 0.0) return std::numeric_limits<double>::infinity();
      throw ValidationError("decay fit: metric not finite");
    }
    if (!std::isfinite(metric[i])) throw ValidationError("decay fit: metric not finite");
    double y = std::log(metric[i]);
    sx += times[i];
    sy += y;
    sxx += times[i] * times[i];
    sxy += times[i] * y;
    ++n;
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -slope;
}

inline double decay_rate_fit(const Trajectory& a, const Trajectory& b, double p) {
  require(a.times.size() == b.times.size(), "decay fit needs synchronized trajectories");
  require(a.times.size() >= 4, "decay fit needs at least 4 stored snapshots");
  std::vector<double> metric;
  for (std::size_t i = 0; i < a.times.size(); ++i) {
    require(std::abs(a.times[i] - b.times[i]) <= 1e-12, "decay fit needs synchronized time stamps");
    metric.push_back(contraction_metric(a.snapshots[i], b.snapshots[i], p));
  }
  return decay_rate_fit(a.times, metric);
}

}  // namespace mkm
