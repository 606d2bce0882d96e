#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "grid.hpp"
#include "operators.hpp"
#include "quadrature.hpp"
#include "spectral.hpp"

namespace mkm {

// Discrete form of w(x) = int_0^1 g(x tau^mu) dtau:
// w(x) ~ sum_q weight_q g(x * scale_q), weights summing to 1.
struct TauRule {
  std::vector<double> scale;
  std::vector<double> weight;
};

inline TauRule tau_rule(double mu, int nodes = kOperatorNodes) {
  require(std::isfinite(mu), "tau rule needs finite mu");
  TauRule r;
  if (mu == 0.0) {
    r.scale = {1.0};
    r.weight = {1.0};
    return r;
  }
  double beta = 1.0 / std::abs(mu) - 1.0;
  auto push = [&](double z, double w) {
    r.scale.push_back(mu > 0.0 ? z : 1.0 / z);
    r.weight.push_back(w);
  };
  if (mu > 0.0 && beta >= 2.0) {
    // (1/mu) int_0^1 g(x z) z^beta dz
    const QuadratureRule& gj = gauss_jacobi(nodes, beta, 0.0);
    for (std::size_t i = 0; i < gj.size(); ++i) push(gj.nodes[i], gj.weights[i]);
  } else {
    // (1/|mu|) int_0^1 g(x z^{+-1}) z^beta dz; neither g(xz) ~ 1 - c (xz)^p nor
    // g(x/z) is smooth at z = 0: dyadic panels toward 0
    const QuadratureRule& gl = gauss_legendre(8);
    const int panels = 40;
    for (int k = 0; k < panels; ++k) {
      double hi = std::ldexp(1.0, -k), lo = 0.5 * hi;
      for (std::size_t i = 0; i < gl.size(); ++i) {
        double z = lo + (hi - lo) * gl.nodes[i];
        push(z, (hi - lo) * gl.weights[i] * std::pow(z, beta));
      }
    }
    double delta = std::ldexp(1.0, -panels);
    const QuadratureRule& gj = gauss_jacobi(8, beta, 0.0);
    double scale = std::pow(delta, beta + 1.0);
    for (std::size_t i = 0; i < gj.size(); ++i) push(delta * gj.nodes[i], scale * gj.weights[i]);
  }
  double total = 0.0;
  for (double w : r.weight) total += w;
  for (double& w : r.weight) w /= total;
  return r;
}

class TauPlan {
 public:
  TauPlan(GridPtr grid, double mu, int nodes = kOperatorNodes) : grid_(std::move(grid)), mu_(mu) {
    rule_ = tau_rule(mu, nodes);
    std::size_t n = grid_->size(), q = rule_.scale.size();
    stencils_.resize((n - 1) * q);
    for (std::size_t j = 1; j < n; ++j)
      for (std::size_t i = 0; i < q; ++i) stencils_[(j - 1) * q + i] = grid_->stencil((*grid_)[j] * rule_.scale[i]);
  }

  std::vector<double> apply(const GridFunction& g) const {
    std::size_t n = grid_->size(), q = rule_.scale.size();
    std::vector<double> out(n);
    if (mu_ == 0.0) return g.values();
    out[0] = g[0];
    parallel_for(n - 1, [&](std::size_t j) {
      double s = 0.0;
      const Stencil* st = &stencils_[j * q];
      for (std::size_t i = 0; i < q; ++i) s += rule_.weight[i] * g.at(st[i]);
      out[j + 1] = s;
    });
    for (double v : out)
      if (std::isnan(v)) throw ValidationError("gamma_mu: NaN produced by tail extrapolation");
    return out;
  }

 private:
  GridPtr grid_;
  double mu_;
  TauRule rule_;
  std::vector<Stencil> stencils_;
};

template <class Model>
GridFunction gamma_mu(const Model& m, const GridFunction& w, double mu, int nodes = kOperatorNodes) {
  require_unit_ball(w, "gamma_mu");
  OperatorPlan plan(m, w.grid(), nodes);
  GridFunction g(w.grid(), plan.gamma(w));
  if (mu == 0.0) return g;
  TauPlan tau(w.grid(), mu, nodes);
  return GridFunction(w.grid(), tau.apply(g));
}

struct SelfSimilarProfile {
  GridFunction profile;  // psi(x) = w(x^p), on nodes x = y^{1/p}
  GridFunction reduced;  // w(y) on the solver grid
  double p = 1.0;
  double mu_star = 0.0;
  int iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::vector<double> change_history;
  double convergence_rate = std::numeric_limits<double>::quiet_NaN();
};

struct ProfileOptions {
  double tol = 1e-9;
  int max_iter = 500;
  int quad_nodes = kOperatorNodes;
  int anderson_depth = 6;  // 0: plain Picard
};

inline GridFunction maxwellian_start(GridPtr grid, double p) {
  return GridFunction::sample(std::move(grid), [p](double x) { return std::exp(-std::pow(x, p)); });
}

// C^1 smoothing of max(0, 1 - x^p): quadratic blend on |x^p - 1| < 1/4.
inline GridFunction ramp_start(GridPtr grid, double p) {
  return GridFunction::sample(std::move(grid), [p](double x) {
    const double d = 0.25;
    double y = std::pow(x, p);
    if (y <= 1.0 - d) return 1.0 - y;
    if (y >= 1.0 + d) return 0.0;
    return (1.0 + d - y) * (1.0 + d - y) / (4.0 * d);
  });
}

// Small-x order of w - e^{-x} in the reduced variable.
inline double expected_small_x_order(double mu_reduced) {
  if (mu_reduced > -0.5) return 2.0;
  if (mu_reduced > -1.0) return 1.0 / std::abs(mu_reduced);
  return std::numeric_limits<double>::quiet_NaN();
}

namespace detail {

// Anderson mixing over the last `depth` residuals.
class Anderson {
 public:
  explicit Anderson(int depth) : depth_(depth) {}

  std::vector<double> next(const std::vector<double>& x, const std::vector<double>& gx) {
    std::size_t n = x.size();
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = gx[i] - x[i];
    if (depth_ <= 0) return gx;
    if (!f_prev_.empty()) {
      Eigen::VectorXd df(n), dg(n);
      for (std::size_t i = 0; i < n; ++i) {
        df[i] = f[i] - f_prev_[i];
        dg[i] = gx[i] - g_prev_[i];
      }
      dF_.push_back(df);
      dG_.push_back(dg);
      if (static_cast<int>(dF_.size()) > depth_) {
        dF_.erase(dF_.begin());
        dG_.erase(dG_.begin());
      }
    }
    f_prev_ = f;
    g_prev_ = gx;
    if (dF_.empty()) return gx;
    Eigen::MatrixXd F(n, dF_.size());
    for (std::size_t k = 0; k < dF_.size(); ++k) F.col(k) = dF_[k];
    Eigen::VectorXd fv = Eigen::Map<const Eigen::VectorXd>(f.data(), n);
    Eigen::VectorXd gamma = F.completeOrthogonalDecomposition().solve(fv);
    std::vector<double> out = gx;
    for (std::size_t k = 0; k < dG_.size(); ++k)
      for (std::size_t i = 0; i < n; ++i) out[i] -= gamma[k] * dG_[k][i];
    return out;
  }

  void reset() {
    dF_.clear();
    dG_.clear();
    f_prev_.clear();
    g_prev_.clear();
  }

 private:
  int depth_;
  std::vector<Eigen::VectorXd> dF_, dG_;
  std::vector<double> f_prev_, g_prev_;
};

}  // namespace detail

// The iteration runs in the reduced variable y = x^p, where the profile is
// smooth at 0: the coordinates become a^p. `start` is read as a function of x
// and resampled at x = y^{1/p} on its own grid, which is taken as the y grid.
template <class Model>
SelfSimilarProfile solve_profile(const Model& m, double p, const GridFunction& start, const ProfileOptions& opt = {}) {
  require(std::isfinite(p) && p > 0.0, "profile order p must be positive");
  require(p <= 1.0, "profile order must satisfy p <= 1 (no self-similar profiles for p > 1)");
  SpectralFunction sf = spectral_function(m, opt.quad_nodes);
  if (!sf.is_linear()) {
    CriticalPoint cp = find_p0(sf);
    require(!cp.finite() || p < *cp.p0, "profile order must satisfy p < p0");
  }
  require(opt.tol > 0.0 && opt.max_iter >= 1, "profile solver needs tol > 0 and max_iter >= 1");
  require(opt.anderson_depth >= 0, "anderson depth must be non-negative");
  require_unit_ball(start, "solve_profile");

  SelfSimilarProfile out;
  out.p = p;
  out.mu_star = sf.mu(p);
  GridPtr grid = start.grid();
  std::vector<DiscreteTerm> terms = discretize(m, opt.quad_nodes);
  if (p != 1.0)
    for (auto& t : terms)
      for (double& c : t.coords) c = std::pow(c, p);
  OperatorPlan plan(std::move(terms), grid);
  TauPlan tau(grid, p * out.mu_star, opt.quad_nodes);
  // w(k y) is a fixed point whenever w is. The step pins w'(0) = -1 along
  // v = y e^{-y}, which the linearized map cannot produce.
  SlopeFunctional slope(*grid, expected_small_x_order(p * out.mu_star));
  std::vector<double> pin(grid->size());
  for (std::size_t i = 0; i < pin.size(); ++i) pin[i] = (*grid)[i] * std::exp(-(*grid)[i]);
  const double pin_slope = slope(pin);
  auto step = [&](const GridFunction& w) {
    GridFunction g(grid, plan.gamma(w));
    std::vector<double> next = tau.apply(g);
    double c = (-1.0 - slope(next)) / pin_slope;
    for (std::size_t i = 0; i < next.size(); ++i)
      next[i] = std::clamp(next[i] + c * pin[i], -1.0, 1.0);  // clamp: rounding only
    return next;
  };
  auto sup_diff = [](const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
  };

  std::vector<double> w0(grid->size());
  for (std::size_t i = 0; i < w0.size(); ++i) w0[i] = p == 1.0 ? start[i] : start(std::pow((*grid)[i], 1.0 / p));
  GridFunction w(grid, std::move(w0));
  detail::Anderson mix(opt.anderson_depth);
  double best = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opt.max_iter; ++it) {
    std::vector<double> gw = step(w);
    double change = sup_diff(gw, w.values());
    out.change_history.push_back(change);
    out.iterations = it;
    if (change < opt.tol) {
      w = GridFunction(grid, std::move(gw));
      out.converged = true;
      break;
    }
    // restart the mixing when it stalls or diverges
    if (change > 2.0 * best) mix.reset();
    best = std::min(best, change);
    std::vector<double> next = mix.next(w.values(), gw);
    for (double& v : next) v = std::clamp(v, -1.0, 1.0);
    next[0] = gw[0];
    w = GridFunction(grid, std::move(next));
  }
  out.residual = sup_diff(step(w), w.values());
  out.reduced = w;
  std::vector<double> xs(grid->size());
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = p == 1.0 ? (*grid)[i] : std::pow((*grid)[i], 1.0 / p);
  out.profile = p == 1.0 ? w : GridFunction(Grid::from_nodes(std::move(xs)), w.values());
  std::size_t h = out.change_history.size();
  if (h >= 6) {
    // geometric mean of the last few change ratios
    double r = std::log(out.change_history[h - 1] / out.change_history[h - 5]) / 4.0;
    out.convergence_rate = std::exp(r);
  }
  return out;
}

template <class Model>
SelfSimilarProfile solve_profile(const Model& m, double p, GridPtr grid, const ProfileOptions& opt = {}) {
  require(std::isfinite(p) && p > 0.0, "profile order p must be positive");
  return solve_profile(m, p, maxwellian_start(std::move(grid), p), opt);
}

struct ProfileReport {
  bool value_at_zero = false;
  bool slope_at_zero = false;
  bool monotone = false;
  bool lower_bound = false;
  bool upper_bound = false;
  bool order = false;
  double slope = 0.0;
  double order_estimate = 0.0;
  double expected_order = 0.0;
  bool maxwellian = false;
  std::vector<std::string> failures;
  bool all_passed() const { return failures.empty(); }
};

inline ProfileReport check_profile(const SelfSimilarProfile& prof) {
  ProfileReport r;
  const auto& psi = prof.reduced.values();
  const auto& xr = prof.reduced.nodes();
  double p = prof.p;

  r.value_at_zero = std::abs(psi[0] - 1.0) <= 1e-14;
  if (!r.value_at_zero) r.failures.push_back("w(0) != 1");

  r.expected_order = expected_small_x_order(p * prof.mu_star);
  r.slope = SlopeFunctional(*prof.reduced.grid(), r.expected_order)(prof.reduced.values());
  r.slope_at_zero = std::abs(r.slope + 1.0) <= 1e-3;
  if (!r.slope_at_zero) r.failures.push_back("w'(0) not within 1e-3 of -1");

  r.monotone = true;
  for (std::size_t i = 1; i < psi.size(); ++i)
    if (psi[i] > psi[i - 1] + 1e-10) r.monotone = false;
  if (!r.monotone) r.failures.push_back("w not monotone non-increasing");

  r.lower_bound = r.upper_bound = true;
  double dev = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    double e = std::exp(-xr[i]);
    if (psi[i] < e - 1e-8) r.lower_bound = false;
    if (psi[i] > 1.0 + 1e-8) r.upper_bound = false;
    dev = std::max(dev, std::abs(psi[i] - e));
  }
  if (!r.lower_bound) r.failures.push_back("w below e^{-x}");
  if (!r.upper_bound) r.failures.push_back("w above 1");

  if (std::isnan(r.expected_order)) {
    r.failures.push_back("small-x order undefined for reduced mu <= -1");
  } else if (dev < 1e-7) {
    r.maxwellian = true;
    r.order = true;
    r.order_estimate = r.expected_order;
  } else {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 1; i < psi.size(); ++i) {
      if (xr[i] < 1e-2 || xr[i] > 1e-1) continue;
      double d = std::abs(psi[i] - std::exp(-xr[i]));
      if (d <= 0.0) continue;
      double lx = std::log(xr[i]), ly = std::log(d);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++n;
    }
    if (n >= 3) {
      r.order_estimate = (n * sxy - sx * sy) / (n * sxx - sx * sx);
      r.order = std::abs(r.order_estimate - r.expected_order) <= 0.15;
    }
    if (!r.order) r.failures.push_back("small-x order of w - e^{-x} differs from the predicted exponent");
  }
  return r;
}

}  // namespace mkm
