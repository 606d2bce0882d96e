#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "error.hpp"
#include "operators.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"

namespace mkm {

struct RadialDistribution {
  std::vector<double> v;
  std::vector<double> density;
  double mass = 0.0;           // 4 pi int F r^2 dr over the v grid
  double second_moment = 0.0;  // 4 pi int F r^4 dr over the v grid
  double min_density() const {
    double m = std::numeric_limits<double>::infinity();
    for (double f : density) m = std::min(m, f);
    return m;
  }
};

struct TransformOptions {
  int dimension = 3;
  double panel_width = 0.25;  // max k-width of one Gauss-Legendre sub-panel
  int max_panels = 200;       // half-periods of sin(kr) before giving up
  double decay_probe = 1e4;   // psi must be small at x = decay_probe
};

inline double maxwellian_density_3d(double v) { return std::pow(4.0 * std::numbers::pi, -1.5) * std::exp(-0.25 * v * v); }

namespace detail {

template <class F>
double panel_integral(const F& f, double lo, double hi, double width) {
  const QuadratureRule& gl = gauss_legendre(16);
  int pieces = std::max(1, static_cast<int>(std::ceil((hi - lo) / width)));
  double h = (hi - lo) / pieces, sum = 0.0;
  for (int p = 0; p < pieces; ++p) {
    double a = lo + p * h;
    for (std::size_t i = 0; i < gl.size(); ++i) sum += gl.weights[i] * f(a + h * gl.nodes[i]);
  }
  return sum * h;
}

// Limit of an alternating series of panel integrals by repeated averaging of
// partial sums (Euler transform).
inline double euler_limit(const std::vector<double>& terms) {
  std::vector<double> partial(terms.size());
  double s = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) partial[i] = (s += terms[i]);
  std::size_t levels = std::min<std::size_t>(partial.size() - 1, 30);
  std::vector<double> cur(partial.end() - (levels + 1), partial.end());
  for (std::size_t l = 0; l < levels; ++l)
    for (std::size_t i = 0; i + 1 < cur.size() - l; ++i) cur[i] = 0.5 * (cur[i] + cur[i + 1]);
  return cur[0];
}

}  // namespace detail

// F(r) = (2 pi^2 r)^{-1} int_0^inf k sin(kr) psi(k^2) dk for a radial
// characteristic function psi(|k|^2) in d = 3.
template <RadialFunction F>
RadialDistribution radial_inverse_fourier_3d(const F& psi, const std::vector<double>& v_grid,
                                             const TransformOptions& opt = {}) {
  require(opt.dimension == 3, "radial inverse transform implemented for d = 3 only");
  require(!v_grid.empty(), "velocity grid is empty");
  for (std::size_t i = 0; i < v_grid.size(); ++i) {
    require(std::isfinite(v_grid[i]) && v_grid[i] >= 0.0, "velocity grid must be nonnegative");
    if (i > 0) require(v_grid[i] > v_grid[i - 1], "velocity grid must increase");
  }
  require(std::abs(psi(opt.decay_probe)) <= 1e-3, "psi does not decay: inverse transform rejected");
  const double pi = std::numbers::pi;
  auto g = [&](double k) { return psi(k * k); };

  auto density_at = [&](double r) {
    if (r == 0.0) {
      // (2 pi^2)^{-1} int k^2 psi(k^2) dk on unit panels until negligible
      double sum = 0.0;
      int small = 0;
      for (int n = 0; n < 100000; ++n) {
        double I = detail::panel_integral([&](double k) { return k * k * g(k); }, n, n + 1.0, opt.panel_width);
        sum += I;
        small = std::abs(I) <= 1e-17 * std::max(1.0, std::abs(sum)) ? small + 1 : 0;
        if (small >= 3) break;
      }
      return sum / (2 * pi * pi);
    }
    double half = pi / r;
    auto f = [&](double k) { return k * std::sin(k * r) * g(k); };
    std::vector<double> terms;
    int small = 0;
    double sum = 0.0;
    for (int n = 0; n < opt.max_panels; ++n) {
      double I = detail::panel_integral(f, n * half, (n + 1) * half, opt.panel_width);
      terms.push_back(I);
      sum += I;
      small = std::abs(I) <= 1e-17 * std::max(1e-300, std::abs(sum)) || I == 0.0 ? small + 1 : 0;
      if (small >= 3) return sum / (2 * pi * pi * r);
    }
    return detail::euler_limit(terms) / (2 * pi * pi * r);
  };

  RadialDistribution out;
  out.v = v_grid;
  out.density.resize(v_grid.size());
  parallel_for(v_grid.size(), [&](std::size_t i) { out.density[i] = density_at(v_grid[i]); }, 1);

  // Simpson on uniform grids with an odd node count, trapezoid otherwise
  auto integrate = [&](int power) {
    const auto& v = out.v;
    std::size_t n = v.size();
    if (n < 2) return 0.0;
    auto f = [&](std::size_t i) { return 4 * pi * out.density[i] * std::pow(v[i], power); };
    double h = v[1] - v[0];
    bool uniform = true;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs((v[i] - v[i - 1]) - h) > 1e-9 * h) uniform = false;
    double s = 0.0;
    if (uniform && n % 2 == 1 && n >= 3) {
      for (std::size_t i = 0; i < n; ++i) s += f(i) * (i == 0 || i == n - 1 ? 1 : (i % 2 ? 4 : 2));
      return s * h / 3;
    }
    for (std::size_t i = 1; i < n; ++i) s += 0.5 * (f(i) + f(i - 1)) * (v[i] - v[i - 1]);
    return s;
  };
  out.mass = integrate(2);
  out.second_moment = integrate(4);
  return out;
}

inline std::vector<double> uniform_grid(double v_max, int points) {
  require(std::isfinite(v_max) && v_max > 0.0, "v_max must be positive");
  require(points >= 2, "need at least 2 velocity points");
  std::vector<double> v(points);
  for (int i = 0; i < points; ++i) v[i] = v_max * i / (points - 1);
  return v;
}

}  // namespace mkm
