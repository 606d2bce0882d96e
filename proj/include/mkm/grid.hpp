#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"

namespace mkm {

struct GridSpec {
  int points = 1600;  // total nodes including x = 0
  double x_min = 1e-6;
  double x_max = 50.0;
};

// Interval lookup and cubic Hermite basis for one query point.
struct Stencil {
  int k = 0;  // interval [x_k, x_{k+1}]; k = -1 marks a tail query
  double h00 = 1.0, h10 = 0.0, h01 = 0.0, h11 = 0.0;  // h10, h11 already scaled by the interval width in t
  double x = 0.0;                                      // query point (used by tail queries)
  bool tail() const { return k < 0; }
};

// Nodes 0 = x_0 < x_1 < ... < x_{M-1}; interpolation coordinate t = log(1+x).
class Grid {
 public:
  static std::shared_ptr<const Grid> make(const GridSpec& spec) {
    require(spec.points >= 8, "grid needs at least 8 points");
    require(std::isfinite(spec.x_min) && spec.x_min > 0.0, "grid x_min must be positive");
    require(std::isfinite(spec.x_max) && spec.x_max > spec.x_min, "grid x_max must exceed x_min");
    std::vector<double> x(spec.points);
    x[0] = 0.0;
    int n = spec.points - 1;
    double l0 = std::log(spec.x_min), l1 = std::log(spec.x_max);
    for (int i = 0; i < n; ++i) x[i + 1] = std::exp(l0 + (l1 - l0) * i / (n - 1));
    x[1] = spec.x_min;
    x[n] = spec.x_max;
    return from_nodes(std::move(x));
  }

  static std::shared_ptr<const Grid> from_nodes(std::vector<double> x) {
    require(x.size() >= 5, "grid needs at least 5 nodes");
    require(x[0] == 0.0, "grid must start at x = 0");
    for (std::size_t i = 1; i < x.size(); ++i)
      require(std::isfinite(x[i]) && x[i] > x[i - 1], "grid nodes must increase strictly");
    return std::shared_ptr<const Grid>(new Grid(std::move(x)));
  }

  std::size_t size() const { return x_.size(); }
  const std::vector<double>& nodes() const { return x_; }
  double x_max() const { return x_.back(); }
  double operator[](std::size_t i) const { return x_[i]; }

  Stencil stencil(double x) const {
    Stencil s;
    s.x = x;
    std::size_t n = x_.size();
    if (x > x_.back()) {
      s.k = -1;
      return s;
    }
    std::size_t k = std::upper_bound(x_.begin(), x_.end(), x) - x_.begin();
    k = std::clamp<std::size_t>(k, 1, n - 1) - 1;
    s.k = static_cast<int>(k);
    if (x == x_[k]) return s;  // exact node: h00 = 1
    double h = t_[k + 1] - t_[k];
    double r = (std::log1p(x) - t_[k]) / h;
    r = std::clamp(r, 0.0, 1.0);
    double r2 = r * r, r3 = r2 * r;
    s.h00 = 2 * r3 - 3 * r2 + 1;
    s.h10 = (r3 - 2 * r2 + r) * h;
    s.h01 = -2 * r3 + 3 * r2;
    s.h11 = (r3 - r2) * h;
    return s;
  }

  // Raw 5-point derivative du/dt at node i, followed by the monotone limiter.
  void slopes(const std::vector<double>& u, std::vector<double>& m) const {
    std::size_t n = x_.size();
    m.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& w = dw_[i];
      double s = 0.0;
      for (int j = 0; j < 5; ++j) s += w[j] * u[idx_[i][j]];
      m[i] = s;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double dl = i > 0 ? (u[i] - u[i - 1]) / (t_[i] - t_[i - 1]) : (u[1] - u[0]) / (t_[1] - t_[0]);
      double dr = i + 1 < n ? (u[i + 1] - u[i]) / (t_[i + 1] - t_[i]) : dl;
      if (i == 0) dl = dr;
      if (dl * dr <= 0.0) {
        m[i] = 0.0;  // local extremum or flat neighbour
        continue;
      }
      double sign = dr > 0.0 ? 1.0 : -1.0;
      double lim = 3.0 * std::min(std::abs(dl), std::abs(dr));
      if (m[i] * sign < 0.0)
        m[i] = 0.0;
      else if (std::abs(m[i]) > lim)
        m[i] = sign * lim;
    }
  }

 private:
  explicit Grid(std::vector<double> x) : x_(std::move(x)) {
    std::size_t n = x_.size();
    t_.resize(n);
    for (std::size_t i = 0; i < n; ++i) t_[i] = std::log1p(x_[i]);
    dw_.resize(n);
    idx_.resize(n);
    // near x = 0 the first gap dwarfs the next ones; those slopes use nodes
    // close to 0, x_1, 2 x_1, 3 x_1, 4 x_1 instead of the local window
    std::array<std::size_t, 5> wide{0, 1, 0, 0, 0};
    bool use_wide = x_[2] - x_[1] < 0.5 * x_[1];
    for (int m = 2; use_wide && m < 5; ++m) {
      std::size_t k = wide[m - 1] + 1;
      while (k < n && x_[k] < m * x_[1]) ++k;
      if (k >= n) use_wide = false;
      else wide[m] = k;
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::array<std::size_t, 5> id;
      if (use_wide && i < 3) {
        id = wide;
      } else {
        std::size_t lo = i < 2 ? 0 : std::min(i - 2, n - 5);
        for (int j = 0; j < 5; ++j) id[j] = lo + j;
      }
      idx_[i] = id;
      // derivative at t_i of the quartic through the five stencil nodes
      for (int j = 0; j < 5; ++j) {
        double tj = t_[id[j]], w = 0.0;
        double denom = 1.0;
        for (int k = 0; k < 5; ++k)
          if (k != j) denom *= tj - t_[id[k]];
        for (int k = 0; k < 5; ++k) {
          if (k == j) continue;
          double prod = 1.0;
          for (int l = 0; l < 5; ++l)
            if (l != j && l != k) prod *= t_[i] - t_[id[l]];
          w += prod;
        }
        dw_[i][j] = w / denom;
      }
    }
  }

  std::vector<double> x_, t_;
  std::vector<std::array<double, 5>> dw_;
  std::vector<std::array<std::size_t, 5>> idx_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(const GridSpec& spec = {}) { return Grid::make(spec); }

// u'(0) as a linear functional of the node values: least-squares fit of
// (u - u(0))/x = s + c1 e + c2 e^2, e = y^{q-1}, over small x.
class SlopeFunctional {
 public:
  SlopeFunctional(const Grid& g, double q) {
    if (!std::isfinite(q)) q = 2.0;
    for (std::size_t i = 1; i < g.size(); ++i) {
      if (g[i] > 1e-2 && idx_.size() >= 12) break;
      idx_.push_back(i);
    }
    require(idx_.size() >= 3, "slope estimate needs at least 3 nodes");
    Eigen::MatrixXd A(idx_.size(), 3);
    for (std::size_t r = 0; r < idx_.size(); ++r) {
      double e = std::pow(g[idx_[r]], q - 1.0);
      A(r, 0) = 1.0;
      A(r, 1) = e;
      A(r, 2) = e * e;
    }
    Eigen::MatrixXd pinv = A.completeOrthogonalDecomposition().pseudoInverse();
    coef_.resize(idx_.size());
    for (std::size_t r = 0; r < idx_.size(); ++r) coef_[r] = pinv(0, r) / g[idx_[r]];
  }

  template <class V>
  double operator()(const V& w) const {
    double s = 0.0;
    for (std::size_t r = 0; r < idx_.size(); ++r) s += coef_[r] * (w[idx_[r]] - w[0]);
    return s;
  }

 private:
  std::vector<std::size_t> idx_;
  std::vector<double> coef_;
};

// Radial function sampled on a grid: monotone cubic in log(1+x) inside,
// exponential tail fitted to the last 5 nodes beyond x_max.
class GridFunction {
 public:
  GridFunction() = default;

  GridFunction(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
    require(grid_ != nullptr, "grid function needs a grid");
    require(values_.size() == grid_->size(), "value count does not match grid size");
    for (double v : values_) require(std::isfinite(v), "grid function values must be finite");
    grid_->slopes(values_, slopes_);
    sup_ = 0.0;
    for (double v : values_) sup_ = std::max(sup_, std::abs(v));
    in_unit_ball_ = sup_ <= 1.0;
    fit_tail();
  }

  template <class F>
  static GridFunction sample(GridPtr grid, F&& f) {
    std::vector<double> v(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f((*grid)[i]);
    return GridFunction(std::move(grid), std::move(v));
  }

  const GridPtr& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& nodes() const { return grid_->nodes(); }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double sup_norm() const { return sup_; }
  bool in_unit_ball(double slack = 0.0) const { return sup_ <= 1.0 + slack; }
  double tail_rate() const { return tail_rate_; }

  double at(const Stencil& s) const {
    if (s.tail()) return tail(s.x);
    std::size_t k = s.k;
    if (s.h01 == 0.0 && s.h10 == 0.0 && s.h11 == 0.0) return values_[k];
    double v = s.h00 * values_[k] + s.h10 * slopes_[k] + s.h01 * values_[k + 1] + s.h11 * slopes_[k + 1];
    if (in_unit_ball_) v = std::clamp(v, -1.0, 1.0);
    return v;
  }

  double operator()(double x) const {
    require(!(x < 0.0), "grid function evaluated at negative x");
    require(!std::isnan(x), "grid function evaluated at NaN");
    return at(grid_->stencil(x));
  }

  double tail(double x) const {
    double last = values_.back();
    double v = tail_rate_ > 0.0 ? last * std::exp(-tail_rate_ * (x - grid_->x_max())) : last;
    if (in_unit_ball_) v = std::clamp(v, -1.0, 1.0);
    return v;
  }

 private:
  void fit_tail() {
    std::size_t n = values_.size();
    tail_rate_ = 0.0;
    const auto& x = grid_->nodes();
    bool pos = true, neg = true;
    for (std::size_t i = n - 5; i < n; ++i) {
      pos = pos && values_[i] > 0.0;
      neg = neg && values_[i] < 0.0;
    }
    if (!pos && !neg) return;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = n - 5; i < n; ++i) {
      double xi = x[i], yi = std::log(std::abs(values_[i]));
      sx += xi;
      sy += yi;
      sxx += xi * xi;
      sxy += xi * yi;
    }
    double slope = (5 * sxy - sx * sy) / (5 * sxx - sx * sx);
    if (std::isfinite(slope) && slope < 0.0) tail_rate_ = -slope;
  }

  GridPtr grid_;
  std::vector<double> values_, slopes_;
  double sup_ = 0.0;
  bool in_unit_ball_ = true;
  double tail_rate_ = 0.0;
};

inline double eval(const GridFunction& u, double x) { return u(x); }

// Two-column CSV "x,value" with 17 significant digits.
inline void write_csv(const GridFunction& u, const std::string& path, const std::string& value_name = "value") {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot open output file: " + path);
  out << "x," << value_name << "\n" << std::setprecision(17);
  for (std::size_t i = 0; i < u.size(); ++i) out << u.nodes()[i] << "," << u[i] << "\n";
}

inline GridFunction read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open grid function file: " + path);
  std::string line;
  std::vector<double> x, v;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a >> b)) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw ValidationError("malformed row in " + path + ": " + line);
    }
    first = false;
    x.push_back(a);
    v.push_back(b);
  }
  return GridFunction(Grid::from_nodes(std::move(x)), std::move(v));
}

}  // namespace mkm
