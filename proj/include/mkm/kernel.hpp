#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "quadrature.hpp"

namespace mkm {

// Bounded nonnegative factor phi(s) on [0,1]: a constant or a monotone
// piecewise-cubic (Fritsch-Carlson) interpolant of a table.
class SmoothFactor {
 public:
  static SmoothFactor constant(double c = 1.0) {
    require(std::isfinite(c) && c >= 0.0, "smooth factor must be nonnegative");
    SmoothFactor f;
    f.constant_ = c;
    return f;
  }

  static SmoothFactor tabulated(std::vector<double> s, std::vector<double> v) {
    require(s.size() >= 2 && s.size() == v.size(), "tabulated factor needs >= 2 matching (s, value) pairs");
    for (std::size_t i = 0; i < s.size(); ++i) {
      require(std::isfinite(s[i]) && std::isfinite(v[i]), "tabulated factor contains non-finite entries");
      require(v[i] >= 0.0, "smooth factor g has negative values");
      if (i > 0) require(s[i] > s[i - 1], "tabulated factor abscissae must increase strictly");
    }
    require(s.front() <= 0.0 && s.back() >= 1.0, "tabulated factor must cover [0,1]");
    auto table = std::make_shared<Table>();
    table->s = std::move(s);
    table->v = std::move(v);
    table->slopes = monotone_slopes(table->s, table->v);
    SmoothFactor f;
    f.table_ = std::move(table);
    return f;
  }

  // Table of g(z), z in [-1,1], converted to phi(s) = g(1 - 2s).
  static SmoothFactor from_cosine_table(const std::vector<double>& z, const std::vector<double>& g) {
    require(z.size() == g.size(), "cosine table columns differ in length");
    std::vector<double> s(z.size()), v(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      std::size_t j = z.size() - 1 - i;
      s[i] = 0.5 * (1.0 - z[j]);
      v[i] = g[j];
    }
    return tabulated(std::move(s), std::move(v));
  }

  bool is_constant() const { return !table_; }
  double constant_value() const { return constant_; }

  double operator()(double s) const {
    if (!table_) return constant_;
    const auto& t = *table_;
    s = std::clamp(s, t.s.front(), t.s.back());
    std::size_t k = std::upper_bound(t.s.begin(), t.s.end(), s) - t.s.begin();
    k = std::clamp<std::size_t>(k, 1, t.s.size() - 1) - 1;
    double h = t.s[k + 1] - t.s[k], r = (s - t.s[k]) / h;
    double h00 = (1 + 2 * r) * (1 - r) * (1 - r), h10 = r * (1 - r) * (1 - r);
    double h01 = r * r * (3 - 2 * r), h11 = r * r * (r - 1);
    return std::max(0.0, h00 * t.v[k] + h10 * h * t.slopes[k] + h01 * t.v[k + 1] + h11 * h * t.slopes[k + 1]);
  }

 private:
  struct Table {
    std::vector<double> s, v, slopes;
  };

  static std::vector<double> monotone_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    std::size_t n = x.size();
    std::vector<double> d(n - 1), m(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (d[i - 1] * d[i] <= 0) continue;
      double w1 = 2 * (x[i + 1] - x[i]) + (x[i] - x[i - 1]);
      double w2 = (x[i + 1] - x[i]) + 2 * (x[i] - x[i - 1]);
      m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (d[i] == 0) {
        m[i] = m[i + 1] = 0;
        continue;
      }
      double a = m[i] / d[i], b = m[i + 1] / d[i];
      if (a < 0) m[i] = 0, a = 0;
      if (b < 0) m[i + 1] = 0, b = 0;
      double r = a * a + b * b;
      if (r > 9) {
        double tau = 3 / std::sqrt(r);
        m[i] = tau * a * d[i];
        m[i + 1] = tau * b * d[i];
      }
    }
    return m;
  }

  double constant_ = 1.0;
  std::shared_ptr<const Table> table_;
};

struct AffineMap {
  double intercept = 0.0;
  double slope = 0.0;

  double operator()(double s) const { return intercept + slope * s; }
  // Value at s given both s and 1 - s; avoids cancellation for maps like 1 - s.
  double at(double s, double one_minus_s) const {
    if (intercept != 0.0 && intercept + slope == 0.0) return intercept * one_minus_s;
    return intercept + slope * s;
  }
  double min_on_unit() const { return std::min(intercept, intercept + slope); }
  double max_on_unit() const { return std::max(intercept, intercept + slope); }
  static AffineMap constant(double c) { return {c, 0.0}; }
};

struct Atom {
  double location;
  double weight;
};

// Smooth part density: scale * s^alpha_left (1-s)^alpha_right * factor(s).
struct SmoothPart {
  double alpha_left = 0.0;
  double alpha_right = 0.0;
  SmoothFactor factor = SmoothFactor::constant();
  double scale = 1.0;
};

// Nonnegative measure on [0,1] made of atoms plus a Jacobi-weighted smooth part.
class SKernel {
 public:
  static constexpr int kMassNodes = 256;

  SKernel() = default;

  SKernel(std::vector<Atom> atoms, std::optional<SmoothPart> smooth) : atoms_(std::move(atoms)), smooth_(std::move(smooth)) {
    for (const auto& a : atoms_) {
      require(std::isfinite(a.location) && a.location >= 0.0 && a.location <= 1.0, "atom location must lie in [0,1]");
      require(std::isfinite(a.weight) && a.weight >= 0.0, "atom weight must be nonnegative");
    }
    if (smooth_) {
      require(smooth_->alpha_left > -1.0 && smooth_->alpha_right > -1.0, "kernel endpoint exponents must exceed -1");
      require(std::isfinite(smooth_->scale) && smooth_->scale >= 0.0, "kernel scale must be nonnegative");
    }
    mass_ = atom_mass() + smooth_mass();
    require(std::isfinite(mass_), "kernel mass is not finite");
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::optional<SmoothPart>& smooth() const { return smooth_; }
  double mass() const { return mass_; }
  bool empty() const { return mass_ == 0.0; }

  SKernel scaled(double factor) const {
    require(factor >= 0.0 && std::isfinite(factor), "kernel scale factor must be nonnegative");
    std::vector<Atom> atoms = atoms_;
    for (auto& a : atoms) a.weight *= factor;
    std::optional<SmoothPart> smooth = smooth_;
    if (smooth) smooth->scale *= factor;
    return SKernel(std::move(atoms), std::move(smooth));
  }

  SKernel normalized(double target_mass) const {
    require(mass_ > 0.0, "cannot normalize a kernel with zero mass");
    return scaled(target_mass / mass_);
  }

  // Smooth-part density at s (atoms excluded).
  double density(double s) const {
    if (!smooth_) return 0.0;
    const auto& sp = *smooth_;
    return sp.scale * std::pow(s, sp.alpha_left) * std::pow(1.0 - s, sp.alpha_right) * sp.factor(s);
  }

  // Discrete measure: clustered Gauss-Legendre for the smooth part plus atoms.
  QuadratureRule discretize(int nodes) const {
    QuadratureRule out;
    if (smooth_ && smooth_->scale > 0.0) {
      const auto& sp = *smooth_;
      const QuadratureRule& r = clustered_rule(nodes, sp.alpha_left, sp.alpha_right);
      double total = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) {
        double w = sp.scale * r.weights[i] * sp.factor(r.nodes[i]);
        if (w == 0.0) continue;
        out.nodes.push_back(r.nodes[i]);
        out.complements.push_back(r.complements[i]);
        out.weights.push_back(w);
        total += w;
      }
      // Rescale so the discrete smooth mass equals the cached one exactly.
      double target = mass_ - atom_mass();
      if (total > 0.0)
        for (double& w : out.weights) w *= target / total;
    }
    for (const auto& a : atoms_) {
      if (a.weight == 0.0) continue;
      out.nodes.push_back(a.location);
      out.complements.push_back(1.0 - a.location);
      out.weights.push_back(a.weight);
    }
    return out;
  }

  // Integral of f(s, 1-s) against the kernel.
  template <class F>
  double integrate(F&& f, int nodes) const {
    QuadratureRule r = discretize(nodes);
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) sum += r.weights[i] * f(r.nodes[i], r.complements[i]);
    return sum;
  }

 private:
  double atom_mass() const {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.weight;
    return m;
  }

  double smooth_mass() const {
    if (!smooth_) return 0.0;
    const auto& sp = *smooth_;
    double base = std::exp(log_beta(sp.alpha_left + 1.0, sp.alpha_right + 1.0));
    if (sp.factor.is_constant()) return sp.scale * sp.factor.constant_value() * base;
    const QuadratureRule& r = gauss_jacobi(kMassNodes, sp.alpha_left, sp.alpha_right);
    double m = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) m += r.weights[i] * sp.factor(r.nodes[i]);
    return sp.scale * m;
  }

  std::vector<Atom> atoms_;
  std::optional<SmoothPart> smooth_;
  double mass_ = 0.0;
};

}  // namespace mkm
