#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "selfsimilar.hpp"
#include "spectral.hpp"

namespace mkm {

constexpr double kDenominatorTolerance = 1e-10;

struct MomentTable {
  double p = 1.0;
  std::vector<int> s;  // 0..s_max; entries 0 and 1 are the normalization m = 1
  std::vector<double> m;
  std::vector<bool> finite;
  std::vector<double> denominator;  // D(s) = s mu~(1) - lambda~(s) + 1
  std::vector<double> numerator;    // sum_n alpha_n I_n(s)
  std::optional<double> s_star;     // reduced variable
  std::vector<std::string> notes;
};

namespace detail {

// Sum over weak compositions j of s into y.size() parts with at least two
// nonzero parts of s!/prod j_k! * prod y_k^{j_k} m_{j_k}.  This is the
// expansion of (sum y_k)^s - sum y_k^s with each tau^j replaced by m_j.
inline double multinomial_moment_sum(const std::vector<double>& y, int s, const std::vector<double>& m,
                                     const std::vector<double>& log_fact) {
  int n = static_cast<int>(y.size());
  double total = 0.0;
  std::vector<int> parts(n, 0);
  std::function<void(int, int, double, int)> rec = [&](int k, int left, double acc, int nonzero) {
    if (k == n - 1) {
      int j = left;
      int nz = nonzero + (j > 0 ? 1 : 0);
      if (nz < 2) return;
      double term = acc * m[j] * std::exp(-log_fact[j]);
      if (j > 0) term *= std::pow(y[k], j);
      total += term;
      return;
    }
    for (int j = 0; j <= left; ++j) {
      if (j > 0 && y[k] == 0.0) break;
      double a = acc * m[j] * std::exp(-log_fact[j]);
      if (j > 0) a *= std::pow(y[k], j);
      rec(k + 1, left - j, a, nonzero + (j > 0 ? 1 : 0));
    }
  };
  rec(0, s, std::exp(log_fact[s]), 0);
  return total;
}

}  // namespace detail

// Moments m_s = int tau^s R(tau) of the representing measure of the profile
// with tail order p, via (s mu~(1) - lambda~(s) + 1) m_s = sum alpha_n I_n(s)
// for the reduced model (maps raised to the power p).
inline MomentTable moment_recursion(const SpectralFunction& sf, int s_max, double p = 1.0) {
  require(s_max >= 2, "moment recursion needs s_max >= 2");
  require(s_max <= 150, "moment recursion supports s_max <= 150");
  require(std::isfinite(p) && p > 0.0 && p <= 1.0, "moment recursion needs p in (0,1]");
  MomentTable t;
  t.p = p;
  std::vector<double> log_fact(s_max + 1, 0.0);
  for (int k = 2; k <= s_max; ++k) log_fact[k] = log_fact[k - 1] + std::log(double(k));

  double mu1 = sf.lambda(p) - 1.0;  // mu~(1) = p mu(p)
  std::vector<double> m(s_max + 1, 1.0);
  t.s = {0, 1};
  t.m = {1.0, 1.0};
  t.finite = {true, true};
  t.denominator = {std::numeric_limits<double>::quiet_NaN(), 0.0};
  t.numerator = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  bool diverged = false;
  for (int s = 2; s <= s_max; ++s) {
    double D = s * mu1 - sf.lambda(p * s) + 1.0;
    double I = 0.0;
    if (!diverged) {
      for (const auto& term : sf.terms()) {
        if (term.arity < 2) continue;
        std::vector<double> y(term.arity);
        for (std::size_t i = 0; i < term.size(); ++i) {
          for (int k = 0; k < term.arity; ++k) y[k] = std::pow(term.coords[i * term.arity + k], p);
          I += term.weights[i] * detail::multinomial_moment_sum(y, s, m, log_fact);
        }
      }
    }
    t.s.push_back(s);
    t.denominator.push_back(D);
    bool fin = false;
    double value = std::numeric_limits<double>::infinity();
    if (diverged) {
      I = std::numeric_limits<double>::quiet_NaN();
    } else if (D > kDenominatorTolerance) {
      fin = true;
      value = I / D;
    } else if (std::abs(D) <= kDenominatorTolerance && std::abs(I) <= 1e-14) {
      fin = true;
      value = std::numeric_limits<double>::quiet_NaN();
      t.notes.push_back("s = " + std::to_string(s) + ": D(s) ~ 0 and I(s) vanishes; m_s undetermined");
    } else {
      diverged = true;
      if (std::abs(D) <= kDenominatorTolerance)
        t.notes.push_back("s = " + std::to_string(s) + ": borderline D(s) ~ 0 with nonvanishing I(s); infinite");
    }
    t.numerator.push_back(I);
    t.finite.push_back(fin);
    t.m.push_back(value);
    if (fin && std::isfinite(value)) m[s] = value;
  }
  if (!sf.is_linear()) {
    CriticalPoint cp = find_p0(sf);
    if (cp.finite() && p < *cp.p0) {
      auto root = tail_root(sf, p, cp);
      if (root) t.s_star = *root / p;
    }
  }
  return t;
}

template <class Model>
MomentTable moment_recursion(const Model& model, int s_max, double p = 1.0, int nodes = kSpectralNodes) {
  return moment_recursion(spectral_function(model, nodes), s_max, p);
}

struct TailReport {
  double p = 1.0;
  enum class Kind { all_finite, finite_below_s_star, finite_below_p } kind = Kind::all_finite;
  std::optional<double> bound;
  std::string message;
};

inline TailReport tail_classification(const SpectralFunction& sf, double p) {
  require(std::isfinite(p) && p > 0.0, "tail classification needs p > 0");
  require(p <= 1.0, "tail classification needs p <= 1");
  TailReport r;
  r.p = p;
  if (p < 1.0) {
    r.kind = TailReport::Kind::finite_below_p;
    r.bound = p;
    r.message = "moments finite only for s < p";
    return r;
  }
  require(!sf.is_linear(), "tail classification needs a multilinear model");
  CriticalPoint cp = find_p0(sf);
  require(!cp.finite() || *cp.p0 > 1.0, "tail classification at p = 1 needs p0 > 1");
  auto root = tail_root(sf, 1.0, cp);
  if (!root) {
    r.kind = TailReport::Kind::all_finite;
    r.message = "all moments finite";
  } else {
    r.kind = TailReport::Kind::finite_below_s_star;
    r.bound = *root;
    r.message = "moments finite for s < s*";
  }
  return r;
}

template <class Model>
TailReport tail_classification(const Model& model, double p) {
  return tail_classification(spectral_function(model), p);
}

// (-1)^s w^{(s)}(0) for the reduced profile w(y) = psi(y^{1/p}) by forward
// differences at steps h, h/2, h/4 and two Richardson levels.
inline double profile_moment_check(const SelfSimilarProfile& prof, int s, double h = 0.1) {
  require(s == 2 || s == 3, "profile moment check supports s in {2, 3} only");
  require(h > 0.0, "profile moment step must be positive");
  const GridFunction& w = prof.reduced;
  double hmin = h / 4.0;
  const auto& y = w.nodes();
  std::size_t resolving = 0;
  for (std::size_t i = 1; i < y.size(); ++i)
    if (y[i] <= hmin) ++resolving;
  require(resolving >= 8, "profile moment check: grid too coarse near 0 for the difference stencil");
  require(w.grid()->x_max() >= s * h, "profile moment check: grid too short for the stencil");
  auto diff = [&](double step) {
    double sum = 0.0;
    for (int j = 0; j <= s; ++j) {
      double c = std::tgamma(s + 1.0) / (std::tgamma(j + 1.0) * std::tgamma(s - j + 1.0));
      sum += ((s - j) % 2 == 0 ? 1.0 : -1.0) * c * w(j * step);
    }
    return sum / std::pow(step, s);
  };
  double d0 = diff(h), d1 = diff(h / 2), d2 = diff(h / 4);
  double r0 = 2 * d1 - d0, r1 = 2 * d2 - d1;
  double r = (4 * r1 - r0) / 3;
  return (s % 2 == 0 ? 1.0 : -1.0) * r;
}

}  // namespace mkm
