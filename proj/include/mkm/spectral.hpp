#pragma once

#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "model.hpp"

namespace mkm {

constexpr int kSpectralNodes = 64;
constexpr double kRootTolerance = 1e-10;
constexpr double kBracketLimit = 256.0;

// lambda(p) = sum_i w_i sum_k a_ik^p over a discretized operator.
class SpectralFunction {
 public:
  SpectralFunction(std::vector<DiscreteTerm> terms, double support_radius, bool linear)
      : terms_(std::move(terms)), support_radius_(support_radius), linear_(linear) {}

  double lambda(double p) const {
    require(std::isfinite(p) && p >= 0.0, "lambda(p) needs p >= 0");
    double sum = 0.0;
    for (const auto& t : terms_) {
      for (std::size_t i = 0; i < t.size(); ++i) {
        double inner = 0.0;
        for (int k = 0; k < t.arity; ++k) inner += std::pow(t.coords[i * t.arity + k], p);
        sum += t.weights[i] * inner;
      }
    }
    return sum;
  }

  double lambda_prime(double p) const {
    require(std::isfinite(p) && p >= 0.0, "lambda'(p) needs p >= 0");
    double sum = 0.0;
    for (const auto& t : terms_) {
      for (std::size_t i = 0; i < t.size(); ++i) {
        double inner = 0.0;
        for (int k = 0; k < t.arity; ++k) {
          double a = t.coords[i * t.arity + k];
          if (a > 0.0) inner += std::pow(a, p) * std::log(a);  // a^p ln a -> 0 at a = 0
        }
        sum += t.weights[i] * inner;
      }
    }
    return sum;
  }

  double mu(double p) const {
    require(std::isfinite(p) && p > 0.0, "mu(p) needs p > 0");
    return (lambda(p) - 1.0) / p;
  }

  double mu_prime(double p) const {
    require(std::isfinite(p) && p > 0.0, "mu'(p) needs p > 0");
    return (p * lambda_prime(p) - (lambda(p) - 1.0)) / (p * p);
  }

  double support_radius() const { return support_radius_; }
  bool is_linear() const { return linear_; }
  const std::vector<DiscreteTerm>& terms() const { return terms_; }

 private:
  std::vector<DiscreteTerm> terms_;
  double support_radius_;
  bool linear_;
};

inline SpectralFunction spectral_function(const InteractionModel& m, int nodes = kSpectralNodes) {
  validate(m);
  return SpectralFunction(discretize(m, nodes), m.support_radius, m.G.empty());
}

inline SpectralFunction spectral_function(const MultilinearOperator& op, int nodes = kSpectralNodes) {
  return SpectralFunction(discretize(op, nodes), op.support_radius, op.is_linear());
}

template <class Model>
double lambda_p(const Model& m, double p, int nodes = kSpectralNodes) {
  return spectral_function(m, nodes).lambda(p);
}
template <class Model>
double lambda_prime(const Model& m, double p, int nodes = kSpectralNodes) {
  return spectral_function(m, nodes).lambda_prime(p);
}
template <class Model>
double mu_p(const Model& m, double p, int nodes = kSpectralNodes) {
  return spectral_function(m, nodes).mu(p);
}
template <class Model>
double mu_prime(const Model& m, double p, int nodes = kSpectralNodes) {
  return spectral_function(m, nodes).mu_prime(p);
}

namespace detail {

template <class F>
double bracketed_root(F f, double lo, double hi, double flo, double fhi) {
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  std::uintmax_t iters = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 0.25 * kRootTolerance; };
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace detail

// Minimizer of mu; p0 == nullopt is the infinite marker (mu decreasing up to
// the bracket limit), in which case mu_at_p0 is the limiting value 0.
struct CriticalPoint {
  std::optional<double> p0;
  double mu_at_p0 = 0.0;
  bool finite() const { return p0.has_value(); }
};

// p_max is the first bracket guess; brackets double up to kBracketLimit.
inline CriticalPoint find_p0(const SpectralFunction& sf, double p_max = 8.0) {
  require(!sf.is_linear(), "find_p0 needs a multilinear model (some arity >= 2 term)");
  require(std::isfinite(p_max) && p_max > 0.0, "p_max must be positive");
  auto dmu = [&](double p) { return sf.mu_prime(p); };
  double hi = std::min(p_max, kBracketLimit), fhi = dmu(hi);
  double lo, flo;
  if (fhi > 0.0) {
    lo = hi;
    flo = fhi;
    while (flo > 0.0) {
      hi = lo;
      fhi = flo;
      lo *= 0.5;
      if (lo < 1e-8) throw ConvergenceError("mu' positive down to p = 1e-8; no bracket for p0");
      flo = dmu(lo);
    }
  } else {
    while (fhi <= 0.0) {
      if (fhi == 0.0) return {hi, sf.mu(hi)};
      if (hi >= kBracketLimit) return {std::nullopt, 0.0};
      lo = hi;
      flo = fhi;
      hi = std::min(2.0 * hi, kBracketLimit);
      fhi = dmu(hi);
    }
  }
  double p0 = detail::bracketed_root(dmu, lo, hi, flo, fhi);
  return {p0, sf.mu(p0)};
}

enum class SpectralClass { a, b, c, d };

inline const char* to_string(SpectralClass c) {
  switch (c) {
    case SpectralClass::a: return "a";
    case SpectralClass::b: return "b";
    case SpectralClass::c: return "c";
    default: return "d";
  }
}

inline SpectralClass classify(const SpectralFunction& sf, const CriticalPoint& cp) {
  require(!sf.is_linear(), "classify needs a multilinear model");
  if (!cp.finite()) return SpectralClass::a;
  if (sf.support_radius() <= 1.0) return SpectralClass::b;
  return cp.mu_at_p0 > 0.0 ? SpectralClass::c : SpectralClass::d;
}

inline SpectralClass classify(const SpectralFunction& sf) { return classify(sf, find_p0(sf)); }

// Maximal root s* > p0 of mu(s) = mu(p); nullopt when mu stays below mu(p)
// up to the bracket limit.
inline std::optional<double> tail_root(const SpectralFunction& sf, double p, const CriticalPoint& cp,
                                       double bound = kBracketLimit) {
  require(std::isfinite(p) && p > 0.0, "tail_root needs p > 0");
  if (!cp.finite()) return std::nullopt;
  require(p < *cp.p0, "tail_root needs p < p0");
  double target = sf.mu(p);
  auto f = [&](double s) { return sf.mu(s) - target; };
  double lo = *cp.p0, flo = f(lo);
  if (flo >= 0.0) return std::nullopt;
  double hi = std::max(2.0 * lo, lo + 1.0), fhi = f(hi);
  while (fhi < 0.0) {
    if (hi >= bound) return std::nullopt;
    lo = hi;
    flo = fhi;
    hi = std::min(2.0 * hi, bound);
    fhi = f(hi);
  }
  return detail::bracketed_root(f, lo, hi, flo, fhi);
}

inline std::optional<double> tail_root(const SpectralFunction& sf, double p, double bound = kBracketLimit) {
  return tail_root(sf, p, find_p0(sf), bound);
}

template <class Model>
CriticalPoint find_p0(const Model& m, double p_max = 8.0) {
  return find_p0(spectral_function(m), p_max);
}
template <class Model>
SpectralClass classify(const Model& m) {
  return classify(spectral_function(m));
}
template <class Model>
std::optional<double> tail_root(const Model& m, double p, double bound = kBracketLimit) {
  return tail_root(spectral_function(m), p, bound);
}

namespace detail {

// y + (1-y) ln(1-y), with the series sum_{k>=2} y^k / (k(k-1)) for small y.
inline double thermostat_term(double y, double one_minus_y) {
  if (y < 0.05) {
    double term = y * y, sum = 0.0;
    for (int k = 2; k < 40; ++k) {
      sum += term / (k * (k - 1.0));
      term *= y;
    }
    return sum;
  }
  if (one_minus_y <= 0.0) return y;
  return y + one_minus_y * std::log(one_minus_y);
}

inline double entropy_term(double s, double c) {
  double r = 0.0;
  if (s > 0.0) r += s * std::log(s);
  if (c > 0.0) r += c * std::log(c);
  return r;
}

}  // namespace detail

// Largest coupling theta for which model B has mu'(1) < 0.
inline double theta_star(int d, const SmoothFactor& g, double mass_ratio, int nodes = 128) {
  require(d >= 2, "theta_star needs d >= 2");
  require(std::isfinite(mass_ratio) && mass_ratio > 0.0, "theta_star needs mass ratio m > 0");
  SKernel G({}, angular_part(d, g));
  require(G.mass() > 0.0, "degenerate g: zero mass");
  double beta = thermostat_beta(mass_ratio);
  double num = -G.integrate([](double s, double c) { return detail::entropy_term(s, c); }, nodes);
  double den = G.integrate(
      [&](double s, double c) {
        double y = beta * s;
        double one_minus_y = (1.0 - beta) + beta * c;
        return detail::thermostat_term(y, one_minus_y);
      },
      nodes);
  require(den > 0.0, "theta_star denominator vanished");
  return num / den;
}

struct SpectralProfile {
  std::vector<double> p_grid;
  std::vector<double> lambda_values;
  std::vector<double> mu_values;
  std::vector<double> mu_prime_values;
  CriticalPoint critical;
  std::optional<SpectralClass> class_tag;
  std::optional<double> s_star_of_1;
  std::vector<std::string> notes;
};

inline SpectralProfile spectral_scan(const SpectralFunction& sf, const std::vector<double>& p_grid) {
  SpectralProfile out;
  for (std::size_t i = 0; i < p_grid.size(); ++i) {
    require(p_grid[i] > 0.0, "p grid must be positive");
    if (i > 0) require(p_grid[i] > p_grid[i - 1], "p grid must increase");
  }
  out.p_grid = p_grid;
  for (double p : p_grid) {
    double lam = sf.lambda(p);
    out.lambda_values.push_back(lam);
    out.mu_values.push_back((lam - 1.0) / p);
    out.mu_prime_values.push_back(sf.mu_prime(p));
  }
  if (sf.is_linear()) {
    out.notes.push_back("linear model: p0 and class undefined");
    return out;
  }
  double hint = p_grid.empty() ? 8.0 : p_grid.back();
  out.critical = find_p0(sf, hint);
  out.class_tag = classify(sf, out.critical);
  if (!out.critical.finite())
    out.notes.push_back("mu decreasing up to p = 256: infinite p0 marker");
  else if (*out.critical.p0 > 1.0)
    out.s_star_of_1 = tail_root(sf, 1.0, out.critical);
  else
    out.notes.push_back("p0 <= 1: tail root of mu(s) = mu(1) not defined");
  return out;
}

}  // namespace mkm
