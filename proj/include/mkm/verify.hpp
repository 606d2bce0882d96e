#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "config.hpp"
#include "evolution.hpp"
#include "moments.hpp"
#include "selfsimilar.hpp"
#include "spectral.hpp"
#include "transforms.hpp"

namespace mkm {

struct CheckResult {
  std::string id;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

// Collects named sub-checks; the detail string lists failures first.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void note(const std::string& s) { notes_.push_back(s); }
  bool ok() const { return failures_.empty(); }
  std::string detail() const {
    std::string out;
    for (const auto& f : failures_) out += (out.empty() ? "FAILED: " : "; ") + f;
    for (const auto& n : notes_) out += (out.empty() ? "" : "; ") + n;
    return out;
  }

 private:
  std::vector<std::string> failures_, notes_;
};

inline std::string fmt(double v, int prec = 6) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

inline CheckResult timed(const std::string& id, const std::string& name, const std::function<void(Checker&)>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Checker c;
  CheckResult r{id, name};
  try {
    body(c);
    r.passed = c.ok();
    r.detail = c.detail();
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// Convex mixture of Maxwellians: a characteristic function with u(0) = 1.
inline GridFunction random_mixture(const GridPtr& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> W(0.1, 1.0), C(0.3, 3.0);
  std::vector<double> w{W(rng), W(rng), W(rng)}, c{C(rng), C(rng), C(rng)};
  double s = w[0] + w[1] + w[2];
  auto u = GridFunction::sample(g, [&](double x) {
    double v = 0.0;
    for (int k = 0; k < 3; ++k) v += w[k] / s * std::exp(-c[k] * x);
    return v;
  });
  std::vector<double> v = u.values();
  v[0] = 1.0;  // the weights need not sum to 1 in floating point
  return GridFunction(g, std::move(v));
}

inline GridFunction random_unit_ball(const GridPtr& g, std::mt19937_64& rng, int kind) {
  std::uniform_real_distribution<double> U(-1.0, 1.0), R(0.1, 3.0);
  if (kind == 0) {
    std::vector<double> v(g->size());
    for (auto& x : v) x = U(rng);
    return GridFunction(g, v);
  }
  if (kind == 1) return random_mixture(g, rng);
  double c1 = R(rng), c2 = R(rng), w = 0.5 * (U(rng) + 1.0), f = R(rng);
  return GridFunction::sample(
      g, [=](double x) { return w * std::exp(-c1 * x) + (1 - w) * std::exp(-c2 * x * x) * std::cos(f * x); });
}

inline std::vector<InteractionModel> shipped_models() {
  return {make_model_A(3),
          make_model_A(2),
          make_model_B(3, SmoothFactor::constant(), 1.0, 1.0),
          make_model_C(3, 0.5),
          make_atomic_model({{0.5, 1.0}}, AffineMap::constant(0.7), AffineMap::constant(0.7), AffineMap::constant(1.0))};
}

template <class Model>
void operator_suite(Checker& c, const Model& m, const GridPtr& g, std::mt19937_64& rng, int count,
                    const std::string& tag) {
  OperatorPlan plan(m, g);
  auto one = GridFunction::sample(g, [](double) { return 1.0; });
  auto g1 = plan.gamma(one);
  double d1 = 0.0;
  for (double v : g1) d1 = std::max(d1, std::abs(v - 1.0));
  c.expect(d1 <= 1e-13 && g1[0] == 1.0, tag + ": Gamma(1) = 1 (dev " + fmt(d1) + ")");
  double worst_ball = 0.0, worst_gap = 0.0;
  bool zero_ok = true, pos_ok = true;
  GridFunction prev = random_unit_ball(g, rng, 1);
  for (int k = 0; k < count; ++k) {
    GridFunction u = random_unit_ball(g, rng, k % 3);
    for (double v : plan.gamma(u)) worst_ball = std::max(worst_ball, std::abs(v) - 1.0);
    for (double v : plan.lipschitz_gap(u, prev)) worst_gap = std::min(worst_gap, v);
    if (k % 3 == 1) zero_ok = zero_ok && plan.gamma(u)[0] == 1.0;
    auto au = GridFunction::sample(g, [&](double x) { return std::abs(u(x)); });
    for (double v : plan.linear(au)) pos_ok = pos_ok && v >= 0.0;
    prev = u;
  }
  c.expect(worst_ball <= 1e-9, tag + ": unit ball preserved (excess " + fmt(worst_ball) + ")");
  c.expect(worst_gap >= -1e-8, tag + ": L-Lipschitz gap >= -1e-8 (min " + fmt(worst_gap) + ")");
  c.expect(zero_ok, tag + ": Gamma(u)(0) = 1 when u(0) = 1");
  c.expect(pos_ok, tag + ": L positive");
  std::vector<double> xs;
  for (int i = 0; i <= 60; ++i) xs.push_back(std::pow(10.0, -6.0 + i * 0.12));
  auto sf = spectral_function(m);
  double worst_eig = 0.0;
  for (double p : {0.5, 1.0, 2.0, 3.0}) {
    auto lu = apply_L_at(m, [p](double x) { return std::pow(x, p); }, xs);
    for (std::size_t j = 0; j < xs.size(); ++j)
      worst_eig = std::max(worst_eig, std::abs(lu[j] / std::pow(xs[j], p) - sf.lambda(p)));
  }
  c.expect(worst_eig <= 1e-8, tag + ": L x^p = lambda(p) x^p (rel dev " + fmt(worst_eig) + ")");
}

}  // namespace detail

// ---- acceptance criteria ----

inline CheckResult acceptance_ac1() {
  return detail::timed("AC1", "spectral golden values, model A", [](detail::Checker& c) {
    auto t0 = std::chrono::steady_clock::now();
    auto sf = spectral_function(make_model_A(3));
    double worst = 0.0;
    for (double p : {0.5, 1.0, 2.0, 3.0, 5.0}) worst = std::max(worst, std::abs(sf.lambda(p) - 2.0 / (p + 1.0)));
    c.expect(worst <= 1e-10, "lambda(p) = 2/(p+1) (dev " + detail::fmt(worst) + ")");
    c.expect(std::abs(sf.mu(2.0) + 1.0 / 6.0) <= 1e-10, "mu(2) = -1/6");
    c.expect(std::abs(sf.mu(3.0) + 1.0 / 6.0) <= 1e-10, "mu(3) = -1/6");
    auto cp = find_p0(sf);
    c.expect(cp.finite() && std::abs(*cp.p0 - (1.0 + std::sqrt(2.0))) <= 1e-6, "p0 = 1 + sqrt(2)");
    c.expect(classify(sf, cp) == SpectralClass::b, "class b");
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    c.expect(secs < 1.0, "runtime < 1 s");
    if (cp.finite()) c.note("p0 = " + detail::fmt(*cp.p0, 12) + ", " + detail::fmt(secs, 3) + " s");
  });
}

inline CheckResult acceptance_ac2() {
  return detail::timed("AC2", "thermostat threshold theta*", [](detail::Checker& c) {
    double t1 = theta_star(3, SmoothFactor::constant(), 1.0);
    c.expect(std::abs(t1 - 2.0) <= 1e-8, "theta*(m=1) = 2 (got " + detail::fmt(t1, 12) + ")");
    // closed form, beta = 8/9: (1/2) / int_0^1 [y + (1-y) ln(1-y)] ds, y = beta s
    double beta = 8.0 / 9.0, q = 1.0 - beta;
    double oracle = 0.5 / (beta / 2 + (-(q * q * std::log(q)) / 2 + (q * q - 1) / 4) / beta);
    double t2 = theta_star(3, SmoothFactor::constant(), 0.5);
    c.expect(std::abs(t2 - oracle) <= 1e-4, "theta*(m=0.5) matches closed form (got " + detail::fmt(t2, 10) + ")");
    c.expect(std::abs(t2 - 2.7484) <= 1e-4, "theta*(m=0.5) = 2.7484");
  });
}

inline CheckResult acceptance_ac3() {
  return detail::timed("AC3", "model C golden values", [](detail::Checker& c) {
    auto m = make_model_C(3, 0.5);
    auto sf = spectral_function(m);
    c.expect(std::abs(sf.mu(1.0) + 0.1875) <= 1e-10, "mu(1) = -0.1875 (got " + detail::fmt(sf.mu(1.0), 14) + ")");
    auto s = tail_root(sf, 1.0);
    c.expect(s && *s > 4.1 && *s < 4.2, "s* in (4.1, 4.2)");
    auto t = moment_recursion(sf, 6);
    c.expect(std::abs(t.m[2] - 9.0 / 7.0) <= 1e-8, "m2 = 9/7 (got " + detail::fmt(t.m[2], 14) + ")");
    c.expect(t.denominator[5] < 0.0 && !t.finite[5], "D(5) < 0 and m5 infinite");
    if (s) c.note("s* = " + detail::fmt(*s, 10));
  });
}

inline CheckResult acceptance_ac4() {
  return detail::timed("AC4", "stationary Maxwellian and energy conservation", [](detail::Checker& c) {
    auto g = make_grid();
    auto m = make_model_A(3);
    auto e = GridFunction::sample(g, [](double x) { return std::exp(-x); });
    EvolveOptions o;
    o.snapshot_every = 100;
    auto tr = evolve(m, e, 10.0, 0.01, o);
    double drift = 0.0;
    for (const auto& u : tr.snapshots)
      for (std::size_t i = 0; i < u.size(); ++i) drift = std::max(drift, std::abs(u[i] - e[i]));
    c.expect(drift < 1e-6, "sup drift < 1e-6 (got " + detail::fmt(drift) + ")");
    auto u0 = GridFunction::sample(g, [](double x) { return std::exp(-x) * (1 + x / 2); });
    auto tr2 = evolve(m, u0, 10.0, 0.01, o);
    double dev = 0.0;
    for (double s : tr2.slope_at_zero) dev = std::max(dev, std::abs(s - 0.5));
    c.expect(dev <= 1e-4, "-u_x(0,t) = 1/2 within 1e-4 (dev " + detail::fmt(dev) + ")");
    c.note("drift " + detail::fmt(drift) + ", slope dev " + detail::fmt(dev));
  });
}

inline CheckResult acceptance_ac5() {
  return detail::timed("AC5", "profile solver exactness, model A p = 1", [](detail::Checker& c) {
    auto g = make_grid();
    auto prof = solve_profile(make_model_A(3), 1.0, g);
    double err = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) err = std::max(err, std::abs(prof.profile[i] - std::exp(-(*g)[i])));
    c.expect(err < 1e-8, "sup |psi - e^{-x}| < 1e-8 (got " + detail::fmt(err) + ")");
    c.expect(prof.residual < 1e-8, "residual < 1e-8 (got " + detail::fmt(prof.residual) + ")");
    auto rep = check_profile(prof);
    for (const auto& f : rep.failures) c.expect(false, f);
    c.note("iterations " + std::to_string(prof.iterations) + ", slope " + detail::fmt(rep.slope, 10));
  });
}

inline CheckResult acceptance_ac6() {
  return detail::timed("AC6", "self-similar asymptotics, model C", [](detail::Checker& c) {
    auto m = make_model_C(3, 0.5);
    auto sf = spectral_function(m);
    double mu = sf.mu(1.0);
    // u(x e^{-mu t}) at t = 30 reaches x ~ 2770 for x <= 10
    auto big = make_grid({2300, 1e-6, 5000.0});
    auto g = make_grid();
    auto u0 = GridFunction::sample(big, [](double x) { return std::exp(-x); });
    EvolveOptions o;
    o.snapshot_every = 50;
    auto tr = evolve(m, u0, 30.0, 0.01, o);
    auto prof = solve_profile(m, 1.0, g);
    c.expect(prof.converged, "profile converged");
    auto r = rescale(tr.snapshots.back(), mu, 30.0, g);
    double diff = 0.0;
    for (std::size_t i = 0; i < g->size() && (*g)[i] <= 10.0; ++i) diff = std::max(diff, std::abs(r[i] - prof.profile[i]));
    c.expect(diff < 5e-3, "sup_[0,10] |rescaled u - psi| < 5e-3 (got " + detail::fmt(diff) + ")");
    std::vector<double> metric;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
      double f = std::exp(mu * tr.times[i]);
      auto ss = GridFunction::sample(big, [&](double x) { return prof.profile(x * f); });
      metric.push_back(contraction_metric(tr.snapshots[i], ss, 1.5));
    }
    double rate = decay_rate_fit(tr.times, metric);
    double beta = 1.5 * (sf.mu(1.0) - sf.mu(1.5));
    c.expect(std::abs(rate - beta) <= 0.25 * beta,
             "decay rate within 25% of beta(1, 0.5) (rate " + detail::fmt(rate) + ", beta " + detail::fmt(beta) + ")");
    c.note("profile gap " + detail::fmt(diff) + ", rate " + detail::fmt(rate) + " vs beta " + detail::fmt(beta));
  });
}

inline CheckResult acceptance_ac7(std::uint64_t seed) {
  return detail::timed("AC7", "contraction property, random pairs", [seed](detail::Checker& c) {
    auto m = make_model_C(3, 0.5);
    double rate = 1.0 - lambda_p(m, 1.0);
    auto g = make_grid({800, 1e-6, 50.0});
    std::mt19937_64 rng(seed);
    EvolveOptions o;
    o.snapshot_every = 10;
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
      auto u1 = detail::random_mixture(g, rng), u2 = detail::random_mixture(g, rng);
      auto a = evolve(m, u1, 5.0, 0.02, o), b = evolve(m, u2, 5.0, 0.02, o);
      double c0 = contraction_metric(u1, u2, 1.0);
      for (std::size_t i = 0; i < a.times.size(); ++i) {
        double ci = contraction_metric(a.snapshots[i], b.snapshots[i], 1.0);
        worst = std::max(worst, ci / (c0 * std::exp(-a.times[i] * rate)));
      }
    }
    c.expect(worst <= 1.25, "metric <= initial * e^{-t(1-lambda(1))} * 1.25 (worst ratio " + detail::fmt(worst) + ")");
    c.note("worst ratio " + detail::fmt(worst));
  });
}

inline CheckResult acceptance_ac8(std::uint64_t seed) {
  return detail::timed("AC8", "operator property suite", [seed](detail::Checker& c) {
    auto g = make_grid({400, 1e-6, 50.0});
    std::mt19937_64 rng(seed);
    auto models = detail::shipped_models();
    // 100 random functions spread over the shipped models
    for (std::size_t k = 0; k < models.size(); ++k)
      detail::operator_suite(c, models[k], g, rng, 100 / static_cast<int>(models.size()), "model " + std::to_string(k));
    // grid eigen-check: x^2 samples on [0, 10] give (2/3) x^2 for model A
    auto g10 = make_grid({1600, 1e-6, 10.0});
    auto x2 = GridFunction::sample(g10, [](double x) { return x * x; });
    auto l2 = apply_L(make_model_A(3), x2);
    double dev = 0.0;
    for (std::size_t i = 1; i < g10->size(); ++i) dev = std::max(dev, std::abs(l2[i] / x2[i] - 2.0 / 3.0));
    c.expect(dev <= 1e-8, "grid eigen-check x^2 (rel dev " + detail::fmt(dev) + ")");
  });
}

inline CheckResult acceptance_ac9() {
  return detail::timed("AC9", "radial reconstruction", [](detail::Checker& c) {
    auto psi = [](double x) { return std::exp(-x); };
    auto v = uniform_grid(6.0, 121);
    auto rd = radial_inverse_fourier_3d(psi, v);
    double err = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) err = std::max(err, std::abs(rd.density[i] - maxwellian_density_3d(v[i])));
    c.expect(err <= 1e-6, "Maxwellian pointwise on [0, 6] (err " + detail::fmt(err) + ")");
    auto wide = radial_inverse_fourier_3d(psi, uniform_grid(12.0, 241));
    c.expect(std::abs(wide.mass - 1.0) <= 1e-4, "mass within 1e-4 (got " + detail::fmt(wide.mass, 10) + ")");
    auto prof = solve_profile(make_model_C(3, 0.5), 1.0, make_grid());
    auto rc = radial_inverse_fourier_3d(prof.profile, uniform_grid(15.0, 151));
    c.expect(rc.min_density() >= -1e-6, "model C density >= -1e-6 (min " + detail::fmt(rc.min_density()) + ")");
    c.note("max err " + detail::fmt(err) + ", model C min density " + detail::fmt(rc.min_density()));
  });
}

inline CheckResult acceptance_ac10() {
  return detail::timed("AC10", "1-d Laplace-mode smoke test", [](detail::Checker& c) {
    auto one = AffineMap::constant(1.0);
    auto mc = make_atomic_model({{0.5, 1.0}}, AffineMap::constant(1.2), AffineMap::constant(0.4), one);
    auto sc = spectral_function(mc);
    auto cpc = find_p0(sc);
    c.expect(classify(sc, cpc) == SpectralClass::c, "maps (1.2, 0.4): class c");
    c.expect(cpc.finite() && cpc.mu_at_p0 > 0.0, "maps (1.2, 0.4): mu(p0) > 0");
    auto ma = make_atomic_model({{0.5, 1.0}}, AffineMap::constant(1.0), AffineMap::constant(0.5), one);
    auto sa = spectral_function(ma);
    auto cpa = find_p0(sa);
    c.expect(classify(sa, cpa) == SpectralClass::a, "maps (1.0, 0.5): class a");
    c.expect(!cpa.finite(), "maps (1.0, 0.5): p0 infinite marker");
  });
}

inline std::vector<CheckResult> run_acceptance(std::uint64_t seed,
                                               const std::function<void(const CheckResult&)>& on_result = {}) {
  std::vector<std::function<CheckResult()>> checks = {
      acceptance_ac1, acceptance_ac2, acceptance_ac3, acceptance_ac4, acceptance_ac5, acceptance_ac6,
      [seed] { return acceptance_ac7(seed); }, [seed] { return acceptance_ac8(seed); }, acceptance_ac9,
      acceptance_ac10};
  std::vector<CheckResult> out;
  for (auto& f : checks) {
    out.push_back(f());
    if (on_result) on_result(out.back());
  }
  return out;
}

// ---- invariant suites for a configured model ----

inline std::vector<CheckResult> model_suites(const AnyModel& any, const GridSpec& spec, std::uint64_t seed) {
  std::vector<CheckResult> out;
  const InteractionModel* im = std::get_if<InteractionModel>(&any);
  MultilinearOperator op = im ? to_multilinear(*im) : std::get<MultilinearOperator>(any);
  SpectralFunction sf = std::visit([](const auto& m) { return spectral_function(m); }, any);

  out.push_back(detail::timed("model", "normalization and support", [&](detail::Checker& c) {
    double alpha = 0.0, lam0 = 0.0;
    for (const auto& t : op.terms) {
      alpha += t.weight;
      lam0 += t.arity * t.weight;
    }
    c.expect(std::abs(alpha - 1.0) <= 1e-12, "sum alpha_n = 1");
    c.expect(std::abs(sf.lambda(0.0) - lam0) <= 1e-12, "lambda(0) = sum n alpha_n");
    if (im) {
      c.expect(std::abs(im->G.mass() + im->H.mass() - 1.0) <= 1e-12, "mass(G) + mass(H) = 1");
      double lo = 0.0, hi = 0.0;
      for (int i = 0; i <= 1000; ++i) {
        double s = i / 1000.0;
        for (const AffineMap* mp : {&im->a, &im->b, &im->c}) {
          lo = std::min(lo, mp->at(s, 1.0 - s));
          hi = std::max(hi, mp->at(s, 1.0 - s));
        }
      }
      c.expect(lo >= 0.0, "maps nonnegative on [0,1]");
      if (im->kind != ModelKind::atomic) c.expect(hi <= 1.0 + 1e-15, "maps within [0,1] for named models");
      auto sf2 = spectral_function(op);
      double dev = 0.0;
      for (double p : {0.5, 1.0, 2.0, 3.0}) dev = std::max(dev, std::abs(sf.lambda(p) - sf2.lambda(p)));
      c.expect(dev <= 1e-10, "lambda round trip through the multilinear form (dev " + detail::fmt(dev) + ")");
    }
  }));

  out.push_back(detail::timed("spectral", "convexity and mu definition", [&](detail::Checker& c) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> P(1e-3, 8.0);
    for (int i = 0; i < 200; ++i) {
      double p = P(rng), q = P(rng);
      c.expect(sf.lambda(0.5 * (p + q)) <= 0.5 * (sf.lambda(p) + sf.lambda(q)) + 1e-10,
               "lambda convex at " + detail::fmt(p) + ", " + detail::fmt(q));
      c.expect(std::abs(p * sf.mu(p) + 1.0 - sf.lambda(p)) <= 1e-14 * std::max(1.0, sf.lambda(p)), "p mu(p) + 1 = lambda(p)");
      if (!c.ok()) break;
    }
    if (!sf.is_linear()) {
      auto cp = find_p0(sf);
      c.note("class " + std::string(to_string(classify(sf, cp))) + (cp.finite() ? ", p0 = " + detail::fmt(*cp.p0) : ", p0 infinite"));
    }
  }));

  out.push_back(detail::timed("operators", "unit ball, Lipschitz and eigenfunctions", [&](detail::Checker& c) {
    std::mt19937_64 rng(seed + 1);
    auto g = make_grid({400, 1e-6, 50.0});
    std::visit([&](const auto& m) { detail::operator_suite(c, m, g, rng, 30, "configured model"); }, any);
  }));

  out.push_back(detail::timed("evolution", "trajectory invariants and contraction", [&](detail::Checker& c) {
    std::mt19937_64 rng(seed + 2);
    auto g = make_grid({400, 1e-6, 50.0});
    auto u1 = detail::random_mixture(g, rng), u2 = detail::random_mixture(g, rng);
    double rate = 1.0 - sf.lambda(1.0);
    std::visit(
        [&](const auto& m) {
          auto a = evolve(m, u1, 2.0, 0.02, {10});
          auto b = evolve(m, u2, 2.0, 0.02, {10});
          for (std::size_t i = 0; i < a.sup_norm.size(); ++i) {
            c.expect(a.sup_norm[i] <= 1.0 + 1e-12, "unit ball along the trajectory");
            c.expect(a.value_at_zero[i] == 1.0, "u(0, t) = 1");
            if (!c.ok()) return;
          }
          double c0 = contraction_metric(u1, u2, 1.0);
          for (std::size_t i = 0; i < a.times.size(); ++i)
            c.expect(contraction_metric(a.snapshots[i], b.snapshots[i], 1.0) <= c0 * std::exp(-a.times[i] * rate) * 1.25,
                     "contraction bound at t = " + detail::fmt(a.times[i]));
        },
        any);
  }));

  bool profile_ok = !sf.is_linear();
  std::string why = "linear model";
  if (profile_ok) {
    auto cp = find_p0(sf);
    profile_ok = !cp.finite() || *cp.p0 > 1.0;
    why = "p0 <= 1";
    if (profile_ok && im && im->mode == TransformMode::laplace) {
      profile_ok = false;
      why = "Laplace-mode model";
    }
    if (profile_ok && sf.mu(1.0) <= -1.0) {
      profile_ok = false;
      why = "mu(1) <= -1";
    }
  }
  if (!profile_ok) {
    CheckResult skip{"profile", "self-similar profile (p = 1)", true, "not applicable: " + why, 0.0};
    out.push_back(skip);
    return out;
  }

  // A tail exponent s* close to the small-x order puts an x^{s*} term next to
  // the leading one; local order and finite-difference moment estimates then
  // do not resolve the asymptotics on the grid.
  std::optional<double> s_star = tail_root(sf, 1.0);
  bool heavy = s_star && *s_star < 3.0;
  std::string heavy_note = heavy ? "s* = " + detail::fmt(*s_star) : "";

  SelfSimilarProfile prof;
  out.push_back(detail::timed("profile", "self-similar profile (p = 1)", [&](detail::Checker& c) {
    auto g = make_grid(spec);
    std::visit([&](const auto& m) { prof = solve_profile(m, 1.0, g); }, any);
    c.expect(prof.converged, "Picard iteration converged (residual " + detail::fmt(prof.residual) + ")");
    auto rep = check_profile(prof);
    for (const auto& f : rep.failures) {
      if (!rep.order && f.find("small-x order") != std::string::npos && heavy)
        c.note("small-x order " + detail::fmt(rep.order_estimate, 3) + " inconclusive (" + heavy_note + ")");
      else
        c.expect(false, f);
    }
    // slow contraction near s*: probe both starts well below the gap threshold
    ProfileOptions o;
    o.tol = 1e-11;
    o.max_iter = 2000;
    SelfSimilarProfile a, b;
    std::visit([&](const auto& m) {
      a = solve_profile(m, 1.0, g, o);
      b = solve_profile(m, 1.0, ramp_start(g, 1.0), o);
    }, any);
    double d = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) d = std::max(d, std::abs(a.profile[i] - b.profile[i]));
    c.expect(d <= 1e-8, "uniqueness probe (gap " + detail::fmt(d) + ")");
    c.note("iterations " + std::to_string(prof.iterations) + ", w'(0) " + detail::fmt(rep.slope, 10) + ", probe gap " +
           detail::fmt(d, 3));
  }));

  out.push_back(detail::timed("moments", "moment recursion", [&](detail::Checker& c) {
    auto t = moment_recursion(sf, 6);
    c.expect(t.m[0] == 1.0 && t.m[1] == 1.0, "m0 = m1 = 1");
    for (std::size_t i = 2; i < t.s.size(); ++i) {
      double s = t.s[i];
      c.expect(std::abs(t.denominator[i] - s * (sf.mu(1.0) - sf.mu(s))) <= 1e-12, "D(s) = s (mu(1) - mu(s))");
      if (t.finite[i] && std::isfinite(t.m[i])) c.expect(t.m[i] > 0.0, "finite moments positive");
    }
    if (heavy) {
      c.note("profile m2 cross-check skipped (" + heavy_note + ")");
    } else if (prof.converged && t.finite[2]) {
      double est = profile_moment_check(prof, 2);
      c.expect(std::abs(est - t.m[2]) <= 0.02 * t.m[2],
               "profile m2 estimate " + detail::fmt(est) + " vs recursion " + detail::fmt(t.m[2]));
    }
  }));

  if (im && im->dimension == 3 && prof.converged) {
    out.push_back(detail::timed("transforms", "velocity distribution of the profile", [&](detail::Checker& c) {
      auto rd = radial_inverse_fourier_3d(prof.profile, uniform_grid(20.0, 201));
      c.expect(rd.min_density() >= -1e-6, "density >= -1e-6 (min " + detail::fmt(rd.min_density()) + ")");
      if (heavy)
        c.note("mass " + detail::fmt(rd.mass, 10) + " not checked, power tail beyond v = 20 (" + heavy_note + ")");
      else
        c.expect(std::abs(rd.mass - 1.0) <= 1e-4, "mass within 1e-4 (got " + detail::fmt(rd.mass, 10) + ")");
    }));
  }
  return out;
}

}  // namespace mkm
