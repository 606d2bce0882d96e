#pragma once

#include <Eigen/Core>
#include <boost/version.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <variant>
#include <vector>

#include "config.hpp"
#include "evolution.hpp"
#include "moments.hpp"
#include "selfsimilar.hpp"
#include "spectral.hpp"
#include "transforms.hpp"
#include "verify.hpp"

namespace mkm {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitValidation = 2, kExitNoConvergence = 3 };

namespace cli {

using json = nlohmann::json;

class Csv {
 public:
  Csv(const std::filesystem::path& path, const std::string& header) : out_(path) {
    require(static_cast<bool>(out_), "cannot open output file: " + path.string());
    out_ << header << "\n" << std::setprecision(17);
  }
  template <class... T>
  void row(const T&... v) {
    bool first = true;
    ((out_ << (first ? "" : ",") << v, first = false), ...);
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

// JSON has no infinity; non-finite values become strings.
inline json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

inline json effective_config(const ExperimentConfig& c) {
  return {{"grid", {{"m", c.grid.points}, {"x_min", c.grid.x_min}, {"x_max", c.grid.x_max}}},
          {"quad", {{"nodes", c.quad_nodes}}},
          {"spectral", {{"p_min", c.spectral.p_min}, {"p_max", c.spectral.p_max}, {"steps", c.spectral.steps}}},
          {"evolve",
           {{"t_end", c.evolve.t_end}, {"dt", c.evolve.dt}, {"snapshot_every", c.evolve.snapshot_every}, {"u0", c.evolve.u0}}},
          {"profile", {{"p", c.profile.p}, {"tol", c.profile.tol}, {"max_iter", c.profile.max_iter}}},
          {"moments", {{"s_max", c.moments.s_max}, {"p", c.moments.p}}},
          {"reconstruct", {{"v_max", c.reconstruct.v_max}, {"v_points", c.reconstruct.v_points}, {"input", c.reconstruct.input}}},
          {"output", c.output},
          {"seed", c.seed}};
}

inline json versions() {
  return {{"mkm", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"compiler", __VERSION__}};
}

inline void write_summary(const std::filesystem::path& dir, const std::string& command, const ExperimentConfig& c,
                          const json& results, double seconds) {
  json s = {{"command", command},
            {"versions", versions()},
            {"inputs", {{"config", c.source}, {"effective", effective_config(c)}}},
            {"results", results},
            {"timings", {{"total_seconds", seconds}}}};
  std::ofstream out(dir / (command + "_summary.json"));
  require(static_cast<bool>(out), "cannot write summary in " + dir.string());
  out << s.dump(2) << "\n";
}

inline GridFunction initial_data(const std::string& spec, const GridPtr& g) {
  if (spec == "exp") return GridFunction::sample(g, [](double x) { return std::exp(-x); });
  if (spec.rfind("exp_p:", 0) == 0) {
    double p = 0.0;
    try {
      p = std::stod(spec.substr(6));
    } catch (const std::exception&) {
      throw ValidationError("u0: cannot parse exponent in " + spec);
    }
    require(p > 0.0 && p <= 2.0, "u0: exp_p exponent must lie in (0, 2]");
    return GridFunction::sample(g, [p](double x) { return std::exp(-std::pow(x, p)); });
  }
  if (spec.rfind("csv:", 0) == 0) {
    auto data = read_csv(spec.substr(4));
    return GridFunction::sample(g, [&](double x) { return data(x); });
  }
  throw ValidationError("u0 must be exp, exp_p:<p> or csv:<path>, got " + spec);
}

template <class Model>
int spectral_cmd(const Model& m, const ExperimentConfig& c, const std::filesystem::path& dir, json& res) {
  auto sf = spectral_function(m);
  std::vector<double> ps;
  for (int i = 0; i < c.spectral.steps; ++i)
    ps.push_back(c.spectral.p_min + (c.spectral.p_max - c.spectral.p_min) * i / (c.spectral.steps - 1));
  auto sp = spectral_scan(sf, ps);
  Csv csv(dir / "spectral.csv", "p,lambda,mu,mu_prime");
  for (std::size_t i = 0; i < ps.size(); ++i) csv.row(ps[i], sp.lambda_values[i], sp.mu_values[i], sp.mu_prime_values[i]);
  res["p0"] = sp.critical.p0 ? json(*sp.critical.p0) : json("inf");
  res["mu_p0"] = num(sp.critical.mu_at_p0);
  res["class"] = sp.class_tag ? json(to_string(*sp.class_tag)) : json(nullptr);
  res["s_star_of_1"] = sp.s_star_of_1 ? json(*sp.s_star_of_1) : json(nullptr);
  res["notes"] = sp.notes;
  return kExitOk;
}

template <class Model>
int evolve_cmd(const Model& m, const ExperimentConfig& c, const std::filesystem::path& dir, json& res) {
  auto g = make_grid(c.grid);
  auto u0 = initial_data(c.evolve.u0, g);
  EvolveOptions o;
  o.snapshot_every = c.evolve.snapshot_every;
  o.quad_nodes = c.quad_nodes;
  auto tr = evolve(m, u0, c.evolve.t_end, c.evolve.dt, o);
  Csv csv(dir / "evolve.csv", "t,x,u");
  for (std::size_t k = 0; k < tr.times.size(); ++k)
    for (std::size_t i = 0; i < g->size(); ++i) csv.row(tr.times[k], (*g)[i], tr.snapshots[k][i]);
  Csv diag(dir / "evolve_diagnostics.csv", "t,sup_norm,u_at_0,minus_u_x_at_0");
  for (std::size_t k = 0; k < tr.step_times.size(); ++k)
    diag.row(tr.step_times[k], tr.sup_norm[k], tr.value_at_zero[k], tr.slope_at_zero[k]);
  res["steps"] = tr.step_times.size() - 1;
  res["snapshots"] = tr.times.size();
  res["final_sup_norm"] = tr.sup_norm.back();
  res["final_minus_u_x_at_0"] = tr.slope_at_zero.back();
  return kExitOk;
}

template <class Model>
int profile_cmd(const Model& m, const ExperimentConfig& c, const std::filesystem::path& dir, json& res) {
  ProfileOptions o;
  o.tol = c.profile.tol;
  o.max_iter = c.profile.max_iter;
  o.quad_nodes = c.quad_nodes;
  auto prof = solve_profile(m, c.profile.p, make_grid(c.grid), o);
  write_csv(prof.profile, (dir / "profile.csv").string(), "psi");
  auto rep = check_profile(prof);
  res["p"] = prof.p;
  res["mu_star"] = prof.mu_star;
  res["iterations"] = prof.iterations;
  res["residual"] = num(prof.residual);
  res["converged"] = prof.converged;
  res["convergence_rate"] = num(prof.convergence_rate);
  res["checks"] = {{"all_passed", rep.all_passed()}, {"slope_at_0", rep.slope}, {"order_estimate", num(rep.order_estimate)},
                   {"expected_order", num(rep.expected_order)}, {"failures", rep.failures}};
  if (!prof.converged) {
    std::cerr << "profile: no convergence after " << prof.iterations << " iterations (residual " << prof.residual << ")\n";
    return kExitNoConvergence;
  }
  return kExitOk;
}

template <class Model>
int moments_cmd(const Model& m, const ExperimentConfig& c, const std::filesystem::path& dir, json& res) {
  require(c.moments.s_max >= 2, "moments: s_max must be >= 2");
  auto sf = spectral_function(m);
  auto t = moment_recursion(sf, c.moments.s_max, c.moments.p);
  Csv csv(dir / "moments.csv", "s,m_s,finite,denominator");
  for (std::size_t i = 0; i < t.s.size(); ++i) csv.row(t.s[i], t.m[i], t.finite[i] ? 1 : 0, t.denominator[i]);
  res["p"] = t.p;
  res["s_star"] = t.s_star ? json(*t.s_star) : json(nullptr);
  res["notes"] = t.notes;
  if (!sf.is_linear()) {
    auto tr = tail_classification(sf, c.moments.p);
    res["tail"] = tr.message;
  }
  return kExitOk;
}

inline int reconstruct_cmd(const AnyModel& m, const ExperimentConfig& c, const std::filesystem::path& dir, json& res) {
  TransformOptions o;
  if (const auto* im = std::get_if<InteractionModel>(&m)) o.dimension = im->dimension;
  auto v = uniform_grid(c.reconstruct.v_max, c.reconstruct.v_points);
  RadialDistribution rd;
  if (!c.reconstruct.input.empty()) {
    rd = radial_inverse_fourier_3d(read_csv(c.reconstruct.input.substr(4)), v, o);
    res["source"] = c.reconstruct.input;
  } else {
    ProfileOptions po;
    po.tol = c.profile.tol;
    po.max_iter = c.profile.max_iter;
    po.quad_nodes = c.quad_nodes;
    auto prof = std::visit([&](const auto& mm) { return solve_profile(mm, c.profile.p, make_grid(c.grid), po); }, m);
    if (!prof.converged) {
      std::cerr << "reconstruct: profile solve did not converge (residual " << prof.residual << ")\n";
      return kExitNoConvergence;
    }
    rd = radial_inverse_fourier_3d(prof.profile, v, o);
    res["source"] = "profile p = " + std::to_string(c.profile.p);
  }
  Csv csv(dir / "reconstruct.csv", "v,F");
  for (std::size_t i = 0; i < v.size(); ++i) csv.row(v[i], rd.density[i]);
  res["mass"] = rd.mass;
  res["second_moment"] = rd.second_moment;
  res["min_density"] = rd.min_density();
  return kExitOk;
}

inline json to_json(const CheckResult& r) {
  return {{"id", r.id}, {"name", r.name}, {"passed", r.passed}, {"detail", r.detail}, {"seconds", r.seconds}};
}

inline void print(const CheckResult& r) {
  std::cout << (r.passed ? "PASS " : "FAIL ") << r.id << " " << r.name << " (" << std::fixed << std::setprecision(2)
            << r.seconds << " s)" << std::defaultfloat << (r.detail.empty() ? "" : ": " + r.detail) << std::endl;
}

inline int verify_cmd(const AnyModel& m, const ExperimentConfig& c, const std::filesystem::path& dir, json& res,
                      bool skip_acceptance) {
  std::vector<CheckResult> all = model_suites(m, c.grid, c.seed);
  for (const auto& r : all) print(r);
  if (!skip_acceptance) {
    auto acc = run_acceptance(c.seed, print);
    all.insert(all.end(), acc.begin(), acc.end());
  }
  Csv csv(dir / "verify.csv", "id,passed,seconds");
  bool ok = true;
  res["checks"] = json::array();
  for (const auto& r : all) {
    csv.row(r.id, r.passed ? 1 : 0, r.seconds);
    res["checks"].push_back(to_json(r));
    ok = ok && r.passed;
  }
  res["all_passed"] = ok;
  std::cout << (ok ? "verify: all checks passed" : "verify: some checks FAILED") << std::endl;
  return ok ? kExitOk : kExitCheckFailed;
}

}  // namespace cli

// Runs one command; exit 0 success, 1 failed checks (verify), 2 invalid input, 3 no convergence.
inline int run(const std::string& command, const ExperimentConfig& config, bool skip_acceptance = false) {
  auto t0 = std::chrono::steady_clock::now();
  try {
    require(command == "spectral" || command == "evolve" || command == "profile" || command == "moments" ||
                command == "reconstruct" || command == "verify",
            "unknown command " + command);
    AnyModel model = build_model(config.model);
    std::filesystem::path dir(config.output);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    require(!ec, "cannot create output directory " + dir.string() + ": " + ec.message());
    nlohmann::json res = nlohmann::json::object();
    int code = kExitOk;
    if (command == "verify") {
      code = cli::verify_cmd(model, config, dir, res, skip_acceptance);
    } else {
      code = std::visit(
          [&](const auto& m) {
            if (command == "spectral") return cli::spectral_cmd(m, config, dir, res);
            if (command == "evolve") return cli::evolve_cmd(m, config, dir, res);
            if (command == "profile") return cli::profile_cmd(m, config, dir, res);
            if (command == "moments") return cli::moments_cmd(m, config, dir, res);
            return cli::reconstruct_cmd(model, config, dir, res);
          },
          model);
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res["exit_code"] = code;
    cli::write_summary(dir, command, config, res, secs);
    return code;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoConvergence;
  }
}

}  // namespace mkm
