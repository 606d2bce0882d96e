#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "mkm/cli.hpp"

namespace {

// Flag values kept apart from the config so only flags actually given override it.
template <class T>
struct Flag {
  T value{};
  CLI::Option* opt = nullptr;
  explicit operator bool() const { return opt && opt->count() > 0; }
  const T& operator*() const { return value; }
  const T* operator->() const { return &value; }
  void add(CLI::App* sub, const std::string& name, const std::string& help = "") { opt = sub->add_option(name, value, help); }
};

template <class T>
void apply(const Flag<T>& flag, T& target) {
  if (flag) target = *flag;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maxwell-type kinetic models: spectral analysis, evolution, self-similar profiles"};
  app.set_version_flag("--version", mkm::kVersion);
  app.require_subcommand(1, 1);

  std::string config_path, output;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--output", output, "output directory (overrides config)");
  };

  Flag<double> p_min, p_max, t_end, dt, prof_p, tol, mom_p, v_max;
  Flag<int> steps, snapshot_every, max_iter, s_max, v_points;
  Flag<std::string> u0, input;
  bool skip_acceptance = false;

  auto* spectral = app.add_subcommand("spectral", "lambda, mu, mu' scan and critical point summary");
  common(spectral);
  p_min.add(spectral, "--p-min");
  p_max.add(spectral, "--p-max");
  steps.add(spectral, "--steps");

  auto* evolve = app.add_subcommand("evolve", "time integration of the Fourier-space equation");
  common(evolve);
  t_end.add(evolve, "--t-end");
  dt.add(evolve, "--dt");
  snapshot_every.add(evolve, "--snapshot-every");
  u0.add(evolve, "--u0", "exp | exp_p:<p> | csv:<path>");

  auto* profile = app.add_subcommand("profile", "self-similar profile by fixed-point iteration");
  common(profile);
  prof_p.add(profile, "--p");
  tol.add(profile, "--tol");
  max_iter.add(profile, "--max-iter");

  auto* moments = app.add_subcommand("moments", "moment recursion of the self-similar distribution");
  common(moments);
  s_max.add(moments, "--s-max");
  mom_p.add(moments, "--p");

  auto* reconstruct = app.add_subcommand("reconstruct", "radial inverse Fourier transform to velocity space");
  common(reconstruct);
  input.add(reconstruct, "--input", "csv:<path> with columns x,psi");
  v_max.add(reconstruct, "--v-max");
  v_points.add(reconstruct, "--v-points");

  auto* verify = app.add_subcommand("verify", "invariant suites and acceptance checks");
  common(verify);
  verify->add_flag("--skip-acceptance", skip_acceptance, "run only the suites for the configured model");

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  mkm::ExperimentConfig cfg;
  try {
    cfg = mkm::load_config(config_path);
    if (!output.empty()) cfg.output = output;
    apply(p_min, cfg.spectral.p_min);
    apply(p_max, cfg.spectral.p_max);
    apply(steps, cfg.spectral.steps);
    apply(t_end, cfg.evolve.t_end);
    apply(dt, cfg.evolve.dt);
    apply(snapshot_every, cfg.evolve.snapshot_every);
    if (u0) {
      cfg.evolve.u0 = *u0;
      if (u0->rfind("csv:", 0) == 0) cfg.evolve.u0 = mkm::detail::resolve_csv(*u0, ".", "--u0");
    }
    apply(prof_p, cfg.profile.p);
    apply(tol, cfg.profile.tol);
    apply(max_iter, cfg.profile.max_iter);
    apply(s_max, cfg.moments.s_max);
    apply(mom_p, cfg.moments.p);
    if (input) cfg.reconstruct.input = mkm::detail::resolve_csv(*input, ".", "--input");
    apply(v_max, cfg.reconstruct.v_max);
    apply(v_points, cfg.reconstruct.v_points);
    mkm::require(cfg.spectral.steps >= 2 && cfg.spectral.p_max > cfg.spectral.p_min, "spectral: need steps >= 2, p_max > p_min");
    mkm::require(cfg.evolve.snapshot_every >= 1, "evolve: snapshot-every must be >= 1");
    mkm::require(cfg.profile.tol > 0.0 && cfg.profile.max_iter >= 1, "profile: need tol > 0 and max-iter >= 1");
    mkm::require(cfg.reconstruct.v_max > 0.0 && cfg.reconstruct.v_points >= 2, "reconstruct: need v-max > 0, v-points >= 2");
  } catch (const mkm::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mkm::kExitValidation;
  }
  return mkm::run(command, cfg, skip_acceptance);
}
