#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "grid.hpp"
#include "model.hpp"
#include "operators.hpp"

namespace mkm {

using AnyModel = std::variant<InteractionModel, MultilinearOperator>;

struct ModelConfig {
  std::string type = "A";  // A, B, C, atoms, multilinear
  int d = 3;
  double e = 0.5;
  double theta = 1.0;
  double m = 1.0;
  std::string g = "const";  // or path to a two-column table z, g(z)
  std::vector<Atom> atoms, h_atoms;
  AffineMap a{0.0, 1.0}, b{1.0, -1.0}, c{1.0, 0.0};
  std::optional<TransformMode> mode;
  std::vector<MultilinearTerm> terms;
};

struct SpectralConfig {
  double p_min = 0.05, p_max = 8.0;
  int steps = 160;
};

struct EvolveConfig {
  double t_end = 10.0, dt = 0.01;
  int snapshot_every = 100;
  std::string u0 = "exp";  // exp | exp_p:<p> | csv:<path>
};

struct ProfileConfig {
  double p = 1.0, tol = 1e-9;
  int max_iter = 500;
};

struct MomentsConfig {
  int s_max = 6;
  double p = 1.0;
};

struct ReconstructConfig {
  double v_max = 10.0;
  int v_points = 201;
  std::string input;  // csv:<path>; empty means "solve the profile first"
};

struct ExperimentConfig {
  ModelConfig model;
  GridSpec grid;
  int quad_nodes = kOperatorNodes;
  SpectralConfig spectral;
  EvolveConfig evolve;
  ProfileConfig profile;
  MomentsConfig moments;
  ReconstructConfig reconstruct;
  std::string output = "mkm_out";
  std::uint64_t seed = 20240611;
  std::filesystem::path base_dir = ".";
  nlohmann::json source;  // parsed input, echoed into run summaries
};

namespace detail {

using json = nlohmann::json;

inline void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  require(j.is_object(), "config: " + path + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) throw ValidationError("config: unknown key " + path + "." + it.key());
}

inline double get_number(const json& j, const std::string& path) {
  require(j.is_number(), "config: " + path + " must be a number");
  double v = j.get<double>();
  require(std::isfinite(v), "config: " + path + " must be finite");
  return v;
}

inline int get_int(const json& j, const std::string& path) {
  require(j.is_number_integer(), "config: " + path + " must be an integer");
  return j.get<int>();
}

inline double positive(const json& j, const std::string& path) {
  double v = get_number(j, path);
  require(v > 0.0, "config: " + path + " must be positive");
  return v;
}

inline std::string get_string(const json& j, const std::string& path) {
  require(j.is_string(), "config: " + path + " must be a string");
  return j.get<std::string>();
}

inline AffineMap get_map(const json& j, const std::string& path) {
  require(j.is_array() && j.size() == 2, "config: " + path + " must be [intercept, slope]");
  return {get_number(j[0], path + "[0]"), get_number(j[1], path + "[1]")};
}

inline std::vector<Atom> get_atoms(const json& j, const std::string& path) {
  require(j.is_array(), "config: " + path + " must be a list of [s, w]");
  std::vector<Atom> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::string p = path + "[" + std::to_string(i) + "]";
    require(j[i].is_array() && j[i].size() == 2, "config: " + p + " must be [s, w]");
    out.push_back({get_number(j[i][0], p + "[0]"), get_number(j[i][1], p + "[1]")});
  }
  return out;
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& file) {
  std::filesystem::path p(file);
  return p.is_absolute() ? p : base / p;
}

// "csv:<path>" -> existing absolute path
inline std::string resolve_csv(const std::string& spec, const std::filesystem::path& base, const std::string& what) {
  require(spec.rfind("csv:", 0) == 0, "config: " + what + " must be csv:<path>");
  auto p = resolve(base, spec.substr(4));
  require(std::filesystem::exists(p), "config: " + what + " file not found: " + p.string());
  return "csv:" + p.string();
}

inline ModelConfig parse_model(const json& j, const std::filesystem::path& base) {
  check_keys(j, "model", {"type", "d", "e", "theta", "m", "g", "atoms", "h_atoms", "a", "b", "c", "mode", "terms"});
  ModelConfig mc;
  require(j.contains("type"), "config: model.type is required");
  mc.type = get_string(j["type"], "model.type");
  require(mc.type == "A" || mc.type == "B" || mc.type == "C" || mc.type == "atoms" || mc.type == "multilinear",
          "config: model.type must be one of A, B, C, atoms, multilinear");
  if (j.contains("d")) mc.d = get_int(j["d"], "model.d");
  if (j.contains("e")) mc.e = get_number(j["e"], "model.e");
  if (j.contains("theta")) mc.theta = get_number(j["theta"], "model.theta");
  if (j.contains("m")) mc.m = get_number(j["m"], "model.m");
  if (j.contains("g")) {
    mc.g = get_string(j["g"], "model.g");
    if (mc.g != "const") {
      auto p = resolve(base, mc.g);
      require(std::filesystem::exists(p), "config: model.g table not found: " + p.string());
      mc.g = p.string();
    }
  }
  if (j.contains("atoms")) mc.atoms = get_atoms(j["atoms"], "model.atoms");
  if (j.contains("h_atoms")) mc.h_atoms = get_atoms(j["h_atoms"], "model.h_atoms");
  if (j.contains("a")) mc.a = get_map(j["a"], "model.a");
  if (j.contains("b")) mc.b = get_map(j["b"], "model.b");
  if (j.contains("c")) mc.c = get_map(j["c"], "model.c");
  if (j.contains("mode")) {
    std::string m = get_string(j["mode"], "model.mode");
    require(m == "fourier" || m == "laplace", "config: model.mode must be fourier or laplace");
    mc.mode = m == "fourier" ? TransformMode::fourier : TransformMode::laplace;
  }
  if (j.contains("terms")) {
    const json& t = j["terms"];
    require(t.is_array() && !t.empty(), "config: model.terms must be a non-empty list");
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::string p = "model.terms[" + std::to_string(i) + "]";
      check_keys(t[i], p, {"arity", "weight", "atoms"});
      require(t[i].contains("arity") && t[i].contains("weight") && t[i].contains("atoms"),
              "config: " + p + " needs arity, weight and atoms");
      MultilinearTerm term;
      term.arity = get_int(t[i]["arity"], p + ".arity");
      term.weight = get_number(t[i]["weight"], p + ".weight");
      ProductAtomKernel k;
      const json& at = t[i]["atoms"];
      require(at.is_array() && !at.empty(), "config: " + p + ".atoms must be a non-empty list");
      for (std::size_t q = 0; q < at.size(); ++q) {
        std::string pa = p + ".atoms[" + std::to_string(q) + "]";
        check_keys(at[q], pa, {"coords", "weight"});
        require(at[q].contains("coords") && at[q].contains("weight"), "config: " + pa + " needs coords and weight");
        ProductAtom atom;
        require(at[q]["coords"].is_array(), "config: " + pa + ".coords must be a list");
        for (std::size_t r = 0; r < at[q]["coords"].size(); ++r)
          atom.coords.push_back(get_number(at[q]["coords"][r], pa + ".coords"));
        atom.weight = get_number(at[q]["weight"], pa + ".weight");
        k.atoms.push_back(std::move(atom));
      }
      term.kernel = std::move(k);
      mc.terms.push_back(std::move(term));
    }
  }
  if (mc.type == "atoms") require(!mc.atoms.empty() || !mc.h_atoms.empty(), "config: model.atoms is required for type atoms");
  if (mc.type == "multilinear") require(!mc.terms.empty(), "config: model.terms is required for type multilinear");
  return mc;
}

}  // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = ".") {
  using detail::check_keys;
  using detail::get_int;
  using detail::positive;
  check_keys(j, "", {"model", "grid", "quad", "spectral", "evolve", "profile", "moments", "reconstruct", "output", "seed"});
  ExperimentConfig c;
  c.base_dir = base_dir;
  c.source = j;
  require(j.contains("model"), "config: model section is required");
  c.model = detail::parse_model(j["model"], base_dir);
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    check_keys(g, "grid", {"m", "x_min", "x_max"});
    if (g.contains("m")) c.grid.points = get_int(g["m"], "grid.m");
    if (g.contains("x_min")) c.grid.x_min = positive(g["x_min"], "grid.x_min");
    if (g.contains("x_max")) c.grid.x_max = positive(g["x_max"], "grid.x_max");
    require(c.grid.points >= 8, "config: grid.m must be >= 8");
    require(c.grid.x_max > c.grid.x_min, "config: grid.x_max must exceed grid.x_min");
  }
  if (j.contains("quad")) {
    check_keys(j["quad"], "quad", {"nodes"});
    if (j["quad"].contains("nodes")) c.quad_nodes = get_int(j["quad"]["nodes"], "quad.nodes");
    require(c.quad_nodes >= 4 && c.quad_nodes <= 512, "config: quad.nodes must lie in [4, 512]");
  }
  if (j.contains("spectral")) {
    const auto& s = j["spectral"];
    check_keys(s, "spectral", {"p_min", "p_max", "steps"});
    if (s.contains("p_min")) c.spectral.p_min = positive(s["p_min"], "spectral.p_min");
    if (s.contains("p_max")) c.spectral.p_max = positive(s["p_max"], "spectral.p_max");
    if (s.contains("steps")) c.spectral.steps = get_int(s["steps"], "spectral.steps");
    require(c.spectral.p_max > c.spectral.p_min, "config: spectral.p_max must exceed spectral.p_min");
    require(c.spectral.steps >= 2, "config: spectral.steps must be >= 2");
  }
  if (j.contains("evolve")) {
    const auto& s = j["evolve"];
    check_keys(s, "evolve", {"t_end", "dt", "snapshot_every", "u0"});
    if (s.contains("t_end")) c.evolve.t_end = positive(s["t_end"], "evolve.t_end");
    if (s.contains("dt")) c.evolve.dt = positive(s["dt"], "evolve.dt");
    if (s.contains("snapshot_every")) c.evolve.snapshot_every = get_int(s["snapshot_every"], "evolve.snapshot_every");
    if (s.contains("u0")) c.evolve.u0 = detail::get_string(s["u0"], "evolve.u0");
    require(c.evolve.snapshot_every >= 1, "config: evolve.snapshot_every must be >= 1");
  }
  if (j.contains("profile")) {
    const auto& s = j["profile"];
    check_keys(s, "profile", {"p", "tol", "max_iter"});
    if (s.contains("p")) c.profile.p = positive(s["p"], "profile.p");
    if (s.contains("tol")) c.profile.tol = positive(s["tol"], "profile.tol");
    if (s.contains("max_iter")) c.profile.max_iter = get_int(s["max_iter"], "profile.max_iter");
    require(c.profile.max_iter >= 1, "config: profile.max_iter must be >= 1");
  }
  if (j.contains("moments")) {
    const auto& s = j["moments"];
    check_keys(s, "moments", {"s_max", "p"});
    if (s.contains("s_max")) c.moments.s_max = get_int(s["s_max"], "moments.s_max");
    if (s.contains("p")) c.moments.p = positive(s["p"], "moments.p");
  }
  if (j.contains("reconstruct")) {
    const auto& s = j["reconstruct"];
    check_keys(s, "reconstruct", {"v_max", "v_points", "input"});
    if (s.contains("v_max")) c.reconstruct.v_max = positive(s["v_max"], "reconstruct.v_max");
    if (s.contains("v_points")) c.reconstruct.v_points = get_int(s["v_points"], "reconstruct.v_points");
    if (s.contains("input"))
      c.reconstruct.input = detail::resolve_csv(detail::get_string(s["input"], "reconstruct.input"), base_dir,
                                                "reconstruct.input");
    require(c.reconstruct.v_points >= 2, "config: reconstruct.v_points must be >= 2");
  }
  if (c.evolve.u0.rfind("csv:", 0) == 0) c.evolve.u0 = detail::resolve_csv(c.evolve.u0, base_dir, "evolve.u0");
  if (j.contains("output")) c.output = detail::get_string(j["output"], "output");
  if (j.contains("seed")) {
    require(j["seed"].is_number_unsigned(), "config: seed must be a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "config: cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("config: JSON parse error: ") + e.what());
  }
  return parse_config(j, std::filesystem::absolute(path).parent_path());
}

// Two-column table (whitespace or comma separated, '#' comments).
inline SmoothFactor load_cosine_table(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open g table " + path);
  std::vector<double> z, g;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream ss(line);
    double a, b;
    if (!(ss >> a)) continue;
    require(static_cast<bool>(ss >> b), "g table rows need two columns: " + path);
    z.push_back(a);
    g.push_back(b);
  }
  return SmoothFactor::from_cosine_table(z, g);
}

inline AnyModel build_model(const ModelConfig& mc) {
  auto g = [&] { return mc.g == "const" ? SmoothFactor::constant() : load_cosine_table(mc.g); };
  InteractionModel m;
  if (mc.type == "multilinear") return make_multilinear(mc.terms);
  if (mc.type == "A") {
    m = make_model_A(mc.d, g());
  } else if (mc.type == "B") {
    m = make_model_B(mc.d, g(), mc.theta, mc.m);
  } else if (mc.type == "C") {
    m = make_model_C(mc.d, mc.e);
  } else {
    return make_atomic_model(mc.atoms, mc.a, mc.b, mc.c, mc.mode.value_or(TransformMode::laplace), mc.h_atoms);
  }
  if (mc.mode) m.mode = *mc.mode;
  return m;
}

}  // namespace mkm
