#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "mkm/cli.hpp"

using namespace mkm;
using json = nlohmann::json;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("mkm_test_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST(Config, DefaultsAndSections) {
  auto c = parse_config(json::parse(R"({"model": {"type": "C", "e": 0.25}, "grid": {"m": 200},
                                        "profile": {"p": 0.5}, "seed": 7})"));
  EXPECT_EQ(c.model.type, "C");
  EXPECT_DOUBLE_EQ(c.model.e, 0.25);
  EXPECT_EQ(c.grid.points, 200);
  EXPECT_DOUBLE_EQ(c.grid.x_max, 50.0);
  EXPECT_DOUBLE_EQ(c.profile.p, 0.5);
  EXPECT_EQ(c.seed, 7u);
  auto m = std::get<InteractionModel>(build_model(c.model));
  EXPECT_EQ(m.kind, ModelKind::C);
  EXPECT_NEAR(spectral_function(m).mu(1.0), -(1 - 0.25 * 0.25) / 4.0, 1e-12);
}

TEST(Config, UnknownKeysRejectedWithPath) {
  auto bad = [](const char* text, const std::string& path) {
    try {
      parse_config(json::parse(text));
      ADD_FAILURE() << "accepted " << text;
    } catch (const ValidationError& e) {
      EXPECT_NE(std::string(e.what()).find(path), std::string::npos) << e.what();
    }
  };
  bad(R"({"model": {"type": "A"}, "extra": 1})", ".extra");
  bad(R"({"model": {"type": "A", "colour": 1}})", "model.colour");
  bad(R"({"model": {"type": "A"}, "grid": {"n": 10}})", "grid.n");
  bad(R"({"model": {"type": "A"}, "evolve": {"tend": 1}})", "evolve.tend");
}

TEST(Config, RangeAndTypeChecks) {
  EXPECT_THROW(parse_config(json::parse(R"({})")), ValidationError);
  EXPECT_THROW(parse_config(json::parse(R"({"model": {"type": "Z"}})")), ValidationError);
  EXPECT_THROW(parse_config(json::parse(R"({"model": {"type": "A"}, "grid": {"x_max": -1}})")), ValidationError);
  EXPECT_THROW(parse_config(json::parse(R"({"model": {"type": "A"}, "evolve": {"dt": 0}})")), ValidationError);
  EXPECT_THROW(parse_config(json::parse(R"({"model": {"type": "A", "d": 2.5}})")), ValidationError);
  EXPECT_THROW(parse_config(json::parse(R"({"model": {"type": "A", "g": "missing_table.txt"}})")), ValidationError);
  EXPECT_THROW(parse_config(json::parse(R"({"model": {"type": "atoms"}})")), ValidationError);
  auto c = parse_config(json::parse(R"({"model": {"type": "B", "theta": -1}})"));
  EXPECT_THROW(build_model(c.model), ValidationError);
}

TEST(Config, FilesResolvedRelativeToConfig) {
  auto d = scratch_dir("resolve");
  std::ofstream(d / "g.txt") << "# z g\n-1 1\n0 1\n1 1\n";
  std::ofstream(d / "cfg.json") << R"({"model": {"type": "A", "g": "g.txt"}, "reconstruct": {"input": "csv:psi.csv"}})";
  EXPECT_THROW(load_config((d / "cfg.json").string()), ValidationError);  // psi.csv missing
  std::ofstream(d / "psi.csv") << "x,psi\n0,1\n1,0.5\n";
  auto c = load_config((d / "cfg.json").string());
  EXPECT_EQ(c.model.g, (d / "g.txt").string());
  EXPECT_EQ(c.reconstruct.input, "csv:" + (d / "psi.csv").string());
  // constant table reproduces the constant-g model
  auto m = std::get<InteractionModel>(build_model(c.model));
  EXPECT_NEAR(spectral_function(m).lambda(2.0), 2.0 / 3.0, 1e-10);
}

TEST(Config, AtomicAndMultilinearModels) {
  auto c = parse_config(json::parse(R"({"model": {"type": "atoms", "atoms": [[0.5, 1.0]], "a": [1.2, 0], "b": [0.4, 0],
                                                   "c": [1, 0], "d": 1}})"));
  auto m = std::get<InteractionModel>(build_model(c.model));
  EXPECT_EQ(m.mode, TransformMode::laplace);
  EXPECT_EQ(classify(spectral_function(m)), SpectralClass::c);

  auto t = parse_config(json::parse(R"({"model": {"type": "multilinear", "terms": [
      {"arity": 3, "weight": 1.0, "atoms": [{"coords": [0.6, 0.6, 0.6], "weight": 1.0}]}]}})"));
  auto op = std::get<MultilinearOperator>(build_model(t.model));
  EXPECT_NEAR(spectral_function(op).lambda(1.0), 1.8, 1e-14);
}

TEST(Cli, ExitCodes) {
  auto d = scratch_dir("exit");
  auto c = parse_config(json::parse(R"({"model": {"type": "B", "theta": -1}})"));
  c.output = (d / "b").string();
  EXPECT_EQ(run("spectral", c), kExitValidation);

  auto a = parse_config(json::parse(R"({"model": {"type": "A"}, "grid": {"m": 200}, "profile": {"p": 1.5}})"));
  a.output = (d / "a").string();
  EXPECT_EQ(run("profile", a), kExitValidation);

  auto slow = parse_config(json::parse(R"({"model": {"type": "C"}, "grid": {"m": 300}, "profile": {"max_iter": 2}})"));
  slow.output = (d / "c").string();
  EXPECT_EQ(run("profile", slow), kExitNoConvergence);
  EXPECT_TRUE(std::filesystem::exists(d / "c" / "profile_summary.json"));
}

TEST(Cli, SpectralOutputsAndDeterminism) {
  auto d = scratch_dir("spectral");
  auto c = parse_config(json::parse(R"({"model": {"type": "A"}, "spectral": {"p_min": 0.5, "p_max": 5, "steps": 10}})"));
  c.output = (d / "one").string();
  ASSERT_EQ(run("spectral", c), kExitOk);
  c.output = (d / "two").string();
  ASSERT_EQ(run("spectral", c), kExitOk);
  auto csv = slurp(d / "one" / "spectral.csv");
  EXPECT_EQ(csv, slurp(d / "two" / "spectral.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "p,lambda,mu,mu_prime");
  auto s = json::parse(slurp(d / "one" / "spectral_summary.json"));
  EXPECT_NEAR(s["results"]["p0"].get<double>(), 1.0 + std::sqrt(2.0), 1e-6);
  EXPECT_EQ(s["results"]["class"], "b");
  EXPECT_EQ(s["inputs"]["config"]["model"]["type"], "A");
  EXPECT_TRUE(s["timings"].contains("total_seconds"));
}

TEST(Cli, EvolveMomentsReconstruct) {
  auto d = scratch_dir("cmds");
  auto c = parse_config(json::parse(R"({"model": {"type": "C"}, "grid": {"m": 200, "x_max": 30},
      "evolve": {"t_end": 0.2, "dt": 0.05, "snapshot_every": 2, "u0": "exp_p:1"},
      "moments": {"s_max": 5}, "reconstruct": {"v_max": 5, "v_points": 11}})"));
  c.output = d.string();
  ASSERT_EQ(run("evolve", c), kExitOk);
  auto ev = slurp(d / "evolve.csv");
  EXPECT_EQ(ev.substr(0, ev.find('\n')), "t,x,u");
  EXPECT_EQ(std::count(ev.begin(), ev.end(), '\n'), 1 + 3 * 200);  // t = 0, 0.1, 0.2
  ASSERT_EQ(run("moments", c), kExitOk);
  auto ms = json::parse(slurp(d / "moments_summary.json"));
  EXPECT_GT(ms["results"]["s_star"].get<double>(), 4.1);
  EXPECT_LT(ms["results"]["s_star"].get<double>(), 4.2);

  std::ofstream(d / "maxw.csv") << [] {
    std::ostringstream s;
    s << std::setprecision(17) << "x,psi\n";
    for (int i = 0; i <= 4000; ++i) {
      double x = 1e-3 * i * i / 40.0;
      s << x << "," << std::exp(-x) << "\n";
    }
    return s.str();
  }();
  c.reconstruct.input = "csv:" + (d / "maxw.csv").string();
  ASSERT_EQ(run("reconstruct", c), kExitOk);
  std::ifstream in(d / "reconstruct.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "v,F");
  std::getline(in, line);
  EXPECT_NEAR(std::stod(line.substr(line.find(',') + 1)), maxwellian_density_3d(0.0), 1e-6);
}
