#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "mkm/grid.hpp"

using namespace mkm;

TEST(Grid, NodesLayout) {
  auto g = make_grid({400, 1e-6, 50.0});
  ASSERT_EQ(g->size(), 400u);
  EXPECT_EQ((*g)[0], 0.0);
  EXPECT_EQ((*g)[1], 1e-6);
  EXPECT_EQ(g->x_max(), 50.0);
  double ratio = (*g)[2] / (*g)[1];
  for (std::size_t i = 2; i < g->size(); ++i) EXPECT_NEAR((*g)[i] / (*g)[i - 1], ratio, 1e-9);
  EXPECT_THROW(make_grid({400, 0.0, 50.0}), ValidationError);
  EXPECT_THROW(make_grid({400, 1.0, 0.5}), ValidationError);
  EXPECT_THROW(Grid::from_nodes({0.0, 1.0, 0.5, 2.0, 3.0}), ValidationError);
}

TEST(GridFunction, ReproducesNodes) {
  auto g = make_grid();
  auto u = GridFunction::sample(g, [](double x) { return std::exp(-x); });
  for (std::size_t i = 0; i < g->size(); i += 7) EXPECT_EQ(u((*g)[i]), u[i]);
}

TEST(GridFunction, MidpointAccuracyM400) {
  auto g = make_grid({400, 1e-6, 50.0});
  auto u = GridFunction::sample(g, [](double x) { return std::exp(-x); });
  double err = 0.0;
  for (std::size_t i = 0; i + 1 < g->size(); ++i) {
    double xm = 0.5 * ((*g)[i] + (*g)[i + 1]);
    err = std::max(err, std::abs(u(xm) - std::exp(-xm)));
    if (i > 0) {
      double xg = std::sqrt((*g)[i] * (*g)[i + 1]);
      err = std::max(err, std::abs(u(xg) - std::exp(-xg)));
    }
  }
  EXPECT_LT(err, 1e-6);
  EXPECT_LT(err, 2e-8);  // measured ~1e-8
}

TEST(GridFunction, MidpointAccuracyDefault) {
  auto g = make_grid();
  auto u = GridFunction::sample(g, [](double x) { return std::exp(-x); });
  double err = 0.0;
  for (std::size_t i = 0; i + 1 < g->size(); ++i) {
    double xm = 0.5 * ((*g)[i] + (*g)[i + 1]);
    err = std::max(err, std::abs(u(xm) - std::exp(-xm)));
  }
  EXPECT_LT(err, 1e-10);
}

TEST(GridFunction, PowerSamplesRelativeAccuracy) {
  auto g = make_grid({1600, 1e-6, 10.0});
  for (double p : {1.0, 2.0, 3.0}) {
    auto u = GridFunction::sample(g, [p](double x) { return std::pow(x, p); });
    double err = 0.0;
    for (std::size_t i = 1; i + 1 < g->size(); ++i) {
      double xg = std::sqrt((*g)[i] * (*g)[i + 1]);
      err = std::max(err, std::abs(u(xg) / std::pow(xg, p) - 1.0));
    }
    EXPECT_LT(err, 1e-8) << p;
  }
}

TEST(GridFunction, TailDecaysAndClamps) {
  auto g = make_grid();
  auto u = GridFunction::sample(g, [](double x) { return std::exp(-x); });
  double v = u(100.0);
  EXPECT_GE(v, 0.0);
  EXPECT_LE(v, std::exp(-50.0));
  EXPECT_NEAR(u.tail_rate(), 1.0, 1e-6);
  // non-decaying data holds the last value
  auto c = GridFunction::sample(g, [](double x) { return 0.5 + 0.0 * x; });
  EXPECT_EQ(c(1e6), 0.5);
  // mixed signs hold the last value
  auto s = GridFunction::sample(g, [](double x) { return 0.3 * std::cos(3 * x); });
  EXPECT_EQ(s(80.0), s[s.size() - 1]);
  EXPECT_THROW(u(-1.0), ValidationError);
}

TEST(GridFunction, MonotoneInterpolantStaysInRange) {
  auto g = make_grid({200, 1e-4, 10.0});
  std::vector<double> v(g->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = (i % 3 == 0) ? 1.0 : -1.0;
  GridFunction u(g, v);
  for (double x = 0.0; x < 12.0; x += 0.001) {
    EXPECT_LE(u(x), 1.0);
    EXPECT_GE(u(x), -1.0);
  }
  // monotone data give a monotone interpolant
  auto e = GridFunction::sample(g, [](double x) { return 1.0 / (1.0 + x * x * x); });
  double prev = 2.0;
  for (double x = 0.0; x < 10.0; x += 0.0007) {
    double y = e(x);
    EXPECT_LE(y, prev + 1e-15);
    prev = y;
  }
}

TEST(GridFunction, CsvRoundTrip) {
  auto g = make_grid({50, 1e-3, 5.0});
  auto u = GridFunction::sample(g, [](double x) { return std::exp(-x) * std::cos(x); });
  auto path = std::filesystem::temp_directory_path() / "mkm_grid_roundtrip.csv";
  write_csv(u, path.string());
  auto r = read_csv(path.string());
  ASSERT_EQ(r.size(), u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    EXPECT_EQ(r.nodes()[i], u.nodes()[i]);
    EXPECT_EQ(r[i], u[i]);
  }
  std::filesystem::remove(path);
}
