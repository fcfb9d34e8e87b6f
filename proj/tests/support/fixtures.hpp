#pragma once

// Shared deterministic fixtures: reference windows, the piecewise background
// used across the synthetic studies, handmade catalogs, and temp-file helpers.

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "gpetas/catalog.hpp"
#include "gpetas/rng.hpp"
#include "gpetas/simulator.hpp"
#include "gpetas/triggering.hpp"

namespace gpetas::test {

inline DomainWindow unit_window(double t_max = 10.0, double m0 = 0.0) {
  DomainWindow w;
  w.x_range = {0.0, 1.0};
  w.y_range = {0.0, 1.0};
  w.t_range = {0.0, t_max};
  w.m0 = m0;
  return w;
}

// The synthetic-study window: [0,5]^2 in space, m0 = 3.36.
inline DomainWindow case1_window(double t_max = 5000.0) {
  DomainWindow w;
  w.x_range = {0.0, 5.0};
  w.y_range = {0.0, 5.0};
  w.t_range = {0.0, t_max};
  w.m0 = 3.36;
  return w;
}

// Three-level piecewise background: 0.005 / 0.001 / 0.0005 events/day/unit^2.
inline std::vector<PiecewiseCell> case1_cells() {
  return {{0.0, 3.0, 1.5, 5.0, 0.005},
          {3.0, 5.0, 1.5, 5.0, 0.001},
          {0.0, 5.0, 0.0, 1.5, 0.0005}};
}

// Analytic integral of the piecewise background over the window:
// 0.005*3*3.5 + 0.001*2*3.5 + 0.0005*5*1.5 = 0.06325.
inline constexpr double kCase1MuIntegral = 0.06325;

// Generative triggering parameters of the synthetic studies.
inline TriggeringParams case1_theta() {
  TriggeringParams th;
  th.K0 = 0.018;
  th.c = 0.006;
  th.p = 1.2;
  th.alpha = 1.69;
  th.d = 0.015;
  th.gamma = 0.2;
  th.q = 2.0;
  return th;
}

inline SimConfig case1_sim_config(std::uint64_t seed, double t_max = 5000.0) {
  SimConfig cfg;
  cfg.window = case1_window(t_max);
  cfg.lambda_bar = 0.005;
  cfg.source = SimConfig::Source::explicit_field;
  cfg.field = make_piecewise_field(case1_cells());
  cfg.theta = case1_theta();
  cfg.seed = seed;
  return cfg;
}

inline Catalog make_catalog(const DomainWindow& w,
                            std::initializer_list<Event> evs) {
  Catalog cat;
  cat.window = w;
  cat.events = evs;
  cat.sort_by_time();
  return cat;
}

// A 2189-event catalog shaped like a regional five-year sequence:
// [12,15]x[41,44] degrees, 6992 days, magnitudes in [3.0, 6.5], with exactly
// 723 events at t <= 4000 and 1466 after.  Deterministic.
inline Catalog regional_catalog_2189() {
  RngStream rng(20090406);
  DomainWindow w;
  w.x_range = {12.0, 15.0};
  w.y_range = {41.0, 44.0};
  w.t_range = {0.0, 6992.0};
  w.m0 = 3.0;
  Catalog cat;
  cat.window = w;
  auto draw = [&](double t_lo, double t_hi, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      Event e;
      e.t = rng.uniform(t_lo, t_hi);
      e.x = rng.uniform(12.0, 15.0);
      e.y = rng.uniform(41.0, 44.0);
      do {
        e.m = 3.0 + rng.exponential(std::log(10.0));
      } while (e.m > 6.5);
      cat.events.push_back(e);
    }
  };
  draw(0.0, 4000.0, 723);
  draw(4000.0 + 1e-9, 6992.0, 1466);
  cat.sort_by_time();
  return cat;
}

// Writes content to a per-test temp file and returns its path.
inline std::string write_temp(const std::string& name,
                              const std::string& content) {
  const auto dir = std::filesystem::temp_directory_path() / "gpetas_tests";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path.string();
}

inline std::string temp_dir(const std::string& name) {
  const auto dir =
      std::filesystem::temp_directory_path() / "gpetas_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace gpetas::test
