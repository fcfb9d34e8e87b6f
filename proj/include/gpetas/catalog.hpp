#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "gpetas/errors.hpp"

namespace gpetas {

// One marked point of a catalog: time (days), planar location, magnitude.
struct Event {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double m = 0.0;
};

// Observation window X x T with the magnitude of completeness m0.
struct DomainWindow {
  std::array<double, 2> x_range{0.0, 1.0};
  std::array<double, 2> y_range{0.0, 1.0};
  std::array<double, 2> t_range{0.0, 1.0};
  double m0 = 0.0;

  double area() const {
    return (x_range[1] - x_range[0]) * (y_range[1] - y_range[0]);
  }
  double duration() const { return t_range[1] - t_range[0]; }

  bool contains_xy(double x, double y) const {
    return x >= x_range[0] && x <= x_range[1] && y >= y_range[0] &&
           y <= y_range[1];
  }
  bool contains_t(double t) const {
    return t >= t_range[0] && t <= t_range[1];
  }
  bool contains(const Event& e) const {
    return contains_xy(e.x, e.y) && contains_t(e.t) && e.m >= m0;
  }

  // Throws ConfigError unless all ranges are properly ordered.
  void validate() const;
};

// Time-ordered marked point pattern on a window.
struct Catalog {
  std::vector<Event> events;
  DomainWindow window;

  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }

  // Sorts events by time (stable: ties keep insertion order).
  void sort_by_time();
  // Throws ConfigError if any event violates the window/m0 invariants or the
  // time ordering.
  void validate() const;
};

struct LoadResult {
  Catalog catalog;
  std::size_t n_dropped_window = 0;     // outside X or T
  std::size_t n_dropped_magnitude = 0;  // m < m0
  bool extra_columns = false;           // file had more than t,x,y,m
};

// Reads a CSV catalog with header `t,x,y,m`.  Events outside the window or
// below m0 are dropped and counted.  Throws DataError (with the 1-based line
// number) on malformed rows and on files with no event rows.
LoadResult load_catalog(const std::string& path, const DomainWindow& window);

// Writes `t,x,y,m` CSV with 17-significant-digit floats (bit-exact round trip).
void write_catalog(const Catalog& cat, const std::string& path);

// Partitions at t_split: train keeps t <= t_split (closed on the left), test
// keeps t > t_split.  Both inherit the window with the adjusted t_range.
// Throws Error if t_split is outside the open time interval.
std::pair<Catalog, Catalog> split_catalog(const Catalog& cat, double t_split);

// Canonical shortest-exact float formatting used by all text outputs.
std::string format_double(double v);

}  // namespace gpetas
