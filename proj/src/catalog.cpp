#include "gpetas/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gpetas {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

void DomainWindow::validate() const {
  if (!(x_range[1] > x_range[0]))
    throw ConfigError("window: x_range must satisfy x_max > x_min");
  if (!(y_range[1] > y_range[0]))
    throw ConfigError("window: y_range must satisfy y_max > y_min");
  if (!(t_range[1] > t_range[0]))
    throw ConfigError("window: t_range must satisfy t_max > t_min");
}

void Catalog::sort_by_time() {
  std::stable_sort(events.begin(), events.end(),
                   [](const Event& a, const Event& b) { return a.t < b.t; });
}

void Catalog::validate() const {
  window.validate();
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i];
    if (!window.contains(e))
      throw ConfigError("catalog: event " + std::to_string(i) +
                        " outside window or below m0");
    if (i > 0 && events[i - 1].t > e.t)
      throw ConfigError("catalog: events not sorted by time at index " +
                        std::to_string(i));
  }
}

namespace {

// Splits a CSV line; trims surrounding whitespace from each field.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) {
    std::size_t b = field.find_first_not_of(" \t\r");
    std::size_t e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string()
                                         : field.substr(b, e - b + 1));
  }
  return out;
}

double parse_field(const std::string& s, std::size_t line_no,
                   const char* name) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw DataError("catalog: line " + std::to_string(line_no) +
                    ": non-numeric field '" + std::string(name) + "': '" + s +
                    "'");
  }
  if (pos != s.size())
    throw DataError("catalog: line " + std::to_string(line_no) +
                    ": trailing characters in field '" + std::string(name) +
                    "': '" + s + "'");
  return v;
}

}  // namespace

LoadResult load_catalog(const std::string& path, const DomainWindow& window) {
  window.validate();
  std::ifstream in(path);
  if (!in) throw DataError("catalog: cannot open file: " + path);

  LoadResult res;
  res.catalog.window = window;

  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    std::vector<std::string> fields = split_csv(line);
    if (!have_header) {
      if (fields.size() < 4 || fields[0] != "t" || fields[1] != "x" ||
          fields[2] != "y" || fields[3] != "m")
        throw DataError("catalog: line " + std::to_string(line_no) +
                        ": expected header 't,x,y,m'");
      res.extra_columns = fields.size() > 4;
      have_header = true;
      continue;
    }
    if (fields.size() < 4)
      throw DataError("catalog: line " + std::to_string(line_no) +
                      ": expected at least 4 comma-separated fields");
    Event e;
    e.t = parse_field(fields[0], line_no, "t");
    e.x = parse_field(fields[1], line_no, "x");
    e.y = parse_field(fields[2], line_no, "y");
    e.m = parse_field(fields[3], line_no, "m");
    if (!window.contains_xy(e.x, e.y) || !window.contains_t(e.t)) {
      ++res.n_dropped_window;
      continue;
    }
    if (e.m < window.m0) {
      ++res.n_dropped_magnitude;
      continue;
    }
    res.catalog.events.push_back(e);
  }
  if (!have_header) throw DataError("catalog: empty file: " + path);
  if (res.catalog.events.empty() && res.n_dropped_window == 0 &&
      res.n_dropped_magnitude == 0)
    throw DataError("catalog: no event rows in file: " + path);
  res.catalog.sort_by_time();
  return res;
}

void write_catalog(const Catalog& cat, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("catalog: cannot write file: " + path);
  out << "t,x,y,m\n";
  for (const Event& e : cat.events) {
    out << format_double(e.t) << ',' << format_double(e.x) << ','
        << format_double(e.y) << ',' << format_double(e.m) << '\n';
  }
  if (!out) throw DataError("catalog: write failure: " + path);
}

std::pair<Catalog, Catalog> split_catalog(const Catalog& cat, double t_split) {
  const auto& tr = cat.window.t_range;
  if (!(t_split > tr[0] && t_split < tr[1]))
    throw Error("split_catalog: t_split outside the open time interval");

  Catalog train, test;
  train.window = cat.window;
  train.window.t_range = {tr[0], t_split};
  test.window = cat.window;
  test.window.t_range = {t_split, tr[1]};
  for (const Event& e : cat.events) {
    if (e.t <= t_split)
      train.events.push_back(e);
    else
      test.events.push_back(e);
  }
  return {train, test};
}

}  // namespace gpetas
