#pragma once

// Locale-independent CSV output for trajectories, Hopf curves and sweeps.

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "delayq/analysis.hpp"
#include "delayq/dde.hpp"
#include "delayq/error.hpp"
#include "delayq/stability.hpp"

namespace delayq {

/// Shortest general-format rendering with 9 significant digits, '.' decimal point.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
  return std::string(buf, res.ptr);
}

inline double parse_number(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw PreconditionError("csv: cannot parse number '" + std::string(s) + "'");
  return v;
}

/// Header `t,q1,q2` for the constant-delay model, `t,q1,q2,m1,m2` for the
/// moving-average model.
template <std::size_t N>
void write_trajectory_csv(const Trajectory<N>& traj, std::ostream& os) {
  static_assert(N == 2 || N == 4);
  os << (N == 2 ? "t,q1,q2\n" : "t,q1,q2,m1,m2\n");
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << format_number(traj.time(k));
    for (double v : traj.state(k)) os << ',' << format_number(v);
    os << '\n';
  }
}

namespace detail {

template <class Fn>
void write_file(const std::string& path, Fn&& fn) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  fn(os);
  os.flush();
  if (!os) throw IoError("write to '" + path + "' failed");
}

}  // namespace detail

template <std::size_t N>
void write_trajectory_csv(const Trajectory<N>& traj, const std::string& path) {
  detail::write_file(path, [&](std::ostream& os) { write_trajectory_csv(traj, os); });
}

inline void write_hopf_curve_csv(const std::vector<HopfPoint>& points, std::ostream& os) {
  os << "lambda,delta_cr,omega,branch,validated\n";
  for (const auto& p : points) {
    os << format_number(p.lambda) << ',' << format_number(p.delta_cr) << ','
       << format_number(p.omega) << ',' << p.branch << ',' << (p.validated ? 1 : 0) << '\n';
  }
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
  os << "lambda,mu,delta,predicted,observed,amplitude,agree\n";
  for (const auto& r : rows) {
    os << format_number(r.lambda) << ',' << format_number(r.mu) << ',' << format_number(r.delta)
       << ',' << to_string(r.predicted) << ','
       << (r.observed ? to_string(*r.observed) : std::string_view("error")) << ','
       << format_number(r.amplitude) << ',' << (r.agree ? 1 : 0) << '\n';
  }
}

/// Numeric CSV table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline CsvTable read_numeric_csv(std::istream& is) {
  CsvTable table;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  if (!std::getline(is, line)) throw PreconditionError("csv: empty input");
  table.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line)) row.push_back(parse_number(cell));
    if (row.size() != table.header.size()) throw PreconditionError("csv: ragged row");
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace delayq
