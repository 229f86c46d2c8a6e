#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "medirl/error.hpp"
#include "medirl/grid.hpp"
#include "medirl/io.hpp"

namespace medirl {

struct Waypoint {
  double t = 0.0;
  Position pos{0.0, 0.0, 0.0};

  bool operator==(const Waypoint&) const = default;
};

struct Trajectory {
  std::string id;
  int dims = 2;
  std::vector<Waypoint> points;
  /// Cached discretization; empty until assigned.
  std::vector<std::size_t> states;
  /// Actions between consecutive states, when known (synthetic data).
  std::vector<std::size_t> actions;

  std::vector<Position> positions() const {
    std::vector<Position> out;
    out.reserve(points.size());
    for (const Waypoint& w : points) out.push_back(w.pos);
    return out;
  }
};

inline void validate(const Trajectory& traj) {
  if (traj.dims != 2 && traj.dims != 3)
    fail(ErrorCode::dimension_mismatch, "trajectory " + traj.id + " has dims " + std::to_string(traj.dims));
  if (traj.points.size() < 2) fail(ErrorCode::schema_error, "trajectory " + traj.id + " has fewer than 2 points");
  for (std::size_t i = 1; i < traj.points.size(); ++i)
    if (!(traj.points[i].t > traj.points[i - 1].t))
      fail(ErrorCode::non_monotone_timestamps, "trajectory " + traj.id + " timestamps are not strictly increasing");
}

/// Drops trailing axes so the trajectory has `dims` coordinates.
inline Trajectory project(Trajectory traj, int dims) {
  if (dims > traj.dims)
    fail(ErrorCode::dimension_mismatch, "cannot lift trajectory " + traj.id + " from " + std::to_string(traj.dims) +
                                            "D to " + std::to_string(dims) + "D");
  for (Waypoint& w : traj.points)
    for (int d = dims; d < 3; ++d) w.pos[d] = 0.0;
  if (dims != traj.dims) traj.states.clear(), traj.actions.clear();
  traj.dims = dims;
  return traj;
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

/// CSV schema: header `id,t,x,y` or `id,t,x,y,z`, one row per sample.
/// Rows of one id must appear in strictly increasing t. A 3D file read
/// with dims = 2 drops z. Trajectories come back sorted by id.
inline std::vector<Trajectory> parse_trajectories(std::istream& in, int dims, const std::string& source = "<csv>") {
  if (dims != 2 && dims != 3) fail(ErrorCode::dimension_mismatch, "dims must be 2 or 3");
  std::string line;
  std::size_t line_no = 0;
  auto strip = [](std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  };
  if (!std::getline(in, line)) fail(ErrorCode::schema_error, source + ": empty file, expected header");
  ++line_no;
  strip(line);
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  int file_dims = 0;
  if (line == "id,t,x,y") file_dims = 2;
  else if (line == "id,t,x,y,z") file_dims = 3;
  else fail(ErrorCode::schema_error, source + ":1: header must be id,t,x,y or id,t,x,y,z");
  if (file_dims < dims)
    fail(ErrorCode::schema_error, source + ": file has " + std::to_string(file_dims) + "D positions, grid needs " +
                                      std::to_string(dims) + "D");

  std::map<std::string, Trajectory> by_id;
  const std::size_t columns = 2 + static_cast<std::size_t>(file_dims);
  while (std::getline(in, line)) {
    ++line_no;
    strip(line);
    if (line.empty()) continue;
    const auto fields = detail::split_commas(line);
    const std::string where = source + ":" + std::to_string(line_no);
    if (fields.size() != columns)
      fail(ErrorCode::schema_error, where + ": expected " + std::to_string(columns) + " fields, got " +
                                        std::to_string(fields.size()));
    if (fields[0].empty()) fail(ErrorCode::schema_error, where + ": empty id");
    Waypoint w;
    if (!parse_double(fields[1], w.t) || !std::isfinite(w.t))
      fail(ErrorCode::schema_error, where + ": bad timestamp '" + std::string(fields[1]) + "'");
    for (int d = 0; d < file_dims; ++d) {
      double v = 0.0;
      if (!parse_double(fields[2 + d], v) || !std::isfinite(v))
        fail(ErrorCode::schema_error, where + ": bad coordinate '" + std::string(fields[2 + d]) + "'");
      if (d < dims) w.pos[d] = v;
    }
    Trajectory& traj = by_id[std::string(fields[0])];
    if (traj.id.empty()) {
      traj.id = std::string(fields[0]);
      traj.dims = dims;
    }
    if (!traj.points.empty() && !(w.t > traj.points.back().t))
      fail(ErrorCode::non_monotone_timestamps, where + ": timestamps of id '" + traj.id + "' are not increasing");
    traj.points.push_back(w);
  }

  std::vector<Trajectory> out;
  out.reserve(by_id.size());
  for (auto& [id, traj] : by_id) {
    validate(traj);
    out.push_back(std::move(traj));
  }
  return out;
}

inline std::vector<Trajectory> load_trajectories(const std::filesystem::path& path, const GridSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path.string());
  return parse_trajectories(in, spec.dims, path.string());
}

inline std::string format_trajectories(const std::vector<Trajectory>& trajs) {
  const int dims = trajs.empty() ? 2 : trajs.front().dims;
  std::ostringstream out;
  out << (dims == 3 ? "id,t,x,y,z\n" : "id,t,x,y\n");
  for (const Trajectory& traj : trajs) {
    if (traj.dims != dims) fail(ErrorCode::dimension_mismatch, "mixed dimensionality in trajectory set");
    for (const Waypoint& w : traj.points) {
      out << traj.id << ',' << format_double(w.t);
      for (int d = 0; d < dims; ++d) out << ',' << format_double(w.pos[d]);
      out << '\n';
    }
  }
  return out.str();
}

inline void write_trajectories(const std::filesystem::path& path, const std::vector<Trajectory>& trajs) {
  write_text_file(path, format_trajectories(trajs));
}

/// Linear interpolation of `traj` onto `timestamps`, holding the end
/// points outside its time range.
inline Trajectory resample(const Trajectory& traj, const std::vector<double>& timestamps) {
  validate(traj);
  Trajectory out;
  out.id = traj.id;
  out.dims = traj.dims;
  std::size_t k = 0;
  for (double t : timestamps) {
    Waypoint w;
    w.t = t;
    if (t <= traj.points.front().t) {
      w.pos = traj.points.front().pos;
    } else if (t >= traj.points.back().t) {
      w.pos = traj.points.back().pos;
    } else {
      while (k + 1 < traj.points.size() && traj.points[k + 1].t < t) ++k;
      const Waypoint& a = traj.points[k];
      const Waypoint& b = traj.points[k + 1];
      const double u = (t - a.t) / (b.t - a.t);
      for (int d = 0; d < 3; ++d) w.pos[d] = a.pos[d] + u * (b.pos[d] - a.pos[d]);
    }
    out.points.push_back(w);
  }
  return out;
}

inline double distance(const Position& a, const Position& b, int dims) {
  double sum = 0.0;
  for (int d = 0; d < dims; ++d) sum += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(sum);
}

struct DisplacementReport {
  double ade = 0.0;
  double fde = 0.0;
  double nde = 0.0;  // 0 when !nde_defined
  std::size_t n_points = 0;
  std::size_t n_nonlinear_points = 0;
  bool nde_defined = false;
};

/// Threshold on |p_{t+1} - 2 p_t + p_{t-1}| (meters) above which a truth
/// point counts as non-linear.
inline constexpr double kNonLinearThreshold = 1e-6;

/// Point-aligned displacement errors. NDE averages over interior truth
/// points whose discrete second difference exceeds kNonLinearThreshold.
inline DisplacementReport displacement_metrics(const Trajectory& pred, const Trajectory& truth) {
  if (pred.points.size() != truth.points.size())
    fail(ErrorCode::length_mismatch, "prediction has " + std::to_string(pred.points.size()) +
                                         " points, truth has " + std::to_string(truth.points.size()));
  if (pred.dims != truth.dims) fail(ErrorCode::dimension_mismatch, "prediction and truth differ in dimensionality");
  if (truth.points.empty()) fail(ErrorCode::length_mismatch, "empty trajectories");
  const int dims = truth.dims;
  const std::size_t n = truth.points.size();
  DisplacementReport rep;
  rep.n_points = n;
  double sum = 0.0;
  double nl_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dist = distance(pred.points[i].pos, truth.points[i].pos, dims);
    sum += dist;
    if (i > 0 && i + 1 < n) {
      Position second{0.0, 0.0, 0.0};
      for (int d = 0; d < dims; ++d)
        second[d] = truth.points[i + 1].pos[d] - 2.0 * truth.points[i].pos[d] + truth.points[i - 1].pos[d];
      if (distance(second, Position{0.0, 0.0, 0.0}, dims) > kNonLinearThreshold) {
        nl_sum += dist;
        ++rep.n_nonlinear_points;
      }
    }
  }
  rep.ade = sum / static_cast<double>(n);
  rep.fde = distance(pred.points.back().pos, truth.points.back().pos, dims);
  rep.nde_defined = rep.n_nonlinear_points > 0;
  if (rep.nde_defined) rep.nde = nl_sum / static_cast<double>(rep.n_nonlinear_points);
  return rep;
}

}  // namespace medirl
