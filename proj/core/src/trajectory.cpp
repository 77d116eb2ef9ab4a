#include "invopt/sim/trajectory.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace invopt::sim {

void Trajectory::validate() const {
  require(!frames.empty(), "trajectory has no frames");
  require(frames.size() == frame_times.size(), "frame/time count mismatch");
  require(frame_times.front() == 0.0, "trajectory must start at t = 0");
  const std::size_t width = frames.front().size();
  require(width > 0, "trajectory frames are empty");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    require(frames[i].size() == width, "trajectory frame width varies");
    if (!all_finite(frames[i])) throw NumericError("trajectory frame is not finite");
    if (i > 0) require(frame_times[i] > frame_times[i - 1], "frame times must increase");
  }
}

double sum_squared_difference(const Trajectory& a, const Trajectory& b) {
  require(a.frames.size() == b.frames.size(), "trajectory frame counts differ");
  double total = 0.0;
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    const RealVector& fa = a.frames[i];
    const RealVector& fb = b.frames[i];
    require(fa.size() == fb.size(), "trajectory frame widths differ");
    for (std::size_t j = 0; j < fa.size(); ++j) {
      const double d = fa[j] - fb[j];
      total += d * d;
    }
  }
  return total;
}

void save_trajectory_csv(const std::string& path, const Trajectory& t) {
  t.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for write: " + path);
  out << "t";
  for (std::size_t j = 0; j < t.frames.front().size(); ++j) out << ",x" << j;
  out << "\n";
  char buf[40];
  for (std::size_t i = 0; i < t.frames.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", t.frame_times[i]);
    out << buf;
    for (double v : t.frames[i]) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << "," << buf;
    }
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

Trajectory load_trajectory_csv(const std::string& path, const std::string& system_id) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for read: " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty trajectory file: " + path);
  Trajectory t;
  t.system_id = system_id;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    RealVector values;
    while (std::getline(row, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw IoError("bad number in trajectory file: " + path);
      }
      if (used != cell.size()) throw IoError("bad number in trajectory file: " + path);
      values.push_back(v);
    }
    if (values.size() < 2) throw IoError("short row in trajectory file: " + path);
    t.frame_times.push_back(values.front());
    t.frames.emplace_back(values.begin() + 1, values.end());
  }
  t.validate();
  return t;
}

}  // namespace invopt::sim
