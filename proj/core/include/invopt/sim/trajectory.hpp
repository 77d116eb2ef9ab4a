#pragma once

#include <string>
#include <vector>

#include "invopt/common.hpp"

namespace invopt::sim {

// Simulator output: equally sized finite frames at strictly increasing times,
// first frame at t = 0.
struct Trajectory {
  std::string system_id;
  std::vector<RealVector> frames;
  RealVector frame_times;

  void validate() const;
};

// Sum of squared per-component differences over all frames.
double sum_squared_difference(const Trajectory& a, const Trajectory& b);

// CSV with header "t,x0,x1,...", one row per frame, 17 significant digits.
void save_trajectory_csv(const std::string& path, const Trajectory& t);
Trajectory load_trajectory_csv(const std::string& path, const std::string& system_id);

}  // namespace invopt::sim
