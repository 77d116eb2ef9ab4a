#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "invopt/common.hpp"
#include "invopt/sim/trajectory.hpp"

namespace invopt::sim {

// Event-driven billiards: balls travel straight lines under constant friction
// deceleration mu*g; collisions are instantaneous.
struct BilliardsSpec {
  double table_width = 2.0;
  double table_height = 1.0;
  double ball_radius = 0.03;
  double friction_mu = 0.5;
  double restitution = 0.8;
  double gravity = 9.81;
  int keyframe_count = 10;
  // Shot parameters with two entries fix the cue at (cue_start_x, y0) and
  // launch at cue_speed; four entries supply position and speed themselves.
  double cue_start_x = 0.2;
  double cue_speed = 4.0;
  // Balls initially at rest; empty selects rack_triangle(1.5, 0.5).
  std::vector<std::array<double, 2>> target_positions;

  void validate() const;
  double deceleration() const { return friction_mu * gravity; }
  std::vector<std::array<double, 2>> resolved_targets() const;
};

// Three balls in a triangle, apex facing the cue, 5e-4 m gaps.
std::vector<std::array<double, 2>> rack_triangle(double cx, double cy, double radius);

struct BilliardsEvent {
  enum class Kind { ball_ball, ball_wall };
  Kind kind;
  double time;
  int ball_a;
  int ball_b = -1;  // ball_wall: -1
  int wall = -1;    // 0 left, 1 right, 2 bottom, 3 top
  std::array<double, 2> normal;  // unit, a toward b, or into the table
  std::array<double, 2> position_a;
  std::array<double, 2> position_b;
  std::array<double, 2> pre_velocity_a;
  std::array<double, 2> post_velocity_a;
  std::array<double, 2> pre_velocity_b;
  std::array<double, 2> post_velocity_b;
};

using BilliardsObserver = std::function<void(const BilliardsEvent&)>;

// Shot is (launch_angle, cue_y) or (cue_y, cue_x, launch_angle, cue_speed).
// Keyframes: launch, one per collision instant, rest; padded with rest
// states one second apart to exactly keyframe_count frames. Frame layout is
// (px, py, vx, vy) per ball, cue first.
Trajectory billiards_simulate(const BilliardsSpec& spec, const RealVector& shot,
                              const BilliardsObserver& observer = {});

}  // namespace invopt::sim
