#pragma once

#include <cstdint>

#include "invopt/common.hpp"
#include "invopt/sim/trajectory.hpp"

namespace invopt::sim {

// Viscous Burgers on a periodic domain, finite volume: upwind flux for the
// advection term, central differences for diffusion, explicit Euler in time.
struct BurgersSpec {
  int grid_points = 64;
  double domain_length = 4.0;
  int frame_count = 11;
  double frame_interval = 0.5;
  double internal_dt = 1e-3;

  void validate() const;
  double dx() const { return domain_length / grid_points; }
  // frame_interval must be an integer multiple of internal_dt.
  int steps_per_frame() const;
};

// Rejects with NumericError when dt*(max|u0|/dx + 2*nu/dx^2) > 1.
Trajectory burgers_simulate(const BurgersSpec& spec, const RealVector& u0, double nu);

// Superposition of the three longest sine modes with random amplitude and
// phase; bounded well inside the stability envelope of the default spec.
RealVector burgers_random_initial_state(const BurgersSpec& spec, std::uint64_t seed);

}  // namespace invopt::sim
