#pragma once

#include <cstdint>

#include "invopt/common.hpp"
#include "invopt/sim/trajectory.hpp"

namespace invopt::sim {

// Forced Kuramoto-Sivashinsky on a periodic domain,
//   u_t = alpha*G - u_xx - u_xxxx - beta*u*u_x,
// integrated pseudo-spectrally with ETDRK4 and 2/3 dealiasing.
struct KSSpec {
  int grid_points = 64;
  double domain_length = 64.0;
  double end_time = 75.0;
  double frame_interval = 0.5;
  double internal_dt = 0.05;
  // Forcing profile G; empty selects sin(2*pi*x/L).
  RealVector forcing;

  void validate() const;
  int frame_count() const;
  int steps_per_frame() const;
  RealVector resolved_forcing() const;
};

// alpha in [-1, 1], beta in [1/4, 3/4]. Divergence raises NumericError
// naming the time it was detected.
Trajectory ks_simulate(const KSSpec& spec, const RealVector& u0, double alpha, double beta);

// Superposition of the six longest cosine modes with random amplitude and phase.
RealVector ks_random_initial_state(const KSSpec& spec, std::uint64_t seed);

}  // namespace invopt::sim
