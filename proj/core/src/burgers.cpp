#include "invopt/sim/burgers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "invopt/rng.hpp"

namespace invopt::sim {

void BurgersSpec::validate() const {
  require(grid_points >= 8, "burgers grid needs at least 8 points");
  require(domain_length > 0.0, "burgers domain length must be positive");
  require(frame_count >= 2, "burgers needs at least 2 frames");
  require(frame_interval > 0.0 && internal_dt > 0.0, "burgers time steps must be positive");
  const double ratio = frame_interval / internal_dt;
  require(std::abs(ratio - std::round(ratio)) < 1e-9 * ratio,
          "frame_interval must be an integer multiple of internal_dt");
}

int BurgersSpec::steps_per_frame() const {
  return static_cast<int>(std::round(frame_interval / internal_dt));
}

Trajectory burgers_simulate(const BurgersSpec& spec, const RealVector& u0, double nu) {
  spec.validate();
  const int n = spec.grid_points;
  require(static_cast<int>(u0.size()) == n, "initial state size mismatch");
  require(all_finite(u0), "initial state is not finite");
  require(nu >= 0.0, "viscosity must be non-negative");

  const double dx = spec.dx();
  const double dt = spec.internal_dt;
  double umax = 0.0;
  for (double v : u0) umax = std::max(umax, std::abs(v));
  const double stability = dt * (umax / dx + 2.0 * nu / (dx * dx));
  if (stability > 1.0)
    throw NumericError("burgers step is unstable for this state and viscosity");

  Trajectory out;
  out.system_id = "burgers";
  out.frames.reserve(spec.frame_count);
  out.frame_times.reserve(spec.frame_count);
  out.frames.push_back(u0);
  out.frame_times.push_back(0.0);

  RealVector u = u0;
  RealVector flux(n);
  RealVector next(n);
  const int steps = spec.steps_per_frame();
  const double adv = dt / dx;
  const double dif = nu * dt / (dx * dx);

  for (int frame = 1; frame < spec.frame_count; ++frame) {
    for (int s = 0; s < steps; ++s) {
      // flux[i] sits on the interface between cells i and i+1.
      for (int i = 0; i < n; ++i) {
        const double ur = u[(i + 1) % n];
        const double a = 0.5 * (u[i] + ur);
        const double up = (a >= 0.0) ? u[i] : ur;
        flux[i] = 0.5 * up * up;
      }
      for (int i = 0; i < n; ++i) {
        const double ul = u[(i + n - 1) % n];
        const double ur = u[(i + 1) % n];
        next[i] = u[i] - adv * (flux[i] - flux[(i + n - 1) % n]) + dif * (ur - 2.0 * u[i] + ul);
      }
      u.swap(next);
    }
    if (!all_finite(u)) throw NumericError("burgers state diverged");
    out.frames.push_back(u);
    out.frame_times.push_back(spec.frame_interval * frame);
  }
  return out;
}

RealVector burgers_random_initial_state(const BurgersSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng = make_rng(derive_seed(seed, "burgers-u0"));
  const double two_pi = 2.0 * std::numbers::pi;
  RealVector u(spec.grid_points, 0.0);
  for (int mode = 1; mode <= 3; ++mode) {
    const double amp = uniform(rng, -0.8, 0.8);
    const double phase = uniform(rng, 0.0, two_pi);
    for (int i = 0; i < spec.grid_points; ++i) {
      const double x = spec.domain_length * i / spec.grid_points;
      u[i] += amp * std::sin(two_pi * mode * x / spec.domain_length + phase);
    }
  }
  return u;
}

}  // namespace invopt::sim
