#include "invopt/landscape/systems.hpp"

#include "invopt/rng.hpp"
#include "invopt/sim/test_functions.hpp"

namespace invopt::landscape {
namespace {

template <class Spec>
Spec spec_or_default(const std::optional<SystemSpec>& s, Spec fallback) {
  if (!s) return fallback;
  require(std::holds_alternative<Spec>(*s), "spec type does not match the system");
  return std::get<Spec>(*s);
}

}  // namespace

Box system_bounds(SystemKind kind) {
  switch (kind) {
    case SystemKind::gramacy_lee: return {{-1.0}, {3.0}};
    case SystemKind::rastrigin: return {{-5.12}, {5.12}};
    case SystemKind::burgers: return {{0.01}, {0.5}};
    case SystemKind::kuramoto_sivashinsky: return {{-1.0, 0.25}, {1.0, 0.75}};
    case SystemKind::billiards2d: return {{-0.3, 0.2}, {0.5, 0.8}};
    case SystemKind::billiards4d:
      return {{0.2, 0.1, -0.3, 1.0}, {0.8, 0.5, 0.5, 3.0}};
  }
  throw ConfigError("unknown system kind");
}

std::vector<std::string> system_param_names(SystemKind kind) {
  switch (kind) {
    case SystemKind::gramacy_lee: return {"x"};
    case SystemKind::rastrigin: return {"x"};
    case SystemKind::burgers: return {"nu"};
    case SystemKind::kuramoto_sivashinsky: return {"alpha", "beta"};
    case SystemKind::billiards2d: return {"angle", "cue_y"};
    case SystemKind::billiards4d: return {"cue_y", "cue_x", "angle", "cue_speed"};
  }
  throw ConfigError("unknown system kind");
}

InverseProblem make_problem(SystemKind kind, std::uint64_t seed) {
  return make_problem(kind, seed, {});
}

InverseProblem make_problem(SystemKind kind, std::uint64_t seed,
                            const ProblemOptions& options) {
  InverseProblem p;
  p.kind = kind;
  p.system_id = to_string(kind);
  p.param_names = system_param_names(kind);
  p.true_params.bounds = options.bounds ? *options.bounds : system_bounds(kind);
  p.true_params.bounds.validate();
  require(p.true_params.bounds.dim() == system_bounds(kind).dim(),
          "bounds dimension does not match the system");

  switch (kind) {
    case SystemKind::gramacy_lee:
      p.true_params.values = {sim::gramacy_lee_minimum().x};
      break;
    case SystemKind::rastrigin:
      p.true_params.values = {0.0};
      break;
    case SystemKind::burgers: {
      sim::BurgersSpec spec = spec_or_default(options.spec, sim::BurgersSpec{});
      p.initial_state = sim::burgers_random_initial_state(spec, derive_seed(seed, "init-state"));
      p.spec = spec;
      break;
    }
    case SystemKind::kuramoto_sivashinsky: {
      sim::KSSpec spec = spec_or_default(options.spec, sim::KSSpec{});
      p.initial_state = sim::ks_random_initial_state(spec, derive_seed(seed, "init-state"));
      p.spec = spec;
      break;
    }
    case SystemKind::billiards2d: {
      p.spec = spec_or_default(options.spec, sim::BilliardsSpec{});
      break;
    }
    case SystemKind::billiards4d: {
      sim::BilliardsSpec spec;
      if (options.spec) {
        spec = spec_or_default(options.spec, sim::BilliardsSpec{});
      } else {
        // The default rack is unreachable for the slowest 4-D launches, so the
        // 4-D setup racks closer to the cue region.
        spec.target_positions = sim::rack_triangle(0.9, 0.5, spec.ball_radius);
      }
      p.spec = spec;
      break;
    }
  }
  if (options.spec &&
      (kind == SystemKind::gramacy_lee || kind == SystemKind::rastrigin))
    require(std::holds_alternative<std::monostate>(*options.spec),
            "analytic systems take no simulator spec");
  if (p.true_params.values.empty()) {
    Rng rng = make_rng(derive_seed(seed, "true-params"));
    p.true_params.values = uniform_in_box(rng, p.true_params.bounds);
  }
  p.true_params.validate();
  p.target = p.simulate(p.true_params.values);
  p.validate();
  return p;
}

}  // namespace invopt::landscape
