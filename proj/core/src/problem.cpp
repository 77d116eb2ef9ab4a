#include "invopt/landscape/problem.hpp"

#include "invopt/sim/test_functions.hpp"

namespace invopt::landscape {

std::string to_string(SystemKind kind) {
  switch (kind) {
    case SystemKind::gramacy_lee: return "gramacy_lee";
    case SystemKind::rastrigin: return "rastrigin";
    case SystemKind::burgers: return "burgers";
    case SystemKind::kuramoto_sivashinsky: return "kuramoto_sivashinsky";
    case SystemKind::billiards2d: return "billiards2d";
    case SystemKind::billiards4d: return "billiards4d";
  }
  throw ConfigError("unknown system kind");
}

SystemKind system_from_string(const std::string& name) {
  for (SystemKind k :
       {SystemKind::gramacy_lee, SystemKind::rastrigin, SystemKind::burgers,
        SystemKind::kuramoto_sivashinsky, SystemKind::billiards2d, SystemKind::billiards4d})
    if (to_string(k) == name) return k;
  throw ConfigError("unknown system: " + name);
}

namespace {

sim::Trajectory scalar_frame(const std::string& id, double value) {
  sim::Trajectory t;
  t.system_id = id;
  t.frames = {{value}};
  t.frame_times = {0.0};
  return t;
}

bool is_analytic(SystemKind kind) {
  return kind == SystemKind::gramacy_lee || kind == SystemKind::rastrigin;
}

}  // namespace

sim::Trajectory InverseProblem::simulate(const RealVector& xs) const {
  require(xs.size() == true_params.values.size(), "parameter dimension mismatch");
  try {
    switch (kind) {
      case SystemKind::gramacy_lee:
        return scalar_frame(system_id, sim::gramacy_lee(xs[0]));
      case SystemKind::rastrigin:
        return scalar_frame(system_id, sim::rastrigin(xs));
      case SystemKind::burgers:
        return sim::burgers_simulate(std::get<sim::BurgersSpec>(spec), initial_state, xs[0]);
      case SystemKind::kuramoto_sivashinsky:
        return sim::ks_simulate(std::get<sim::KSSpec>(spec), initial_state, xs[0], xs[1]);
      case SystemKind::billiards2d:
      case SystemKind::billiards4d:
        return sim::billiards_simulate(std::get<sim::BilliardsSpec>(spec), xs);
    }
  } catch (const NumericError& e) {
    throw NumericError(system_id + " simulation failed: " + e.what());
  }
  throw ConfigError("unknown system kind");
}

double InverseProblem::configuration_loss(const RealVector& xs) const {
  require(xs.size() == true_params.values.size(), "parameter dimension mismatch");
  if (kind == SystemKind::gramacy_lee)
    return sim::gramacy_lee(xs[0]) - sim::gramacy_lee_minimum().value;
  if (kind == SystemKind::rastrigin) return sim::rastrigin(xs);
  try {
    return sim::sum_squared_difference(simulate(xs), target);
  } catch (const NumericError& e) {
    throw NumericError(system_id + " loss evaluation failed: " + e.what());
  }
}

void InverseProblem::validate() const {
  require(system_id == to_string(kind), "system id does not match kind");
  require(param_names.size() == true_params.values.size(), "parameter name count mismatch");
  true_params.validate();
  target.validate();
  if (is_analytic(kind)) {
    require(std::holds_alternative<std::monostate>(spec), "analytic systems carry no spec");
    require(initial_state.empty(), "analytic systems carry no initial state");
  } else if (kind == SystemKind::burgers || kind == SystemKind::kuramoto_sivashinsky) {
    require(!initial_state.empty(), "pde problem needs an initial state");
  }
}

}  // namespace invopt::landscape
