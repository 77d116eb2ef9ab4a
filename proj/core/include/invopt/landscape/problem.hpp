#pragma once

#include <string>
#include <variant>

#include "invopt/common.hpp"
#include "invopt/sim/billiards.hpp"
#include "invopt/sim/burgers.hpp"
#include "invopt/sim/kuramoto.hpp"
#include "invopt/sim/trajectory.hpp"

namespace invopt::landscape {

enum class SystemKind {
  gramacy_lee,
  rastrigin,
  burgers,
  kuramoto_sivashinsky,
  billiards2d,
  billiards4d,
};

std::string to_string(SystemKind kind);
SystemKind system_from_string(const std::string& name);

// Analytic systems carry no simulator spec; their configuration loss is the
// test function shifted so the global minimum sits at zero.
using SystemSpec =
    std::variant<std::monostate, sim::BurgersSpec, sim::KSSpec, sim::BilliardsSpec>;

// An inverse problem: recover true_params from the trajectory they produced.
// target is simulated from true_params at construction and never recomputed.
struct InverseProblem {
  SystemKind kind;
  std::string system_id;
  std::vector<std::string> param_names;
  ControlParams true_params;  // X* with the search box Z
  sim::Trajectory target;     // Y*
  RealVector initial_state;   // PDE initial condition, empty otherwise
  SystemSpec spec;

  sim::Trajectory simulate(const RealVector& xs) const;
  double configuration_loss(const RealVector& xs) const;
  void validate() const;
};

}  // namespace invopt::landscape
