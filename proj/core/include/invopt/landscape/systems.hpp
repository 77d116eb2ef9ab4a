#pragma once

#include <cstdint>
#include <optional>

#include "invopt/landscape/problem.hpp"

namespace invopt::landscape {

Box system_bounds(SystemKind kind);
std::vector<std::string> system_param_names(SystemKind kind);

// Optional deviations from the stock setup: a custom simulator spec and a
// custom search box (X* is drawn inside it; a fixed analytic X* must lie in
// it). The spec variant must match the system.
struct ProblemOptions {
  std::optional<SystemSpec> spec;
  std::optional<Box> bounds;
};

// Builds a seeded inverse problem: analytic systems fix X* at the known
// global minimum; simulated systems draw X* uniformly from the search box
// and, for the PDEs, draw a random initial state. target = simulate(X*).
InverseProblem make_problem(SystemKind kind, std::uint64_t seed);
InverseProblem make_problem(SystemKind kind, std::uint64_t seed,
                            const ProblemOptions& options);

}  // namespace invopt::landscape
