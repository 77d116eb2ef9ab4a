#pragma once

#include "invopt/landscape/problem.hpp"
#include "invopt/opt/optimize.hpp"
#include "invopt/proxy/model.hpp"

namespace invopt::opt {

// Surrogate landscape with tape gradients. The problem's target trajectory is
// encoded once and captured.
Objective make_proxy_objective(const proxy::ProxyModel& model,
                               const landscape::InverseProblem& problem);

// True configuration loss; gradients fall back to finite differences.
// Simulator failures propagate out of evaluate.
Objective make_ground_truth_objective(const landscape::InverseProblem& problem);

// Primary BFGS on the proxy landscape, secondary BFGS on the ground truth.
OptResult two_step_optimize(const proxy::ProxyModel& model,
                            const landscape::InverseProblem& problem,
                            const RealVector& x0, const BfgsOptions& options = {});

}  // namespace invopt::opt
