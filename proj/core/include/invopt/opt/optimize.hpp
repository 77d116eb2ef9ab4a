#pragma once

#include <functional>
#include <string>
#include <vector>

#include "invopt/common.hpp"

namespace invopt::opt {

// Scalar objective over a box. gradient may be empty: optimizers then fall
// back to central finite differences with a step of 1e-4 of each bound width.
struct Objective {
  std::function<double(const RealVector&)> evaluate;
  std::function<RealVector(const RealVector&)> gradient;
  Box bounds;

  void validate() const {
    bounds.validate();
    require(static_cast<bool>(evaluate), "objective needs an evaluate function");
  }
};

RealVector fd_gradient(const Objective& obj, const RealVector& x);

enum class Termination { gradient_tol, max_iter, line_search_fail, bound_hit };
enum class Stage { primary, secondary, baseline };

std::string to_string(Termination t);
std::string to_string(Stage s);

struct OptIterate {
  RealVector params;
  double value = 0.0;
  double grad_norm = 0.0;
};

struct OptTrace {
  Stage stage = Stage::baseline;
  std::vector<OptIterate> iterates;  // accepted points only, starting at x0
  Termination termination = Termination::max_iter;
  int curvature_skips = 0;

  const RealVector& final_params() const { return iterates.back().params; }
  double final_value() const { return iterates.back().value; }
};

struct BfgsOptions {
  double gradient_tol = 1e-8;
  int max_iter = 500;
  double armijo_c = 1e-4;
  double shrink = 0.5;
  double min_step = 1e-16;  // line search gives up below this step scale
  int clamp_limit = 3;      // consecutive bound-clamped steps before bound_hit
};

// Dense inverse-Hessian BFGS with backtracking Armijo line search, iterates
// projected onto the bounds. Rejects a non-finite objective at x0. A trial
// step whose evaluation fails numerically is shrunk like any rejected step;
// failures at accepted points (gradients included) still propagate.
OptTrace bfgs(const Objective& obj, const RealVector& x0, const BfgsOptions& options = {},
              Stage stage = Stage::baseline);

// Fixed-step descent sharing the BFGS stopping rules; a step that fails to
// decrease the objective terminates the run instead of being accepted.
OptTrace gradient_descent(const Objective& obj, const RealVector& x0,
                          double learning_rate, int max_iter,
                          const BfgsOptions& options = {},
                          Stage stage = Stage::baseline);

struct OptResult {
  ControlParams x_predicted;
  OptTrace primary_trace;
  OptTrace secondary_trace;
  bool has_secondary = false;
  double wall_time_seconds = 0.0;
};

// Primary BFGS on the surrogate objective, secondary BFGS on the true one
// starting from the primary convergence point. A primary run that cannot move
// leaves the secondary starting at x0; its trace records the failure.
OptResult two_step_core(const Objective& primary, const Objective& secondary,
                        const RealVector& x0, const BfgsOptions& options = {});

void save_traces_csv(const std::string& path, const std::vector<OptTrace>& traces,
                     const std::vector<std::string>& param_names);

}  // namespace invopt::opt
