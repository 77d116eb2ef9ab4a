#pragma once

#include <vector>

#include "invopt/landscape/problem.hpp"

namespace invopt::eval {

// Euclidean distance between the true and predicted parameters; reduces to
// the absolute difference in one dimension.
double prediction_error(const RealVector& x_true, const RealVector& x_pred);

// Distance between the re-simulated and target trajectories. Computed as the
// problem's configuration loss so the two are identical by construction.
double resimulation_error(const landscape::InverseProblem& problem,
                          const RealVector& x_pred);

struct AccuracyPoint {
  double threshold = 0.0;
  double accuracy = 0.0;  // percent of predictions with error <= threshold
};

std::vector<AccuracyPoint> accuracy_curve(const RealVector& errors,
                                          const RealVector& thresholds);

// 20 log-spaced thresholds spanning [1e-3, 0.5] of the widest bound.
RealVector default_thresholds(const Box& bounds);

}  // namespace invopt::eval
