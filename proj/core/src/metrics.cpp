#include "invopt/eval/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace invopt::eval {

double prediction_error(const RealVector& x_true, const RealVector& x_pred) {
  require(x_true.size() == x_pred.size() && !x_true.empty(),
          "prediction error needs equal nonempty dimensions");
  double s = 0.0;
  for (std::size_t i = 0; i < x_true.size(); ++i) {
    const double d = x_pred[i] - x_true[i];
    s += d * d;
  }
  return x_true.size() == 1 ? std::abs(x_pred[0] - x_true[0]) : std::sqrt(s);
}

double resimulation_error(const landscape::InverseProblem& problem,
                          const RealVector& x_pred) {
  return problem.configuration_loss(x_pred);
}

std::vector<AccuracyPoint> accuracy_curve(const RealVector& errors,
                                          const RealVector& thresholds) {
  require(!errors.empty(), "accuracy curve needs at least one error value");
  require(!thresholds.empty(), "accuracy curve needs thresholds");
  require(std::is_sorted(thresholds.begin(), thresholds.end()),
          "thresholds must be sorted ascending");
  for (double t : thresholds) require(t > 0.0, "thresholds must be positive");

  std::vector<AccuracyPoint> curve;
  curve.reserve(thresholds.size());
  for (double t : thresholds) {
    std::size_t hits = 0;
    for (double e : errors)
      if (e <= t) ++hits;
    curve.push_back(
        {t, 100.0 * static_cast<double>(hits) / static_cast<double>(errors.size())});
  }
  return curve;
}

RealVector default_thresholds(const Box& bounds) {
  bounds.validate();
  const double w = bounds.max_width();
  require(w > 0.0, "bounds have no width");
  const int count = 20;
  const double lo = std::log(1e-3), hi = std::log(0.5);
  RealVector t(count);
  for (int k = 0; k < count; ++k)
    t[k] = w * std::exp(lo + (hi - lo) * k / (count - 1));
  return t;
}

}  // namespace invopt::eval
