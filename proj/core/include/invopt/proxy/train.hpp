#pragma once

#include "invopt/proxy/dataset.hpp"
#include "invopt/proxy/model.hpp"

namespace invopt::proxy {

struct TrainResult {
  ProxyModel model;
  RealVector epoch_losses;  // mean per-sample training loss, one entry per epoch
};

// Loss on one sample: the squared error is scaled by mu when the network
// overpredicts the target, so pessimistic surrogates are pushed down harder.
inline double penalized_squared_error(double prediction, double target, double mu) {
  const double d = prediction - target;
  const double se = d * d;
  return (prediction > target ? mu : 1.0) * se;
}

// Minibatch Adam over the dataset. Each epoch reshuffles the samples and
// redraws the Gaussian input noise; the gate and noise come from reg, not
// from init.regularization, and the returned model records reg and is frozen.
TrainResult train(const Dataset& data, const ProxyModel& init,
                  const RegularizationConfig& reg);

// Plain squared-error path with no noise and no gate. Kept as separate code
// so the (sigma=0, mu=1) reduction can be checked against it bit for bit.
TrainResult train_unregularized(const Dataset& data, const ProxyModel& init);

}  // namespace invopt::proxy
