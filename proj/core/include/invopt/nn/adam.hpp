#pragma once

#include "invopt/nn/tape.hpp"

namespace invopt::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One bias-corrected Adam update over every tensor in the state.
// Rejects non-finite gradients naming the offending layer.
void adam_step(const NetworkSpec& spec, NetworkState& state, const GradientSet& grads,
               double learning_rate, const AdamConfig& cfg = {});

}  // namespace invopt::nn
