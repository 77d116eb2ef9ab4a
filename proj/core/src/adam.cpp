#include "invopt/nn/adam.hpp"

#include <cmath>

namespace invopt::nn {

namespace {

void update_tensor(RealVector& w, RealVector& m, RealVector& v, const RealVector& g,
                   double lr, const AdamConfig& cfg, double bc1, double bc2, int layer) {
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!std::isfinite(g[i]))
      throw NumericError("adam: non-finite gradient in layer " + std::to_string(layer));
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    w[i] -= lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
  }
}

}  // namespace

void adam_step(const NetworkSpec& spec, NetworkState& state, const GradientSet& grads,
               double learning_rate, const AdamConfig& cfg) {
  validate_state(spec, state);
  require(grads.weights.size() == state.weights.size(), "adam: gradient layer count mismatch");
  require(learning_rate > 0.0, "adam: learning rate must be positive");
  for (std::size_t l = 0; l < state.weights.size(); ++l) {
    if (!grads.weights[l].same_shape(state.weights[l]) ||
        !grads.biases[l].same_shape(state.biases[l]))
      throw ConfigError("adam: gradient shape mismatch at layer " + std::to_string(l));
  }
  const std::uint64_t t = state.step_count + 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t l = 0; l < state.weights.size(); ++l) {
    update_tensor(state.weights[l].data, state.m_w[l].data, state.v_w[l].data,
                  grads.weights[l].data, learning_rate, cfg, bc1, bc2, static_cast<int>(l));
    update_tensor(state.biases[l].data, state.m_b[l].data, state.v_b[l].data,
                  grads.biases[l].data, learning_rate, cfg, bc1, bc2, static_cast<int>(l));
  }
  state.step_count = t;
}

}  // namespace invopt::nn
