#pragma once

#include <cstdint>
#include <vector>

#include "invopt/common.hpp"
#include "invopt/nn/tensor.hpp"

namespace invopt::nn {

enum class Activation { relu, tanh };
enum class LayerKind { dense, conv1d };

struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  int width = 0;  // dense: output features, conv1d: output channels
  Activation activation = Activation::tanh;
};

// Feed-forward stack over a flat input vector. Conv layers view their input
// as (channels, length) with stride 1, odd kernel, zero padding ("same"); a
// dense layer flattens whatever view precedes it. A final dense linear layer
// of width output_dim is implicit.
struct NetworkSpec {
  int input_dim = 0;
  std::vector<LayerSpec> hidden;
  int output_dim = 1;
  int kernel_size = 3;

  void validate() const;
};

// Resolved per-layer geometry, hidden layers followed by the output layer.
struct LayerShape {
  LayerKind kind;
  Activation activation;  // ignored for the output layer
  bool is_output;
  int in_channels, in_length;
  int out_channels, out_length;
  std::vector<int> weight_dims, bias_dims;
};

std::vector<LayerShape> plan_layers(const NetworkSpec& spec);
std::size_t parameter_count(const NetworkSpec& spec);

struct NetworkState {
  std::vector<Tensor> weights, biases;
  std::vector<Tensor> m_w, v_w;  // Adam first/second moments, weight tensors
  std::vector<Tensor> m_b, v_b;
  std::uint64_t step_count = 0;
};

// Fan-in scaled uniform weights, zero biases, zero moments.
NetworkState init_network(const NetworkSpec& spec, std::uint64_t seed);

void validate_state(const NetworkSpec& spec, const NetworkState& state);

RealVector forward(const NetworkSpec& spec, const NetworkState& state, const RealVector& input);

// Low-level kernels shared with the gradient tape.
namespace detail {
void dense_forward(const Tensor& w, const Tensor& b, const RealVector& x, RealVector& y);
void conv1d_forward(const Tensor& w, const Tensor& b, int in_len, const RealVector& x,
                    RealVector& y);
void activation_forward(Activation act, const RealVector& pre, RealVector& post);
}  // namespace detail

}  // namespace invopt::nn
