#pragma once

#include <vector>

#include "invopt/common.hpp"
#include "invopt/nn/fourier.hpp"
#include "invopt/nn/network.hpp"

namespace invopt::nn {

// Per-layer gradients with the same shapes as NetworkState weight tensors.
struct GradientSet {
  std::vector<Tensor> weights, biases;

  void zero();
  // this += other * scale
  void add_scaled(const GradientSet& other, double scale);
  void scale(double factor);
};

GradientSet make_gradients(const NetworkSpec& spec);

// Append-only record of the forward primitives of one scalar evaluation.
// Pipelines are linear: each applied op consumes the previous value.
// backward() replays the log once in reverse and accumulates gradients for
// the network weights and the original leaf input.
class GradientTape {
 public:
  void begin(const RealVector& x);
  void apply_fourier(const FourierMap& map);
  void apply_network(const NetworkSpec& spec, const NetworkState& state);
  void apply_squared_error(double target);
  void apply_scale(double factor);
  void apply_expm1();

  const RealVector& value() const;
  double scalar() const;

  struct Backward {
    GradientSet grads;       // empty tensors when no network was recorded
    RealVector grad_input;   // gradient at the leaf
    double output = 0.0;
  };

  Backward backward() const;
  void backward_into(Backward& out) const;

  void reset();

 private:
  enum class Op { leaf, fourier, dense, conv1d, activation, squared_error, scale_op, expm1_op };

  struct Rec {
    Op op;
    int layer = -1;          // network layer index for dense/conv1d/activation
    RealVector in;           // saved input where backward needs it
    RealVector out;          // saved output where backward needs it
    double a = 0.0;          // target or factor
  };

  std::vector<Rec> recs_;
  RealVector cur_;
  bool started_ = false;
  const NetworkSpec* spec_ = nullptr;
  const NetworkState* state_ = nullptr;
  const FourierMap* fourier_ = nullptr;
  std::vector<LayerShape> plan_;
};

}  // namespace invopt::nn
