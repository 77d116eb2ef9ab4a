#pragma once

#include <cstdint>

#include "invopt/common.hpp"
#include "invopt/nn/tensor.hpp"

namespace invopt::nn {

// Random Fourier feature lift x -> [sin(2*pi*B x), cos(2*pi*B x)].
struct FourierMap {
  Tensor b;  // rows x input_dim

  int rows() const { return b.dims.empty() ? 0 : b.dims[0]; }
  int input_dim() const { return b.dims.size() < 2 ? 0 : b.dims[1]; }
  int output_dim() const { return 2 * rows(); }
};

// Entries drawn i.i.d. from N(0, scale^2).
FourierMap make_fourier_map(int rows, int input_dim, double scale, std::uint64_t seed);

RealVector fourier_features(const FourierMap& map, const RealVector& x);

}  // namespace invopt::nn
