#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "invopt/common.hpp"

namespace invopt::nn {

// Dense row-major tensor of doubles. Rank 1 for biases, rank 2 for dense
// weights [out][in] and Fourier matrices [rows][cols], rank 3 for conv
// kernels [out_ch][in_ch][k].
struct Tensor {
  std::vector<int> dims;
  RealVector data;

  Tensor() = default;
  explicit Tensor(std::vector<int> d) : dims(std::move(d)) {
    data.assign(element_count(), 0.0);
  }

  std::size_t element_count() const {
    std::size_t n = 1;
    for (int d : dims) n *= static_cast<std::size_t>(d);
    return dims.empty() ? 0 : n;
  }

  int rank() const { return static_cast<int>(dims.size()); }

  double& at2(int i, int j) { return data[static_cast<std::size_t>(i) * dims[1] + j]; }
  double at2(int i, int j) const { return data[static_cast<std::size_t>(i) * dims[1] + j]; }

  double& at3(int i, int j, int k) {
    return data[(static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k];
  }
  double at3(int i, int j, int k) const {
    return data[(static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k];
  }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }

  bool same_shape(const Tensor& o) const { return dims == o.dims; }

  std::string shape_string() const;
};

}  // namespace invopt::nn
