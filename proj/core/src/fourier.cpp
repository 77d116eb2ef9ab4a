#include "invopt/nn/fourier.hpp"

#include <cmath>
#include <numbers>

#include "invopt/rng.hpp"

namespace invopt::nn {

FourierMap make_fourier_map(int rows, int input_dim, double scale, std::uint64_t seed) {
  require(rows > 0, "fourier map: rows must be positive");
  require(input_dim > 0, "fourier map: input_dim must be positive");
  require(scale > 0.0, "fourier map: scale must be positive");
  FourierMap map;
  map.b = Tensor({rows, input_dim});
  Rng rng = make_rng(derive_seed(seed, "fourier-b"));
  for (double& v : map.b.data) v = normal(rng, 0.0, scale);
  return map;
}

RealVector fourier_features(const FourierMap& map, const RealVector& x) {
  const int m = map.rows(), d = map.input_dim();
  if (static_cast<int>(x.size()) != d)
    throw ConfigError("fourier features: input length " + std::to_string(x.size()) +
                      " does not match map input_dim " + std::to_string(d));
  RealVector out(2 * static_cast<std::size_t>(m));
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (int r = 0; r < m; ++r) {
    double dot = 0.0;
    for (int j = 0; j < d; ++j) dot += map.b.at2(r, j) * x[j];
    out[r] = std::sin(two_pi * dot);
    out[m + r] = std::cos(two_pi * dot);
  }
  return out;
}

}  // namespace invopt::nn
