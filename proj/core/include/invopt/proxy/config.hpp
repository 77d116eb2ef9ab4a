#pragma once

#include <cstdint>
#include <string>

#include "invopt/common.hpp"

namespace invopt::proxy {

// Gaussian input noise scale and the asymmetric penalty on overpredicted
// losses. (0, 1) reproduces the plain squared-error training loss.
struct RegularizationConfig {
  double sigma = 0.0;
  double mu = 1.0;

  void validate() const {
    require(sigma >= 0.0, "sigma must be non-negative");
    require(mu >= 1.0, "mu must be at least 1");
  }
};

struct TrainingConfig {
  int dataset_size = 1;            // number of trajectories
  int samples_per_trajectory = 1;  // parameter draws per trajectory
  int batch_size = 32;
  int epochs = 100;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  std::string target_transform = "identity";  // or "log1p"

  void validate() const {
    require(dataset_size >= 1, "dataset size must be positive");
    require(samples_per_trajectory >= 1, "samples per trajectory must be positive");
    require(batch_size >= 1, "batch size must be positive");
    require(static_cast<long long>(batch_size) <=
                static_cast<long long>(dataset_size) * samples_per_trajectory,
            "batch size exceeds the dataset");
    require(epochs >= 1, "epochs must be positive");
    require(learning_rate > 0.0, "learning rate must be positive");
    require(target_transform == "identity" || target_transform == "log1p",
            "unknown target transform");
  }
};

}  // namespace invopt::proxy
