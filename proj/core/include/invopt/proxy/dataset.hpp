#pragma once

#include <vector>

#include "invopt/landscape/problem.hpp"
#include "invopt/proxy/config.hpp"
#include "invopt/proxy/encoding.hpp"

namespace invopt::proxy {

// Flat sample store: per sample the encoded target trajectory, the raw drawn
// parameters, and the true configuration loss.
struct Dataset {
  std::string system_id;
  EncodingDescriptor encoding;
  std::uint64_t seed = 0;
  int samples_per_trajectory = 1;
  std::size_t attempted = 0;
  std::size_t skipped = 0;
  std::vector<RealVector> encoded_targets;
  std::vector<RealVector> params;
  RealVector losses;

  std::size_t size() const { return losses.size(); }
  void validate() const;
};

// Draws samples_per_trajectory uniform parameter points per problem and
// records the simulated loss. Failed simulations are skipped; more than 1%
// skips fail the run.
Dataset generate_dataset(const std::vector<landscape::InverseProblem>& problems,
                         const EncodingDescriptor& encoding, const TrainingConfig& config);

void save_dataset(const std::string& path, const Dataset& data);
Dataset load_dataset(const std::string& path);

}  // namespace invopt::proxy
