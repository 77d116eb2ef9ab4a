#pragma once

#include <string>
#include <utility>
#include <vector>

#include "invopt/common.hpp"
#include "invopt/sim/trajectory.hpp"

namespace invopt::proxy {

// How a target trajectory is squeezed into the network input: slot_count
// uniformly subsampled (frame, component) entries, followed by the raw
// control parameters, optionally lifted jointly through Fourier features.
struct EncodingDescriptor {
  std::string system_id;
  int slot_count = 0;  // 0 for analytic systems: parameters only
  int param_count = 0;
  int fourier_rows = 0;  // 0 disables the lift
  double fourier_scale = 1.0;

  int raw_input_dim() const { return slot_count + param_count; }
  int network_input_dim() const {
    return fourier_rows > 0 ? 2 * fourier_rows : raw_input_dim();
  }
  void validate() const;

  bool operator==(const EncodingDescriptor&) const = default;

  std::string to_json() const;
  static EncodingDescriptor from_json(const std::string& json);
};

// The (frame, component) index selected for each slot.
std::vector<std::pair<int, int>> encoding_slot_map(const EncodingDescriptor& enc,
                                                   int frame_count, int frame_width);

RealVector encode_trajectory(const sim::Trajectory& y, const EncodingDescriptor& enc);

}  // namespace invopt::proxy
