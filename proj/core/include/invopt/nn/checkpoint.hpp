#pragma once

#include <string>

#include "invopt/nn/adam.hpp"
#include "invopt/nn/fourier.hpp"
#include "invopt/nn/network.hpp"

namespace invopt::nn {

// Binary container: "PXNN" magic, u16 version, length-prefixed UTF-8 JSON
// header, then the Fourier matrix and every weight/bias tensor as
// little-endian float64 arrays prefixed by rank and dims (u32 each).
// Adam moments are not persisted; loaded states resume with zero moments.
struct Checkpoint {
  NetworkSpec spec;
  NetworkState state;
  FourierMap fourier;  // rows == 0 means no lift
  AdamConfig adam;
  double learning_rate = 0.0;
  std::string extra_json;  // opaque JSON object for higher layers, may be empty
};

std::string serialize_checkpoint(const Checkpoint& c);
Checkpoint parse_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace invopt::nn
