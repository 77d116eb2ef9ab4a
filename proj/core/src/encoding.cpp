#include "invopt/proxy/encoding.hpp"

#include "json.hpp"

namespace invopt::proxy {

void EncodingDescriptor::validate() const {
  require(!system_id.empty(), "encoding needs a system id");
  require(slot_count >= 0, "slot count must be non-negative");
  require(param_count >= 1, "encoding needs at least one parameter");
  require(fourier_rows >= 0, "fourier rows must be non-negative");
  require(fourier_scale > 0.0, "fourier scale must be positive");
}

std::string EncodingDescriptor::to_json() const {
  nlohmann::json j{{"system_id", system_id},
                   {"slot_count", slot_count},
                   {"param_count", param_count},
                   {"fourier_rows", fourier_rows},
                   {"fourier_scale", fourier_scale}};
  return j.dump();
}

EncodingDescriptor EncodingDescriptor::from_json(const std::string& json) {
  nlohmann::json j = nlohmann::json::parse(json, nullptr, false);
  if (j.is_discarded()) throw IoError("malformed encoding json");
  EncodingDescriptor enc;
  try {
    enc.system_id = j.at("system_id").get<std::string>();
    enc.slot_count = j.at("slot_count").get<int>();
    enc.param_count = j.at("param_count").get<int>();
    enc.fourier_rows = j.at("fourier_rows").get<int>();
    enc.fourier_scale = j.at("fourier_scale").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("encoding json missing field: ") + e.what());
  }
  enc.validate();
  return enc;
}

std::vector<std::pair<int, int>> encoding_slot_map(const EncodingDescriptor& enc,
                                                   int frame_count, int frame_width) {
  enc.validate();
  require(frame_count >= 1 && frame_width >= 1, "trajectory shape must be positive");
  const std::size_t total =
      static_cast<std::size_t>(frame_count) * static_cast<std::size_t>(frame_width);
  require(total >= static_cast<std::size_t>(enc.slot_count),
          "trajectory too short for the encoding slot budget");
  std::vector<std::pair<int, int>> map;
  map.reserve(enc.slot_count);
  for (int j = 0; j < enc.slot_count; ++j) {
    const std::size_t flat = total * static_cast<std::size_t>(j) /
                             static_cast<std::size_t>(enc.slot_count);
    map.emplace_back(static_cast<int>(flat / frame_width),
                     static_cast<int>(flat % frame_width));
  }
  return map;
}

RealVector encode_trajectory(const sim::Trajectory& y, const EncodingDescriptor& enc) {
  y.validate();
  require(y.system_id == enc.system_id, "trajectory/encoding system mismatch");
  if (enc.slot_count == 0) {
    enc.validate();
    return {};
  }
  const auto map = encoding_slot_map(enc, static_cast<int>(y.frames.size()),
                                     static_cast<int>(y.frames.front().size()));
  RealVector out(enc.slot_count);
  for (int j = 0; j < enc.slot_count; ++j)
    out[j] = y.frames[map[j].first][map[j].second];
  return out;
}

}  // namespace invopt::proxy
