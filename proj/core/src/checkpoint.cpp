#include "invopt/nn/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "json.hpp"

#include "invopt/iohash.hpp"

namespace invopt::nn {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'P', 'X', 'N', 'N'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
  const auto bits = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

struct Cursor {
  const std::string& buf;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > buf.size()) throw IoError("checkpoint: truncated file");
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<unsigned char>(buf[pos]) |
                      (std::uint16_t(static_cast<unsigned char>(buf[pos + 1])) << 8);
    pos += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= std::uint32_t(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
      bits |= std::uint64_t(static_cast<unsigned char>(buf[pos + i])) << (8 * i);
    pos += 8;
    return std::bit_cast<double>(bits);
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

void put_tensor(std::string& out, const Tensor& t) {
  put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
  for (int d : t.dims) put_u32(out, static_cast<std::uint32_t>(d));
  for (double v : t.data) put_f64(out, v);
}

Tensor get_tensor(Cursor& c) {
  const std::uint32_t rank = c.u32();
  if (rank > 4) throw IoError("checkpoint: implausible tensor rank");
  std::vector<int> dims(rank);
  for (auto& d : dims) d = static_cast<int>(c.u32());
  Tensor t(dims);
  for (double& v : t.data) v = c.f64();
  return t;
}

json spec_to_json(const NetworkSpec& s) {
  json layers = json::array();
  for (const LayerSpec& l : s.hidden)
    layers.push_back({{"kind", l.kind == LayerKind::dense ? "dense" : "conv1d"},
                      {"width", l.width},
                      {"activation", l.activation == Activation::relu ? "relu" : "tanh"}});
  return {{"input_dim", s.input_dim},
          {"output_dim", s.output_dim},
          {"kernel_size", s.kernel_size},
          {"hidden", layers}};
}

NetworkSpec spec_from_json(const json& j) {
  NetworkSpec s;
  s.input_dim = j.at("input_dim").get<int>();
  s.output_dim = j.at("output_dim").get<int>();
  s.kernel_size = j.at("kernel_size").get<int>();
  for (const json& l : j.at("hidden")) {
    LayerSpec ls;
    const std::string kind = l.at("kind").get<std::string>();
    if (kind == "dense")
      ls.kind = LayerKind::dense;
    else if (kind == "conv1d")
      ls.kind = LayerKind::conv1d;
    else
      throw IoError("checkpoint: unknown layer kind " + kind);
    ls.width = l.at("width").get<int>();
    const std::string act = l.at("activation").get<std::string>();
    if (act == "relu")
      ls.activation = Activation::relu;
    else if (act == "tanh")
      ls.activation = Activation::tanh;
    else
      throw IoError("checkpoint: unknown activation " + act);
    s.hidden.push_back(ls);
  }
  return s;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& c) {
  c.spec.validate();
  validate_state(c.spec, c.state);
  json header = {{"network", spec_to_json(c.spec)},
                 {"adam",
                  {{"beta1", c.adam.beta1},
                   {"beta2", c.adam.beta2},
                   {"epsilon", c.adam.epsilon},
                   {"learning_rate", c.learning_rate},
                   {"step_count", c.state.step_count}}}};
  if (!c.extra_json.empty()) header["extra"] = json::parse(c.extra_json);

  std::string out(kMagic, 4);
  put_u16(out, kVersion);
  const std::string hj = header.dump();
  put_u32(out, static_cast<std::uint32_t>(hj.size()));
  out += hj;
  put_tensor(out, c.fourier.b);
  for (std::size_t l = 0; l < c.state.weights.size(); ++l) {
    put_tensor(out, c.state.weights[l]);
    put_tensor(out, c.state.biases[l]);
  }
  return out;
}

Checkpoint parse_checkpoint(const std::string& bytes) {
  Cursor cur{bytes};
  if (cur.bytes(4) != std::string(kMagic, 4)) throw IoError("checkpoint: bad magic");
  const std::uint16_t version = cur.u16();
  if (version != kVersion)
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  const std::uint32_t jlen = cur.u32();
  json header;
  try {
    header = json::parse(cur.bytes(jlen));
  } catch (const json::exception& e) {
    throw IoError(std::string("checkpoint: bad header json: ") + e.what());
  }

  Checkpoint c;
  try {
    c.spec = spec_from_json(header.at("network"));
    const json& a = header.at("adam");
    c.adam.beta1 = a.at("beta1").get<double>();
    c.adam.beta2 = a.at("beta2").get<double>();
    c.adam.epsilon = a.at("epsilon").get<double>();
    c.learning_rate = a.at("learning_rate").get<double>();
    c.state.step_count = a.at("step_count").get<std::uint64_t>();
    if (header.contains("extra")) c.extra_json = header["extra"].dump();
  } catch (const json::exception& e) {
    throw IoError(std::string("checkpoint: bad header fields: ") + e.what());
  }
  c.spec.validate();

  c.fourier.b = get_tensor(cur);
  // Rank 0 is the absent map; a present map is rows x input_dim.
  if (c.fourier.b.rank() != 0 && c.fourier.b.rank() != 2)
    throw IoError("checkpoint: fourier matrix must be rank 2");
  if (c.fourier.rows() > 0 && 2 * c.fourier.rows() != c.spec.input_dim)
    throw IoError("checkpoint: fourier rows inconsistent with network input_dim");

  const auto plan = plan_layers(c.spec);
  for (const LayerShape& s : plan) {
    Tensor w = get_tensor(cur);
    Tensor b = get_tensor(cur);
    if (w.dims != s.weight_dims || b.dims != s.bias_dims)
      throw IoError("checkpoint: tensor shape mismatch, got " + w.shape_string());
    if (!all_finite(w.data) || !all_finite(b.data))
      throw IoError("checkpoint: non-finite weight");
    c.state.weights.push_back(std::move(w));
    c.state.biases.push_back(std::move(b));
  }
  if (cur.pos != bytes.size()) throw IoError("checkpoint: trailing bytes");
  const std::uint64_t steps = c.state.step_count;
  for (const LayerShape& s : plan) {
    c.state.m_w.emplace_back(s.weight_dims);
    c.state.v_w.emplace_back(s.weight_dims);
    c.state.m_b.emplace_back(s.bias_dims);
    c.state.v_b.emplace_back(s.bias_dims);
  }
  c.state.step_count = steps;
  return c;
}

void save_checkpoint(const std::string& path, const Checkpoint& c) {
  write_file_bytes(path, serialize_checkpoint(c));
}

Checkpoint load_checkpoint(const std::string& path) {
  return parse_checkpoint(read_file_bytes(path));
}

}  // namespace invopt::nn
