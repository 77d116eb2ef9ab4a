#include "invopt/proxy/dataset.hpp"

#include <atomic>
#include <bit>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>

#include "invopt/iohash.hpp"
#include "invopt/rng.hpp"
#include "json.hpp"

namespace invopt::proxy {

void Dataset::validate() const {
  encoding.validate();
  require(system_id == encoding.system_id, "dataset/encoding system mismatch");
  require(samples_per_trajectory >= 1, "samples per trajectory must be positive");
  require(encoded_targets.size() == losses.size() && params.size() == losses.size(),
          "dataset column length mismatch");
  require(attempted >= size() + skipped, "dataset sample accounting is inconsistent");
  for (std::size_t i = 0; i < size(); ++i) {
    require(encoded_targets[i].size() == static_cast<std::size_t>(encoding.slot_count),
            "encoded target width mismatch");
    require(params[i].size() == static_cast<std::size_t>(encoding.param_count),
            "parameter width mismatch");
    require(all_finite(encoded_targets[i]) && all_finite(params[i]), "dataset not finite");
    require(std::isfinite(losses[i]) && losses[i] >= 0.0,
            "target loss must be finite and non-negative");
  }
}

Dataset generate_dataset(const std::vector<landscape::InverseProblem>& problems,
                         const EncodingDescriptor& encoding, const TrainingConfig& config) {
  require(!problems.empty(), "dataset needs at least one problem");
  encoding.validate();
  config.validate();
  require(static_cast<std::size_t>(config.dataset_size) == problems.size(),
          "dataset_size must match the number of problems");
  for (const auto& p : problems) {
    require(p.system_id == encoding.system_id, "problem/encoding system mismatch");
    require(p.true_params.values.size() == static_cast<std::size_t>(encoding.param_count),
            "problem/encoding parameter count mismatch");
  }

  const int n = config.samples_per_trajectory;
  struct Block {
    std::vector<RealVector> params;
    RealVector losses;
    std::size_t skipped = 0;
  };
  std::vector<Block> blocks(problems.size());
  std::vector<RealVector> encoded(problems.size());

  const std::int64_t count = static_cast<std::int64_t>(problems.size());
  std::exception_ptr error = nullptr;
  std::atomic<bool> failed{false};
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t pi = 0; pi < count; ++pi) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      const landscape::InverseProblem& problem = problems[static_cast<std::size_t>(pi)];
      Block& block = blocks[static_cast<std::size_t>(pi)];
      encoded[static_cast<std::size_t>(pi)] = encode_trajectory(problem.target, encoding);
      Rng rng = make_rng(derive_seed(config.seed, "sample-params",
                                     static_cast<std::uint64_t>(pi)));
      for (int j = 0; j < n; ++j) {
        const RealVector xs = uniform_in_box(rng, problem.true_params.bounds);
        try {
          const double loss = problem.configuration_loss(xs);
          block.params.push_back(xs);
          block.losses.push_back(loss);
        } catch (const NumericError& e) {
#pragma omp critical
          std::cerr << "dataset: skipped " << problem.system_id << " sample " << pi
                    << "/" << j << ": " << e.what() << "\n";
          ++block.skipped;
        }
      }
    } catch (...) {
#pragma omp critical
      if (!failed.exchange(true)) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  Dataset data;
  data.system_id = encoding.system_id;
  data.encoding = encoding;
  data.seed = config.seed;
  data.samples_per_trajectory = n;
  data.attempted = problems.size() * static_cast<std::size_t>(n);
  for (std::size_t pi = 0; pi < blocks.size(); ++pi) {
    const Block& block = blocks[pi];
    data.skipped += block.skipped;
    for (std::size_t j = 0; j < block.losses.size(); ++j) {
      data.encoded_targets.push_back(encoded[pi]);
      data.params.push_back(block.params[j]);
      data.losses.push_back(block.losses[j]);
    }
  }
  if (100 * data.skipped > data.attempted) {
    std::ostringstream msg;
    msg << "dataset generation skipped " << data.skipped << " of " << data.attempted
        << " samples (over 1%)";
    throw NumericError(msg.str());
  }
  data.validate();
  return data;
}

namespace {

constexpr char kMagic[4] = {'I', 'V', 'D', 'S'};
constexpr std::uint16_t kVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

struct Reader {
  const std::string& bytes;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > bytes.size()) throw IoError("dataset file truncated");
  }
  std::uint16_t u16() {
    need(2);
    const auto b = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
    pos += 2;
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(
               static_cast<unsigned char>(bytes[pos + static_cast<std::size_t>(i)]))
           << (8 * i);
    pos += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(
               static_cast<unsigned char>(bytes[pos + static_cast<std::size_t>(i)]))
           << (8 * i);
    pos += 8;
    return std::bit_cast<double>(v);
  }
};

}  // namespace

void save_dataset(const std::string& path, const Dataset& data) {
  data.validate();
  nlohmann::json header{{"system_id", data.system_id},
                        {"encoding", nlohmann::json::parse(data.encoding.to_json())},
                        {"seed", data.seed},
                        {"samples_per_trajectory", data.samples_per_trajectory},
                        {"sample_count", data.size()},
                        {"attempted", data.attempted},
                        {"skipped", data.skipped}};
  const std::string json = header.dump();

  std::string out;
  out.append(kMagic, 4);
  put_u16(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(json.size()));
  out.append(json);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.encoded_targets[i]) put_f64(out, v);
    for (double v : data.params[i]) put_f64(out, v);
    put_f64(out, data.losses[i]);
  }
  write_file_bytes(path, out);
}

Dataset load_dataset(const std::string& path) {
  const std::string bytes = read_file_bytes(path);
  Reader r{bytes};
  r.need(4);
  if (bytes.compare(0, 4, kMagic, 4) != 0) throw IoError("not a dataset file: " + path);
  r.pos = 4;
  if (r.u16() != kVersion) throw IoError("unsupported dataset version: " + path);
  const std::uint32_t json_len = r.u32();
  r.need(json_len);
  nlohmann::json header =
      nlohmann::json::parse(bytes.substr(r.pos, json_len), nullptr, false);
  if (header.is_discarded()) throw IoError("malformed dataset header: " + path);
  r.pos += json_len;

  Dataset data;
  std::size_t count = 0;
  try {
    data.system_id = header.at("system_id").get<std::string>();
    data.encoding = EncodingDescriptor::from_json(header.at("encoding").dump());
    data.seed = header.at("seed").get<std::uint64_t>();
    data.samples_per_trajectory = header.at("samples_per_trajectory").get<int>();
    data.attempted = header.at("attempted").get<std::size_t>();
    data.skipped = header.at("skipped").get<std::size_t>();
    count = header.at("sample_count").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("dataset header missing field: ") + e.what());
  }
  data.encoded_targets.reserve(count);
  data.params.reserve(count);
  data.losses.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    RealVector enc(data.encoding.slot_count);
    for (double& v : enc) v = r.f64();
    RealVector xs(data.encoding.param_count);
    for (double& v : xs) v = r.f64();
    data.encoded_targets.push_back(std::move(enc));
    data.params.push_back(std::move(xs));
    data.losses.push_back(r.f64());
  }
  if (r.pos != bytes.size()) throw IoError("trailing bytes in dataset file: " + path);
  try {
    data.validate();
  } catch (const ConfigError& e) {
    throw IoError("invalid dataset content: " + std::string(e.what()));
  }
  return data;
}

}  // namespace invopt::proxy
