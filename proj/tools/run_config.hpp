#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "invopt/eval/benchmark.hpp"
#include "invopt/landscape/systems.hpp"
#include "invopt/nn/network.hpp"
#include "invopt/proxy/config.hpp"
#include "invopt/proxy/encoding.hpp"
#include "json.hpp"

namespace invopt::cli {

// One flat configuration drives every subcommand. Every field has a default
// and the full resolved set is echoed into each run's metadata, so a run can
// be reproduced from its meta.json alone.
struct RunConfig {
  std::string system = "gramacy_lee";
  std::uint64_t seed = 0;
  std::uint64_t problem_seed = 0;

  // dataset
  int problem_count = 1;
  int samples_per_trajectory = 256;

  // training
  int batch_size = 32;
  int epochs = 30;
  double learning_rate = 1e-3;
  std::string target_transform = "identity";

  // network
  std::string architecture = "dense";  // dense | conv
  std::string activation = "tanh";     // tanh | relu
  std::vector<int> hidden{32, 32};
  int kernel_size = 3;

  // encoding
  int slot_count = 0;
  int fourier_rows = 0;
  double fourier_scale = 1.0;

  // one model is trained per entry
  std::vector<proxy::RegularizationConfig> regularization_sweep{{0.0, 1.0}};

  // benchmark
  int benchmark_problems = 32;
  std::vector<std::string> methods{"two_step", "bfgs", "gd"};
  double gd_learning_rate = 1e-3;
  int gd_max_iter = 500;
  std::vector<double> thresholds;  // empty: defaults from the search box

  std::vector<int> landscape_resolution{200};
  std::vector<double> optimize_start;  // empty: center of the search box

  // empty: stock system box
  std::vector<double> bounds_low, bounds_high;

  std::string out_dir = "out";

  // simulator knob overrides, validated against the selected system
  nlohmann::json sim = nlohmann::json::object();
  // flat field overrides applied by --paper-scale
  nlohmann::json paper_scale = nlohmann::json::object();

  void validate() const;
};

// Assigns one flat field; unknown keys and wrong JSON types are rejected.
void set_field(RunConfig& cfg, const std::string& key, const nlohmann::json& value);

RunConfig parse_run_config(const std::string& json_text);
std::string run_config_json(const RunConfig& cfg);  // canonical full echo

// --set key=value: value is parsed as JSON when possible, else as a string.
void apply_set_flag(RunConfig& cfg, const std::string& key_equals_value);
void apply_paper_scale(RunConfig& cfg);

landscape::SystemKind config_kind(const RunConfig& cfg);
proxy::EncodingDescriptor config_encoding(const RunConfig& cfg);
proxy::TrainingConfig config_training(const RunConfig& cfg);

// Same fields with the batch size clamped to the sample count; dataset
// generation never batches, so an oversized batch must not block it.
proxy::TrainingConfig config_sampling(const RunConfig& cfg);
std::vector<nn::LayerSpec> config_hidden(const RunConfig& cfg);
landscape::ProblemOptions config_problem_options(const RunConfig& cfg);
eval::BenchmarkConfig config_benchmark(const RunConfig& cfg);

// Problem i of a seeded family, honoring bounds and simulator overrides.
landscape::InverseProblem config_problem(const RunConfig& cfg, int index);
std::vector<landscape::InverseProblem> config_problems(const RunConfig& cfg, int count);

}  // namespace invopt::cli
