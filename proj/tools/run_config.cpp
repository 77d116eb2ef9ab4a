#include "run_config.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "invopt/rng.hpp"
#include "invopt/sim/billiards.hpp"
#include "invopt/sim/burgers.hpp"
#include "invopt/sim/kuramoto.hpp"

namespace invopt::cli {

using nlohmann::json;

namespace {

[[noreturn]] void bad_key(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "': " + what);
}

template <class T>
T as(const json& v, const std::string& key) {
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    bad_key(key, e.what());
  }
}

std::vector<proxy::RegularizationConfig> as_sweep(const json& v, const std::string& key) {
  if (!v.is_array() || v.empty()) bad_key(key, "expected a nonempty array");
  std::vector<proxy::RegularizationConfig> sweep;
  for (const json& item : v) {
    if (!item.is_object()) bad_key(key, "entries must be {sigma, mu} objects");
    proxy::RegularizationConfig reg;
    for (const auto& [k, val] : item.items()) {
      if (k == "sigma")
        reg.sigma = as<double>(val, key);
      else if (k == "mu")
        reg.mu = as<double>(val, key);
      else
        bad_key(key, "unknown entry field '" + k + "'");
    }
    reg.validate();
    sweep.push_back(reg);
  }
  return sweep;
}

json sweep_json(const std::vector<proxy::RegularizationConfig>& sweep) {
  json arr = json::array();
  for (const auto& reg : sweep) arr.push_back({{"sigma", reg.sigma}, {"mu", reg.mu}});
  return arr;
}

// Applies the flat `sim` object onto the system's spec type; keys the system
// does not have are rejected.
template <class Spec>
Spec apply_sim(const json& sim, Spec spec,
               const std::map<std::string, std::function<void(Spec&, const json&)>>& fields) {
  for (const auto& [k, v] : sim.items()) {
    const auto it = fields.find(k);
    if (it == fields.end()) bad_key("sim." + k, "unknown simulator field for this system");
    it->second(spec, v);
  }
  return spec;
}

sim::BurgersSpec burgers_spec(const json& sim) {
  using S = sim::BurgersSpec;
  static const std::map<std::string, std::function<void(S&, const json&)>> fields{
      {"grid_points", [](S& s, const json& v) { s.grid_points = as<int>(v, "sim.grid_points"); }},
      {"domain_length",
       [](S& s, const json& v) { s.domain_length = as<double>(v, "sim.domain_length"); }},
      {"frame_count", [](S& s, const json& v) { s.frame_count = as<int>(v, "sim.frame_count"); }},
      {"frame_interval",
       [](S& s, const json& v) { s.frame_interval = as<double>(v, "sim.frame_interval"); }},
      {"internal_dt", [](S& s, const json& v) { s.internal_dt = as<double>(v, "sim.internal_dt"); }},
  };
  return apply_sim(sim, S{}, fields);
}

sim::KSSpec ks_spec(const json& sim) {
  using S = sim::KSSpec;
  static const std::map<std::string, std::function<void(S&, const json&)>> fields{
      {"grid_points", [](S& s, const json& v) { s.grid_points = as<int>(v, "sim.grid_points"); }},
      {"domain_length",
       [](S& s, const json& v) { s.domain_length = as<double>(v, "sim.domain_length"); }},
      {"end_time", [](S& s, const json& v) { s.end_time = as<double>(v, "sim.end_time"); }},
      {"frame_interval",
       [](S& s, const json& v) { s.frame_interval = as<double>(v, "sim.frame_interval"); }},
      {"internal_dt", [](S& s, const json& v) { s.internal_dt = as<double>(v, "sim.internal_dt"); }},
  };
  return apply_sim(sim, S{}, fields);
}

sim::BilliardsSpec billiards_spec(const json& sim, bool racked_close) {
  using S = sim::BilliardsSpec;
  static const std::map<std::string, std::function<void(S&, const json&)>> fields{
      {"table_width", [](S& s, const json& v) { s.table_width = as<double>(v, "sim.table_width"); }},
      {"table_height",
       [](S& s, const json& v) { s.table_height = as<double>(v, "sim.table_height"); }},
      {"ball_radius", [](S& s, const json& v) { s.ball_radius = as<double>(v, "sim.ball_radius"); }},
      {"friction_mu", [](S& s, const json& v) { s.friction_mu = as<double>(v, "sim.friction_mu"); }},
      {"restitution", [](S& s, const json& v) { s.restitution = as<double>(v, "sim.restitution"); }},
      {"gravity", [](S& s, const json& v) { s.gravity = as<double>(v, "sim.gravity"); }},
      {"keyframe_count",
       [](S& s, const json& v) { s.keyframe_count = as<int>(v, "sim.keyframe_count"); }},
      {"cue_start_x", [](S& s, const json& v) { s.cue_start_x = as<double>(v, "sim.cue_start_x"); }},
      {"cue_speed", [](S& s, const json& v) { s.cue_speed = as<double>(v, "sim.cue_speed"); }},
  };
  S spec;
  if (racked_close) spec.target_positions = sim::rack_triangle(0.9, 0.5, spec.ball_radius);
  return apply_sim(sim, spec, fields);
}

}  // namespace

void set_field(RunConfig& cfg, const std::string& key, const json& value) {
  if (key == "system")
    cfg.system = as<std::string>(value, key);
  else if (key == "seed")
    cfg.seed = as<std::uint64_t>(value, key);
  else if (key == "problem_seed")
    cfg.problem_seed = as<std::uint64_t>(value, key);
  else if (key == "problem_count")
    cfg.problem_count = as<int>(value, key);
  else if (key == "samples_per_trajectory")
    cfg.samples_per_trajectory = as<int>(value, key);
  else if (key == "batch_size")
    cfg.batch_size = as<int>(value, key);
  else if (key == "epochs")
    cfg.epochs = as<int>(value, key);
  else if (key == "learning_rate")
    cfg.learning_rate = as<double>(value, key);
  else if (key == "target_transform")
    cfg.target_transform = as<std::string>(value, key);
  else if (key == "architecture")
    cfg.architecture = as<std::string>(value, key);
  else if (key == "activation")
    cfg.activation = as<std::string>(value, key);
  else if (key == "hidden")
    cfg.hidden = as<std::vector<int>>(value, key);
  else if (key == "kernel_size")
    cfg.kernel_size = as<int>(value, key);
  else if (key == "slot_count")
    cfg.slot_count = as<int>(value, key);
  else if (key == "fourier_rows")
    cfg.fourier_rows = as<int>(value, key);
  else if (key == "fourier_scale")
    cfg.fourier_scale = as<double>(value, key);
  else if (key == "regularization_sweep")
    cfg.regularization_sweep = as_sweep(value, key);
  else if (key == "benchmark_problems")
    cfg.benchmark_problems = as<int>(value, key);
  else if (key == "methods")
    cfg.methods = as<std::vector<std::string>>(value, key);
  else if (key == "gd_learning_rate")
    cfg.gd_learning_rate = as<double>(value, key);
  else if (key == "gd_max_iter")
    cfg.gd_max_iter = as<int>(value, key);
  else if (key == "thresholds")
    cfg.thresholds = as<std::vector<double>>(value, key);
  else if (key == "landscape_resolution")
    cfg.landscape_resolution = as<std::vector<int>>(value, key);
  else if (key == "optimize_start")
    cfg.optimize_start = as<std::vector<double>>(value, key);
  else if (key == "bounds_low")
    cfg.bounds_low = as<std::vector<double>>(value, key);
  else if (key == "bounds_high")
    cfg.bounds_high = as<std::vector<double>>(value, key);
  else if (key == "out_dir")
    cfg.out_dir = as<std::string>(value, key);
  else if (key == "sim") {
    if (!value.is_object()) bad_key(key, "expected an object");
    cfg.sim = value;
  } else if (key == "paper_scale") {
    if (!value.is_object()) bad_key(key, "expected an object");
    if (value.contains("paper_scale")) bad_key(key, "cannot nest paper_scale");
    cfg.paper_scale = value;
  } else {
    bad_key(key, "unknown key");
  }
}

RunConfig parse_run_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
  RunConfig cfg;
  for (const auto& [key, value] : doc.items()) set_field(cfg, key, value);
  cfg.validate();
  return cfg;
}

std::string run_config_json(const RunConfig& cfg) {
  const json doc{
      {"system", cfg.system},
      {"seed", cfg.seed},
      {"problem_seed", cfg.problem_seed},
      {"problem_count", cfg.problem_count},
      {"samples_per_trajectory", cfg.samples_per_trajectory},
      {"batch_size", cfg.batch_size},
      {"epochs", cfg.epochs},
      {"learning_rate", cfg.learning_rate},
      {"target_transform", cfg.target_transform},
      {"architecture", cfg.architecture},
      {"activation", cfg.activation},
      {"hidden", cfg.hidden},
      {"kernel_size", cfg.kernel_size},
      {"slot_count", cfg.slot_count},
      {"fourier_rows", cfg.fourier_rows},
      {"fourier_scale", cfg.fourier_scale},
      {"regularization_sweep", sweep_json(cfg.regularization_sweep)},
      {"benchmark_problems", cfg.benchmark_problems},
      {"methods", cfg.methods},
      {"gd_learning_rate", cfg.gd_learning_rate},
      {"gd_max_iter", cfg.gd_max_iter},
      {"thresholds", cfg.thresholds},
      {"landscape_resolution", cfg.landscape_resolution},
      {"optimize_start", cfg.optimize_start},
      {"bounds_low", cfg.bounds_low},
      {"bounds_high", cfg.bounds_high},
      {"out_dir", cfg.out_dir},
      {"sim", cfg.sim},
      {"paper_scale", cfg.paper_scale},
  };
  return doc.dump(2);
}

void apply_set_flag(RunConfig& cfg, const std::string& key_equals_value) {
  const auto eq = key_equals_value.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("--set expects key=value, got '" + key_equals_value + "'");
  const std::string key = key_equals_value.substr(0, eq);
  const std::string raw = key_equals_value.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;  // bare strings need no quotes
  set_field(cfg, key, value);
}

void apply_paper_scale(RunConfig& cfg) {
  const json overrides = cfg.paper_scale;
  for (const auto& [key, value] : overrides.items()) set_field(cfg, key, value);
}

void RunConfig::validate() const {
  config_kind(*this);
  require(problem_count >= 1, "problem_count must be positive");
  require(samples_per_trajectory >= 1, "samples_per_trajectory must be positive");
  require(architecture == "dense" || architecture == "conv",
          "architecture must be dense or conv");
  require(activation == "tanh" || activation == "relu", "activation must be tanh or relu");
  require(!hidden.empty(), "hidden layer list is empty");
  for (int w : hidden) require(w >= 1, "hidden widths must be positive");
  require(!regularization_sweep.empty(), "regularization_sweep is empty");
  for (const auto& reg : regularization_sweep) reg.validate();
  require(benchmark_problems >= 1, "benchmark_problems must be positive");
  require(bounds_low.size() == bounds_high.size(), "bounds_low/bounds_high length mismatch");
  require(!out_dir.empty(), "out_dir is empty");
  for (const std::string& m : methods) eval::method_from_string(m);
}

landscape::SystemKind config_kind(const RunConfig& cfg) {
  return landscape::system_from_string(cfg.system);
}

proxy::EncodingDescriptor config_encoding(const RunConfig& cfg) {
  proxy::EncodingDescriptor enc;
  enc.system_id = cfg.system;
  enc.slot_count = cfg.slot_count;
  enc.param_count =
      static_cast<int>(landscape::system_param_names(config_kind(cfg)).size());
  enc.fourier_rows = cfg.fourier_rows;
  enc.fourier_scale = cfg.fourier_scale;
  enc.validate();
  return enc;
}

namespace {

proxy::TrainingConfig training_fields(const RunConfig& cfg) {
  proxy::TrainingConfig t;
  t.dataset_size = cfg.problem_count;
  t.samples_per_trajectory = cfg.samples_per_trajectory;
  t.batch_size = cfg.batch_size;
  t.epochs = cfg.epochs;
  t.learning_rate = cfg.learning_rate;
  t.seed = cfg.seed;
  t.target_transform = cfg.target_transform;
  return t;
}

}  // namespace

proxy::TrainingConfig config_training(const RunConfig& cfg) {
  proxy::TrainingConfig t = training_fields(cfg);
  t.validate();
  return t;
}

proxy::TrainingConfig config_sampling(const RunConfig& cfg) {
  proxy::TrainingConfig t = training_fields(cfg);
  // Batching only exists during training; generation draws every sample
  // regardless, so a batch wider than a deliberately small dataset is fine.
  const long long total =
      static_cast<long long>(t.dataset_size) * t.samples_per_trajectory;
  t.batch_size = static_cast<int>(std::min<long long>(t.batch_size, total));
  t.validate();
  return t;
}

std::vector<nn::LayerSpec> config_hidden(const RunConfig& cfg) {
  const nn::LayerKind kind =
      cfg.architecture == "conv" ? nn::LayerKind::conv1d : nn::LayerKind::dense;
  const nn::Activation act =
      cfg.activation == "relu" ? nn::Activation::relu : nn::Activation::tanh;
  std::vector<nn::LayerSpec> layers;
  for (int w : cfg.hidden) layers.push_back({kind, w, act});
  return layers;
}

landscape::ProblemOptions config_problem_options(const RunConfig& cfg) {
  const landscape::SystemKind kind = config_kind(cfg);
  landscape::ProblemOptions options;
  if (!cfg.bounds_low.empty()) options.bounds = Box{cfg.bounds_low, cfg.bounds_high};
  switch (kind) {
    case landscape::SystemKind::gramacy_lee:
    case landscape::SystemKind::rastrigin:
      require(cfg.sim.empty(), "analytic systems take no sim overrides");
      break;
    case landscape::SystemKind::burgers:
      options.spec = burgers_spec(cfg.sim);
      break;
    case landscape::SystemKind::kuramoto_sivashinsky:
      options.spec = ks_spec(cfg.sim);
      break;
    case landscape::SystemKind::billiards2d:
      options.spec = billiards_spec(cfg.sim, false);
      break;
    case landscape::SystemKind::billiards4d:
      options.spec = billiards_spec(cfg.sim, true);
      break;
  }
  return options;
}

eval::BenchmarkConfig config_benchmark(const RunConfig& cfg) {
  eval::BenchmarkConfig b;
  b.kind = config_kind(cfg);
  b.problem_count = cfg.benchmark_problems;
  b.methods.clear();
  for (const std::string& m : cfg.methods) b.methods.push_back(eval::method_from_string(m));
  b.seed = cfg.seed;
  b.gd_learning_rate = cfg.gd_learning_rate;
  b.gd_max_iter = cfg.gd_max_iter;
  b.thresholds = cfg.thresholds;
  b.validate();
  return b;
}

landscape::InverseProblem config_problem(const RunConfig& cfg, int index) {
  return landscape::make_problem(config_kind(cfg),
                                 derive_seed(cfg.problem_seed, "problem", index),
                                 config_problem_options(cfg));
}

std::vector<landscape::InverseProblem> config_problems(const RunConfig& cfg, int count) {
  std::vector<landscape::InverseProblem> problems;
  problems.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) problems.push_back(config_problem(cfg, i));
  return problems;
}

}  // namespace invopt::cli
