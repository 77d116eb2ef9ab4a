#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "invopt/eval/benchmark.hpp"
#include "invopt/iohash.hpp"
#include "invopt/landscape/grid.hpp"
#include "invopt/opt/objectives.hpp"
#include "invopt/proxy/train.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace invopt;
using namespace invopt::cli;

namespace {

struct Global {
  std::string config_path, preset, data_path, model_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  int jobs = 0;
  bool paper = false, timings = false;
  std::vector<std::string> sets;
  json inputs = json::object();  // label -> {path, sha1}
};

void add_shared_flags(CLI::App* cmd, Global& g) {
  cmd->add_option("--config", g.config_path, "JSON run configuration file");
  cmd->add_option("--preset", g.preset, "named preset shipped with the tool");
  cmd->add_option("--seed", g.seed, "override the configured master seed");
  cmd->add_option("--out", g.out, "override the configured output directory");
  cmd->add_option("--jobs", g.jobs, "cap worker threads (0 keeps the default)");
  cmd->add_flag("--paper-scale", g.paper, "apply the config's paper_scale overrides");
  cmd->add_option("--set", g.sets, "flat key=value config override, repeatable");
}

std::string preset_path(const std::string& name) {
  if (name.find('/') != std::string::npos || name.ends_with(".json")) return name;
  std::vector<std::string> candidates;
  std::error_code ec;
  const fs::path exe = fs::read_symlink("/proc/self/exe", ec);
  if (!ec) candidates.push_back((exe.parent_path() / "presets" / (name + ".json")).string());
#ifdef INVOPT_PRESET_DIR
  candidates.push_back(std::string(INVOPT_PRESET_DIR) + "/" + name + ".json");
#endif
  for (const std::string& c : candidates)
    if (fs::exists(c)) return c;
  throw ConfigError("unknown preset '" + name + "'");
}

void record_input(Global& g, const std::string& label, const std::string& path) {
  g.inputs[label] = {{"path", path}, {"sha1", content_hash_file(path)}};
}

RunConfig resolve_config(Global& g) {
  require(g.config_path.empty() || g.preset.empty(),
          "--config and --preset are mutually exclusive");
  RunConfig cfg;
  std::string path;
  if (!g.preset.empty()) path = preset_path(g.preset);
  if (!g.config_path.empty()) path = g.config_path;
  if (!path.empty()) {
    cfg = parse_run_config(read_file_bytes(path));
    record_input(g, "config", path);
  }
  if (g.paper) apply_paper_scale(cfg);
  if (g.seed) cfg.seed = *g.seed;
  if (g.out) cfg.out_dir = *g.out;
  for (const std::string& s : g.sets) apply_set_flag(cfg, s);
  cfg.validate();
  if (g.jobs > 0) {
#ifdef _OPENMP
    omp_set_num_threads(g.jobs);
#endif
  }
  return cfg;
}

// meta.json: the full resolved config, input hashes, and output hashes.
// Nothing time- or machine-dependent goes in, so reruns hash identically.
void write_meta(const RunConfig& cfg, const std::string& command, const Global& g,
                const json& outputs, const json& extra) {
  json meta{{"tool", "invopt"},
#ifdef INVOPT_VERSION
            {"version", INVOPT_VERSION},
#else
            {"version", "unknown"},
#endif
            {"command", command},
            {"config", json::parse(run_config_json(cfg))},
            {"inputs", g.inputs},
            {"outputs", outputs}};
  if (!extra.empty()) meta["result"] = extra;
  write_file_bytes((fs::path(cfg.out_dir) / "meta.json").string(), meta.dump(2) + "\n");
}

json hash_entry(const fs::path& path) { return content_hash_file(path.string()); }

std::string sigma_tag(int index, double sigma) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%02d_sigma_%g", index, sigma);
  return buf;
}

void cmd_gen_data(const RunConfig& cfg, Global& g) {
  const auto problems = config_problems(cfg, cfg.problem_count);
  const proxy::Dataset data =
      proxy::generate_dataset(problems, config_encoding(cfg), config_sampling(cfg));
  const fs::path out = fs::path(cfg.out_dir) / "dataset.bin";
  proxy::save_dataset(out.string(), data);
  const json extra{{"sample_count", data.size()},
                   {"attempted", data.attempted},
                   {"skipped", data.skipped}};
  write_meta(cfg, "gen-data", g, {{"dataset.bin", hash_entry(out)}}, extra);
  std::printf("wrote %s (%zu samples, %zu skipped)\n", out.c_str(), data.size(),
              data.skipped);
}

void cmd_train(const RunConfig& cfg, Global& g) {
  record_input(g, "dataset", g.data_path);
  const proxy::Dataset data = proxy::load_dataset(g.data_path);
  const proxy::EncodingDescriptor enc = config_encoding(cfg);
  require(enc == data.encoding,
          "dataset encoding does not match the configuration; regenerate the dataset "
          "or align the config");
  const proxy::ProxyModel init = proxy::make_proxy_model(
      enc, config_hidden(cfg), config_training(cfg), {}, cfg.kernel_size);

  json outputs = json::object();
  json runs = json::array();
  for (std::size_t i = 0; i < cfg.regularization_sweep.size(); ++i) {
    const proxy::RegularizationConfig reg = cfg.regularization_sweep[i];
    const proxy::TrainResult result = proxy::train(data, init, reg);
    const std::string tag = sigma_tag(static_cast<int>(i), reg.sigma);
    const fs::path ckpt = fs::path(cfg.out_dir) / ("model_" + tag + ".ckpt");
    const fs::path losses = fs::path(cfg.out_dir) / ("loss_" + tag + ".csv");
    proxy::save_model(ckpt.string(), result.model);
    std::string csv = "epoch,loss\n";
    for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
      char buf[48];
      std::snprintf(buf, sizeof buf, "%zu,%.17g\n", e, result.epoch_losses[e]);
      csv += buf;
    }
    write_file_bytes(losses.string(), csv);
    outputs[ckpt.filename().string()] = hash_entry(ckpt);
    outputs[losses.filename().string()] = hash_entry(losses);
    runs.push_back({{"sigma", reg.sigma},
                    {"mu", reg.mu},
                    {"checkpoint", ckpt.filename().string()},
                    {"loss_history", losses.filename().string()},
                    {"final_epoch_loss", result.epoch_losses.back()}});
    std::printf("trained %s (final epoch loss %.6g)\n", ckpt.c_str(),
                result.epoch_losses.back());
  }
  write_meta(cfg, "train", g, outputs, {{"models", runs}});
}

void cmd_landscape(const RunConfig& cfg, Global& g) {
  const landscape::InverseProblem problem = config_problem(cfg, 0);
  json outputs = json::object();

  const landscape::LandscapeGrid truth = landscape::sample_grid(
      problem, cfg.landscape_resolution, {}, landscape::GridSource::ground_truth);
  const fs::path truth_path = fs::path(cfg.out_dir) / "landscape_truth.csv";
  landscape::save_grid_csv(truth_path.string(), truth);
  outputs["landscape_truth.csv"] = hash_entry(truth_path);
  std::printf("wrote %s (%zu nodes)\n", truth_path.c_str(), truth.node_count());

  if (!g.model_path.empty()) {
    record_input(g, "model", g.model_path);
    const proxy::ProxyModel model = proxy::load_model(g.model_path);
    const opt::Objective surrogate = opt::make_proxy_objective(model, problem);
    const landscape::LandscapeGrid proxy_grid =
        landscape::sample_grid(problem, cfg.landscape_resolution, surrogate.evaluate,
                               landscape::GridSource::proxy);
    const fs::path proxy_path = fs::path(cfg.out_dir) / "landscape_proxy.csv";
    landscape::save_grid_csv(proxy_path.string(), proxy_grid);
    outputs["landscape_proxy.csv"] = hash_entry(proxy_path);
    std::printf("wrote %s (%zu nodes)\n", proxy_path.c_str(), proxy_grid.node_count());
  }
  write_meta(cfg, "landscape", g, outputs, {});
}

void cmd_optimize(const RunConfig& cfg, Global& g) {
  record_input(g, "model", g.model_path);
  const proxy::ProxyModel model = proxy::load_model(g.model_path);
  const landscape::InverseProblem problem = config_problem(cfg, 0);
  const Box& bounds = problem.true_params.bounds;
  RealVector x0 = cfg.optimize_start.empty() ? bounds.center() : cfg.optimize_start;
  require(x0.size() == bounds.dim(), "optimize_start dimension mismatch");
  require(bounds.contains(x0), "optimize_start lies outside the search box");

  const opt::OptResult result = opt::two_step_optimize(model, problem, x0);
  const fs::path trace_path = fs::path(cfg.out_dir) / "optimize_trace.csv";
  opt::save_traces_csv(trace_path.string(), {result.primary_trace, result.secondary_trace},
                       problem.param_names);

  const json doc{
      {"system", cfg.system},
      {"x0", x0},
      {"x_true", problem.true_params.values},
      {"x_predicted", result.x_predicted.values},
      {"primary_termination", opt::to_string(result.primary_trace.termination)},
      {"secondary_termination", opt::to_string(result.secondary_trace.termination)},
      {"primary_final_value", result.primary_trace.final_value()},
      {"secondary_final_value", result.secondary_trace.final_value()},
      {"prediction_error",
       eval::prediction_error(problem.true_params.values, result.x_predicted.values)},
      {"resimulation_error",
       eval::resimulation_error(problem, result.x_predicted.values)},
  };
  const fs::path json_path = fs::path(cfg.out_dir) / "optimize.json";
  write_file_bytes(json_path.string(), doc.dump(2) + "\n");

  write_meta(cfg, "optimize", g,
             {{"optimize.json", hash_entry(json_path)},
              {"optimize_trace.csv", hash_entry(trace_path)}},
             doc);
  std::printf("wrote %s (prediction error %.6g)\n", json_path.c_str(),
              doc["prediction_error"].get<double>());
}

void cmd_benchmark(const RunConfig& cfg, Global& g) {
  const eval::BenchmarkConfig bcfg = config_benchmark(cfg);
  const auto problems = config_problems(cfg, cfg.benchmark_problems);
  std::optional<proxy::ProxyModel> model;
  if (!g.model_path.empty()) {
    record_input(g, "model", g.model_path);
    model = proxy::load_model(g.model_path);
  }
  const eval::EvalReport report =
      eval::run_benchmark(bcfg, problems, model ? &*model : nullptr);
  const auto param_names = landscape::system_param_names(bcfg.kind);

  const fs::path report_path = fs::path(cfg.out_dir) / "report.csv";
  const fs::path curves_path = fs::path(cfg.out_dir) / "curves.csv";
  write_file_bytes(report_path.string(), eval::report_csv(report, param_names));
  write_file_bytes(curves_path.string(), eval::curves_csv(report));
  if (g.timings)
    write_file_bytes((fs::path(cfg.out_dir) / "timings.csv").string(),
                     eval::timings_csv(report));

  int converged = 0;
  for (const eval::EvalRow& row : report.rows) converged += row.converged ? 1 : 0;
  const json extra{{"report_hash", eval::report_hash(report, param_names)},
                   {"rows", report.rows.size()},
                   {"converged_rows", converged}};
  // timings.csv is wall-clock data and deliberately stays out of the manifest
  write_meta(cfg, "benchmark", g,
             {{"report.csv", hash_entry(report_path)},
              {"curves.csv", hash_entry(curves_path)}},
             extra);
  std::printf("wrote %s (%zu rows, %d converged)\n", report_path.c_str(),
              report.rows.size(), converged);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"surrogate-assisted inverse problem toolkit"};
  app.require_subcommand(1);
  Global g;

  CLI::App* gen = app.add_subcommand("gen-data", "sample a training dataset");
  add_shared_flags(gen, g);

  CLI::App* train = app.add_subcommand("train", "train one model per sweep entry");
  add_shared_flags(train, g);
  train->add_option("--data", g.data_path, "dataset file from gen-data")->required();

  CLI::App* land = app.add_subcommand("landscape", "dump loss grids over the search box");
  add_shared_flags(land, g);
  land->add_option("--model", g.model_path, "checkpoint for an additional proxy grid");

  CLI::App* optimize = app.add_subcommand("optimize", "two-step optimization of one problem");
  add_shared_flags(optimize, g);
  optimize->add_option("--model", g.model_path, "trained checkpoint")->required();

  CLI::App* bench = app.add_subcommand("benchmark", "run methods over a problem set");
  add_shared_flags(bench, g);
  bench->add_option("--model", g.model_path, "trained checkpoint for two_step");
  bench->add_flag("--timings", g.timings, "also write wall-clock timings.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const RunConfig cfg = resolve_config(g);
    fs::create_directories(cfg.out_dir);
    if (gen->parsed()) cmd_gen_data(cfg, g);
    if (train->parsed()) cmd_train(cfg, g);
    if (land->parsed()) cmd_landscape(cfg, g);
    if (optimize->parsed()) cmd_optimize(cfg, g);
    if (bench->parsed()) cmd_benchmark(cfg, g);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return 3;
  }
  return 0;
}
