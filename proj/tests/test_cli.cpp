#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "invopt/eval/benchmark.hpp"
#include "invopt/iohash.hpp"
#include "invopt/landscape/systems.hpp"
#include "invopt/proxy/dataset.hpp"
#include "invopt/proxy/model.hpp"
#include "invopt/proxy/train.hpp"
#include "invopt/rng.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace invopt;

namespace {

struct CliResult {
  int code = -1;
  std::string output;
};

// Runs the tool through the shell and captures stdout+stderr.
CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(INVOPT_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult r;
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "invopt_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return json::parse(in);
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::vector<std::string> lines;
  std::istringstream in(read_file_bytes(path.string()));
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  std::string field;
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

proxy::EncodingDescriptor convex_encoding() {
  proxy::EncodingDescriptor enc;
  enc.system_id = "rastrigin";
  enc.slot_count = 0;
  enc.param_count = 1;
  return enc;
}

landscape::ProblemOptions convex_options() {
  landscape::ProblemOptions options;
  options.bounds = Box{{-0.35}, {0.45}};
  return options;
}

}  // namespace

TEST_CASE("gen-data writes the requested sample count and echoes the seed") {
  const fs::path dir = fresh_dir("gen1");
  const CliResult r = run_cli("gen-data --preset gramacy --set samples_per_trajectory=2 "
                              "--seed 5 --out " + dir.string());
  CHECK(r.code == 0);

  const proxy::Dataset data = proxy::load_dataset((dir / "dataset.bin").string());
  CHECK(data.size() == 2);
  CHECK(data.system_id == "gramacy_lee");
  CHECK(data.seed == 5);

  const json meta = read_json(dir / "meta.json");
  CHECK(meta.at("tool") == "invopt");
  CHECK(meta.at("command") == "gen-data");
  CHECK(meta.at("config").at("seed") == 5);
  CHECK(meta.at("config").at("samples_per_trajectory") == 2);
  CHECK(meta.at("inputs").at("config").at("sha1").get<std::string>().size() == 40);
  CHECK(meta.at("outputs").contains("dataset.bin"));
  CHECK(meta.at("result").at("sample_count") == 2);
}

TEST_CASE("reruns with one seed hash identically and another seed differs") {
  const fs::path a = fresh_dir("gen2a"), b = fresh_dir("gen2b"), c = fresh_dir("gen2c");
  const std::string base = "gen-data --preset gramacy --set samples_per_trajectory=4 ";
  CHECK(run_cli(base + "--seed 5 --out " + a.string()).code == 0);
  CHECK(run_cli(base + "--seed 5 --out " + b.string()).code == 0);
  CHECK(run_cli(base + "--seed 6 --out " + c.string()).code == 0);

  const std::string ha = content_hash_file((a / "dataset.bin").string());
  CHECK(ha == content_hash_file((b / "dataset.bin").string()));
  CHECK(ha != content_hash_file((c / "dataset.bin").string()));
}

TEST_CASE("paper-scale overrides apply before explicit set flags") {
  const fs::path dir = fresh_dir("paper");
  const CliResult r = run_cli("gen-data --preset gramacy --paper-scale "
                              "--set samples_per_trajectory=2 --out " + dir.string());
  CHECK(r.code == 0);
  const json cfg = read_json(dir / "meta.json").at("config");
  CHECK(cfg.at("epochs") == 400);
  CHECK(cfg.at("benchmark_problems") == 256);
  CHECK(cfg.at("samples_per_trajectory") == 2);
}

TEST_CASE("train writes one checkpoint per sweep entry that replays bitwise") {
  const fs::path gen = fresh_dir("train_gen"), out = fresh_dir("train_out");
  const std::string sets = "--set samples_per_trajectory=64 --set batch_size=64 "
                           "--set epochs=3 --set hidden=[8]";
  REQUIRE(run_cli("gen-data --preset convex " + sets + " --out " + gen.string()).code == 0);
  const CliResult r = run_cli("train --preset convex " + sets + " --data " +
                              (gen / "dataset.bin").string() + " --out " + out.string());
  CHECK(r.code == 0);

  CHECK(fs::exists(out / "model_00_sigma_0.ckpt"));
  CHECK(fs::exists(out / "loss_00_sigma_0.csv"));
  CHECK(!fs::exists(out / "model_01_sigma_0.ckpt"));
  const auto loss_lines = read_lines(out / "loss_00_sigma_0.csv");
  REQUIRE(loss_lines.size() == 4);
  CHECK(loss_lines[0] == "epoch,loss");

  const json meta = read_json(out / "meta.json");
  REQUIRE(meta.at("result").at("models").size() == 1);
  CHECK(meta.at("result").at("models")[0].at("sigma") == 0.0);
  CHECK(meta.at("inputs").contains("dataset"));

  const proxy::Dataset data = proxy::load_dataset((gen / "dataset.bin").string());
  proxy::TrainingConfig t;
  t.dataset_size = 1;
  t.samples_per_trajectory = 64;
  t.batch_size = 64;
  t.epochs = 3;
  t.learning_rate = 1e-3;
  t.seed = 0;
  const proxy::ProxyModel init = proxy::make_proxy_model(
      convex_encoding(), {{nn::LayerKind::dense, 8, nn::Activation::tanh}}, t);
  const proxy::TrainResult expected = proxy::train(data, init, {0.0, 1.0});
  const proxy::ProxyModel loaded =
      proxy::load_model((out / "model_00_sigma_0.ckpt").string());

  Rng rng = make_rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const RealVector xs{uniform(rng, -0.35, 0.45)};
    CHECK(proxy::predict_loss(loaded, RealVector{}, xs) ==
          proxy::predict_loss(expected.model, RealVector{}, xs));
  }

  for (std::size_t e = 0; e < expected.epoch_losses.size(); ++e) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%zu,%.17g", e, expected.epoch_losses[e]);
    CHECK(loss_lines[e + 1] == buf);
  }
}

TEST_CASE("train runs every sweep entry in order") {
  const fs::path gen = fresh_dir("sweep_gen"), out = fresh_dir("sweep_out");
  const std::string sets = "--set samples_per_trajectory=32 --set batch_size=32 "
                           "--set epochs=2 --set hidden=[6]";
  REQUIRE(run_cli("gen-data --preset convex " + sets + " --out " + gen.string()).code == 0);
  const std::string sweep =
      " '--set' 'regularization_sweep=[{\"sigma\":0.0,\"mu\":1.0},{\"sigma\":0.1,\"mu\":2.0}]'";
  const CliResult r = run_cli("train --preset convex " + sets + sweep + " --data " +
                              (gen / "dataset.bin").string() + " --out " + out.string());
  CHECK(r.code == 0);
  CHECK(fs::exists(out / "model_00_sigma_0.ckpt"));
  CHECK(fs::exists(out / "model_01_sigma_0.1.ckpt"));

  const json models = read_json(out / "meta.json").at("result").at("models");
  REQUIRE(models.size() == 2);
  CHECK(models[0].at("sigma") == 0.0);
  CHECK(models[1].at("sigma") == 0.1);
  CHECK(models[1].at("mu") == 2.0);

  const proxy::ProxyModel reg =
      proxy::load_model((out / "model_01_sigma_0.1.ckpt").string());
  CHECK(reg.regularization.sigma == 0.1);
  CHECK(reg.regularization.mu == 2.0);
}

TEST_CASE("landscape grids carry one row per node and honor the proxy model") {
  proxy::TrainingConfig t;
  t.dataset_size = 1;
  t.samples_per_trajectory = 4;
  t.batch_size = 4;
  t.epochs = 1;
  proxy::ProxyModel zero = proxy::make_proxy_model(
      convex_encoding(), {{nn::LayerKind::dense, 8, nn::Activation::tanh}}, t);
  for (auto& w : zero.state.weights) std::fill(w.data.begin(), w.data.end(), 0.0);
  for (auto& b : zero.state.biases) std::fill(b.data.begin(), b.data.end(), 0.0);
  zero.frozen = true;
  const fs::path dir = fresh_dir("landscape");
  const fs::path ckpt = dir / "zero.ckpt";
  proxy::save_model(ckpt.string(), zero);

  const CliResult r = run_cli("landscape --preset convex --set landscape_resolution=[5] "
                              "--model " + ckpt.string() + " --out " + dir.string());
  CHECK(r.code == 0);

  const auto truth = read_lines(dir / "landscape_truth.csv");
  REQUIRE(truth.size() == 6);
  CHECK(truth[0] == "x,loss");
  CHECK(std::stod(split_csv(truth[1])[0]) == doctest::Approx(-0.35).epsilon(1e-12));
  CHECK(std::stod(split_csv(truth[5])[0]) == doctest::Approx(0.45).epsilon(1e-12));

  const landscape::InverseProblem problem =
      landscape::make_problem(landscape::SystemKind::rastrigin,
                              derive_seed(0, "problem", 0), convex_options());
  for (int i = 1; i <= 5; ++i) {
    const auto fields = split_csv(truth[static_cast<std::size_t>(i)]);
    const double x = std::stod(fields[0]);
    CHECK(std::stod(fields[1]) ==
          doctest::Approx(problem.configuration_loss({x})).epsilon(1e-12));
  }

  const auto proxy_lines = read_lines(dir / "landscape_proxy.csv");
  REQUIRE(proxy_lines.size() == 6);
  for (int i = 1; i <= 5; ++i)
    CHECK(std::stod(split_csv(proxy_lines[static_cast<std::size_t>(i)])[1]) == 0.0);

  const json meta = read_json(dir / "meta.json");
  CHECK(meta.at("outputs").contains("landscape_truth.csv"));
  CHECK(meta.at("outputs").contains("landscape_proxy.csv"));
}

TEST_CASE("optimize starts at the box center and lands on the minimum") {
  const fs::path gen = fresh_dir("opt_gen"), train = fresh_dir("opt_train");
  const fs::path out = fresh_dir("opt_out");
  REQUIRE(run_cli("gen-data --preset convex --out " + gen.string()).code == 0);
  REQUIRE(run_cli("train --preset convex --data " + (gen / "dataset.bin").string() +
                  " --out " + train.string()).code == 0);
  const CliResult r = run_cli("optimize --preset convex --model " +
                              (train / "model_00_sigma_0.ckpt").string() +
                              " --out " + out.string());
  CHECK(r.code == 0);

  const json doc = read_json(out / "optimize.json");
  CHECK(doc.at("system") == "rastrigin");
  CHECK(doc.at("x0")[0].get<double>() == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(doc.at("x_true")[0] == 0.0);
  CHECK(std::abs(doc.at("x_predicted")[0].get<double>()) < 1e-6);
  CHECK(doc.at("prediction_error").get<double>() < 1e-6);
  CHECK(doc.at("resimulation_error").get<double>() < 1e-8);

  const auto trace = read_lines(out / "optimize_trace.csv");
  REQUIRE(trace.size() >= 3);
  CHECK(trace[0] == "stage,iteration,x,value,grad_norm");
  const auto last = split_csv(trace.back());
  CHECK(last[0] == "secondary");
  CHECK(std::stod(last[2]) == doc.at("x_predicted")[0].get<double>());

  const json meta = read_json(out / "meta.json");
  CHECK(meta.at("result").at("x_predicted") == doc.at("x_predicted"));
}

TEST_CASE("benchmark honors the method list and reruns hash identically") {
  const fs::path a = fresh_dir("bench_a"), b = fresh_dir("bench_b"), c = fresh_dir("bench_c");
  const std::string base = "benchmark --preset convex '--set' 'methods=[\"gd\"]' "
                           "--set benchmark_problems=2 ";
  CHECK(run_cli(base + "--out " + a.string()).code == 0);
  CHECK(run_cli(base + "--out " + b.string()).code == 0);
  CHECK(run_cli(base + "--seed 1 --out " + c.string()).code == 0);

  const auto rows = read_lines(a / "report.csv");
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(split_csv(rows[i])[1] == "gd");

  const std::string ha = read_json(a / "meta.json").at("result").at("report_hash");
  CHECK(ha == read_json(b / "meta.json").at("result").at("report_hash"));
  CHECK(ha != read_json(c / "meta.json").at("result").at("report_hash"));
  CHECK(content_hash_file((a / "report.csv").string()) ==
        content_hash_file((b / "report.csv").string()));
  CHECK(!fs::exists(a / "timings.csv"));

  const fs::path d = fresh_dir("bench_d");
  CHECK(run_cli(base + "--timings --out " + d.string()).code == 0);
  CHECK(fs::exists(d / "timings.csv"));
  CHECK(!read_json(d / "meta.json").at("outputs").contains("timings.csv"));
}

TEST_CASE("benchmark output matches an equivalent in-process run") {
  const fs::path dir = fresh_dir("bench_manual");
  REQUIRE(run_cli("benchmark --preset convex --out " + dir.string()).code == 0);

  eval::BenchmarkConfig bcfg;
  bcfg.kind = landscape::SystemKind::rastrigin;
  bcfg.problem_count = 4;
  bcfg.methods = {eval::Method::bfgs, eval::Method::gd};
  bcfg.seed = 0;
  std::vector<landscape::InverseProblem> problems;
  for (int i = 0; i < 4; ++i)
    problems.push_back(landscape::make_problem(landscape::SystemKind::rastrigin,
                                               derive_seed(0, "problem", i),
                                               convex_options()));
  const eval::EvalReport report = eval::run_benchmark(bcfg, problems);

  CHECK(read_file_bytes((dir / "report.csv").string()) == eval::report_csv(report, {"x"}));
  CHECK(read_file_bytes((dir / "curves.csv").string()) == eval::curves_csv(report));
  CHECK(read_json(dir / "meta.json").at("result").at("report_hash") ==
        eval::report_hash(report, {"x"}));
}

TEST_CASE("failures exit with distinct codes for config, numeric, and io errors") {
  const fs::path dir = fresh_dir("codes");
  const std::string out = " --out " + dir.string();

  CliResult r = run_cli("gen-data --preset no_such_preset" + out);
  CHECK(r.code == 2);
  CHECK(r.output.find("unknown preset") != std::string::npos);

  r = run_cli("gen-data --preset convex --set bogus_key=1" + out);
  CHECK(r.code == 2);
  CHECK(r.output.find("bogus_key") != std::string::npos);

  r = run_cli("gen-data --preset convex --config also.json" + out);
  CHECK(r.code == 2);

  r = run_cli("train --preset convex" + out);
  CHECK(r.code == 2);

  r = run_cli("gen-data --config /no/such/config.json" + out);
  CHECK(r.code == 4);
  CHECK(r.output.find("io error") != std::string::npos);

  r = run_cli("train --preset convex --data /no/such/dataset.bin" + out);
  CHECK(r.code == 4);

  r = run_cli("landscape --preset burgers --set landscape_resolution=[3] "
              "'--set' 'sim={\"internal_dt\":0.5}'" + out);
  CHECK(r.code == 3);
  CHECK(r.output.find("numeric failure") != std::string::npos);
}
