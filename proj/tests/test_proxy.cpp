#include <cmath>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "invopt/iohash.hpp"
#include "invopt/landscape/systems.hpp"
#include "invopt/proxy/dataset.hpp"
#include "invopt/proxy/model.hpp"
#include "invopt/proxy/train.hpp"
#include "invopt/rng.hpp"

using namespace invopt;
using namespace invopt::proxy;

namespace {

sim::Trajectory synthetic_trajectory(int frames, int width, const std::string& id) {
  sim::Trajectory y;
  y.system_id = id;
  for (int f = 0; f < frames; ++f) {
    RealVector r(width);
    for (int c = 0; c < width; ++c) r[c] = 1000.0 * f + c;
    y.frames.push_back(r);
    y.frame_times.push_back(0.5 * f);
  }
  return y;
}

EncodingDescriptor gramacy_encoding() {
  EncodingDescriptor enc;
  enc.system_id = "gramacy_lee";
  enc.slot_count = 0;
  enc.param_count = 1;
  return enc;
}

TrainingConfig small_training(int dataset_size, int n, int batch, int epochs,
                              std::uint64_t seed) {
  TrainingConfig t;
  t.dataset_size = dataset_size;
  t.samples_per_trajectory = n;
  t.batch_size = batch;
  t.epochs = epochs;
  t.seed = seed;
  return t;
}

std::vector<nn::LayerSpec> dense_stack(std::vector<int> widths,
                                       nn::Activation act = nn::Activation::tanh) {
  std::vector<nn::LayerSpec> hidden;
  for (int w : widths) hidden.push_back({nn::LayerKind::dense, w, act});
  return hidden;
}

std::vector<landscape::InverseProblem> gramacy_problems(int count, std::uint64_t seed) {
  std::vector<landscape::InverseProblem> ps;
  for (int i = 0; i < count; ++i)
    ps.push_back(landscape::make_problem(landscape::SystemKind::gramacy_lee,
                                         derive_seed(seed, "problem", i)));
  return ps;
}

Dataset gramacy_dataset(int count, int n, std::uint64_t seed) {
  TrainingConfig cfg = small_training(count, n, 1, 1, seed);
  return generate_dataset(gramacy_problems(count, seed), gramacy_encoding(), cfg);
}

}  // namespace

TEST_CASE("slot map picks evenly spaced entries") {
  EncodingDescriptor enc;
  enc.system_id = "kuramoto_sivashinsky";
  enc.slot_count = 16;
  enc.param_count = 2;
  const int frames = 151, width = 64;
  const auto map = encoding_slot_map(enc, frames, width);
  REQUIRE(map.size() == 16);
  for (int j = 0; j < 16; ++j) {
    const std::size_t flat = static_cast<std::size_t>(frames) * width * j / 16;
    CHECK(map[j].first == static_cast<int>(flat / width));
    CHECK(map[j].second == static_cast<int>(flat % width));
  }
  // strictly increasing flat positions, first slot at the trajectory start
  CHECK(map.front() == std::pair<int, int>{0, 0});
  for (int j = 1; j < 16; ++j) {
    const long a = static_cast<long>(map[j - 1].first) * width + map[j - 1].second;
    const long b = static_cast<long>(map[j].first) * width + map[j].second;
    CHECK(b > a);
  }
}

TEST_CASE("encoding reads exactly the mapped components") {
  EncodingDescriptor enc;
  enc.system_id = "synthetic";
  enc.slot_count = 7;
  enc.param_count = 1;
  sim::Trajectory y = synthetic_trajectory(9, 5, "synthetic");
  const auto map = encoding_slot_map(enc, 9, 5);
  const RealVector base = encode_trajectory(y, enc);
  REQUIRE(base.size() == 7);
  for (int j = 0; j < 7; ++j)
    CHECK(base[j] == 1000.0 * map[j].first + map[j].second);

  // perturbing a selected component moves its slot and only its slot
  sim::Trajectory sel = y;
  sel.frames[map[3].first][map[3].second] += 0.25;
  const RealVector moved = encode_trajectory(sel, enc);
  CHECK(moved[3] == base[3] + 0.25);
  for (int j = 0; j < 7; ++j)
    if (j != 3) CHECK(moved[j] == base[j]);

  // perturbing a component no slot maps to changes nothing
  std::pair<int, int> unselected{0, 1};
  for (const auto& m : map) REQUIRE(m != unselected);
  sim::Trajectory uns = y;
  uns.frames[unselected.first][unselected.second] += 0.25;
  CHECK(encode_trajectory(uns, enc) == base);
}

TEST_CASE("identical trajectories encode identically") {
  EncodingDescriptor enc;
  enc.system_id = "synthetic";
  enc.slot_count = 11;
  enc.param_count = 3;
  sim::Trajectory a = synthetic_trajectory(6, 8, "synthetic");
  sim::Trajectory b = synthetic_trajectory(6, 8, "synthetic");
  CHECK(encode_trajectory(a, enc) == encode_trajectory(b, enc));
}

TEST_CASE("encoding rejects short trajectories and mismatched systems") {
  EncodingDescriptor enc;
  enc.system_id = "synthetic";
  enc.slot_count = 40;
  enc.param_count = 1;
  sim::Trajectory y = synthetic_trajectory(3, 4, "synthetic");  // 12 < 40 entries
  CHECK_THROWS_AS(encode_trajectory(y, enc), ConfigError);
  CHECK_THROWS_WITH_AS(encoding_slot_map(enc, 3, 4),
                       doctest::Contains("slot budget"), ConfigError);
  sim::Trajectory other = synthetic_trajectory(30, 4, "other-system");
  CHECK_THROWS_AS(encode_trajectory(other, enc), ConfigError);
}

TEST_CASE("zero-slot encoding is empty") {
  EncodingDescriptor enc = gramacy_encoding();
  sim::Trajectory y = synthetic_trajectory(1, 1, "gramacy_lee");
  CHECK(encode_trajectory(y, enc).empty());
  CHECK(enc.raw_input_dim() == 1);
  CHECK(enc.network_input_dim() == 1);
}

TEST_CASE("encoding json round trip") {
  EncodingDescriptor enc;
  enc.system_id = "burgers";
  enc.slot_count = 2;
  enc.param_count = 1;
  enc.fourier_rows = 8;
  enc.fourier_scale = 2.5;
  CHECK(EncodingDescriptor::from_json(enc.to_json()) == enc);
  CHECK(enc.network_input_dim() == 16);
  CHECK_THROWS_AS(EncodingDescriptor::from_json("{"), IoError);
  CHECK_THROWS_AS(EncodingDescriptor::from_json("{\"system_id\":\"x\"}"), IoError);
}

TEST_CASE("dataset: one problem, two draws") {
  Dataset d = gramacy_dataset(1, 2, 71);
  CHECK(d.size() == 2);
  CHECK(d.attempted == 2);
  CHECK(d.skipped == 0);
  CHECK(d.encoded_targets[0] == d.encoded_targets[1]);
  for (double v : d.losses) CHECK(v >= 0.0);
}

TEST_CASE("dataset samples recompute bitwise through the problem oracle") {
  const std::uint64_t seed = 1234;
  const int count = 5, n = 8;
  const auto problems = gramacy_problems(count, seed);
  TrainingConfig cfg = small_training(count, n, 1, 1, seed);
  Dataset d = generate_dataset(problems, gramacy_encoding(), cfg);
  REQUIRE(d.size() == static_cast<std::size_t>(count * n));

  Rng rng = make_rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t i =
        static_cast<std::size_t>(uniform(rng, 0.0, 1.0) * static_cast<double>(d.size()));
    const auto& problem = problems[i / n];
    CHECK(d.losses[i] == problem.configuration_loss(d.params[i]));
    CHECK(d.encoded_targets[i] == encode_trajectory(problem.target, d.encoding));
    CHECK(problem.true_params.bounds.contains(d.params[i]));
  }
}

TEST_CASE("dataset generation is seed-deterministic") {
  Dataset a = gramacy_dataset(3, 4, 7);
  Dataset b = gramacy_dataset(3, 4, 7);
  Dataset c = gramacy_dataset(3, 4, 8);
  CHECK(a.params == b.params);
  CHECK(a.losses == b.losses);
  CHECK(a.params != c.params);
}

TEST_CASE("dataset rejects a size mismatch") {
  TrainingConfig cfg = small_training(2, 3, 1, 1, 5);
  CHECK_THROWS_AS(generate_dataset(gramacy_problems(3, 5), gramacy_encoding(), cfg),
                  ConfigError);
}

TEST_CASE("dataset file round trip is bitwise") {
  Dataset d = gramacy_dataset(2, 6, 31);
  const auto path = std::filesystem::temp_directory_path() / "invopt_dataset.bin";
  save_dataset(path.string(), d);
  Dataset r = load_dataset(path.string());
  CHECK(r.system_id == d.system_id);
  CHECK(r.encoding == d.encoding);
  CHECK(r.seed == d.seed);
  CHECK(r.samples_per_trajectory == d.samples_per_trajectory);
  CHECK(r.attempted == d.attempted);
  CHECK(r.skipped == d.skipped);
  CHECK(r.encoded_targets == d.encoded_targets);
  CHECK(r.params == d.params);
  CHECK(r.losses == d.losses);

  // appended garbage is rejected, as is a foreign magic
  std::string bytes = read_file_bytes(path.string());
  write_file_bytes(path.string(), bytes + "x");
  CHECK_THROWS_AS(load_dataset(path.string()), IoError);
  bytes[0] = 'Z';
  write_file_bytes(path.string(), bytes);
  CHECK_THROWS_AS(load_dataset(path.string()), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("dataset skips failing simulations and fails past one percent") {
  // viscosity box straddling the explicit-step stability limit, so a known
  // fraction of draws makes the simulator reject the sample
  auto burgers_problem = [](double nu_high, std::uint64_t seed) {
    sim::BurgersSpec spec;
    spec.grid_points = 128;
    spec.internal_dt = 2.5e-3;
    landscape::InverseProblem p;
    p.kind = landscape::SystemKind::burgers;
    p.system_id = "burgers";
    p.param_names = {"nu"};
    p.true_params.values = {0.05};
    p.true_params.bounds = {{0.01}, {nu_high}};
    p.spec = spec;
    p.initial_state = sim::burgers_random_initial_state(spec, seed);
    p.target = p.simulate(p.true_params.values);
    return p;
  };
  EncodingDescriptor enc;
  enc.system_id = "burgers";
  enc.slot_count = 2;
  enc.param_count = 1;

  TrainingConfig cfg = small_training(1, 100, 1, 1, 5);
  Dataset d = generate_dataset({burgers_problem(0.185, 5)}, enc, cfg);
  CHECK(d.size() == 99);
  CHECK(d.attempted == 100);
  CHECK(d.skipped == 1);
  for (double v : d.losses) CHECK(v >= 0.0);
  for (const auto& t : d.encoded_targets) REQUIRE(t.size() == 2);

  TrainingConfig hot = small_training(1, 20, 1, 1, 1);
  CHECK_THROWS_WITH_AS(generate_dataset({burgers_problem(0.4, 1)}, enc, hot),
                       doctest::Contains("skipped"), NumericError);
}

TEST_CASE("penalty gates only overprediction") {
  CHECK(penalized_squared_error(3.0, 2.0, 5.0) == 5.0);
  CHECK(penalized_squared_error(1.0, 2.0, 5.0) == 1.0);
  CHECK(penalized_squared_error(2.0, 2.0, 5.0) == 0.0);
  // fixed |error|: overprediction costs exactly mu times more
  for (double gap : {0.1, 0.7, 2.0}) {
    const double over = penalized_squared_error(gap, 0.0, 7.5);
    const double under = penalized_squared_error(-gap, 0.0, 7.5);
    CHECK(over == 7.5 * under);
  }
}

TEST_CASE("predict: deterministic, zero at zero weights, transform inverted") {
  EncodingDescriptor enc = gramacy_encoding();
  TrainingConfig t = small_training(1, 4, 2, 3, 17);
  for (const char* transform : {"identity", "log1p"}) {
    t.target_transform = transform;
    ProxyModel m = make_proxy_model(enc, dense_stack({8, 8}), t);
    const RealVector xs{0.37};
    const double a = predict_loss(m, RealVector{}, xs);
    const double b = predict_loss(m, RealVector{}, xs);
    CHECK(a == b);

    for (auto& w : m.state.weights) w.fill(0.0);
    for (auto& bb : m.state.biases) bb.fill(0.0);
    for (double x : {-0.9, 0.0, 1.3, 2.9})
      CHECK(predict_loss(m, RealVector{}, RealVector{x}) == 0.0);
  }
}

TEST_CASE("predict accepts problems and rejects mismatched shapes") {
  auto problem = landscape::make_problem(landscape::SystemKind::gramacy_lee, 3);
  ProxyModel m = make_proxy_model(gramacy_encoding(), dense_stack({6}),
                                  small_training(1, 1, 1, 1, 5));
  CHECK(predict_loss(m, problem, {0.5}) == predict_loss(m, RealVector{}, {0.5}));
  CHECK_THROWS_AS(predict_loss(m, RealVector{}, RealVector{0.5, 0.5}), ConfigError);
  CHECK_THROWS_AS(predict_loss(m, RealVector{1.0}, RealVector{0.5}), ConfigError);
  auto ks = landscape::make_problem(landscape::SystemKind::kuramoto_sivashinsky, 3);
  CHECK_THROWS_AS(predict_loss(m, ks, {0.5}), ConfigError);
}

TEST_CASE("predicted-loss gradients match central differences") {
  struct Case {
    EncodingDescriptor enc;
    std::string transform;
  };
  std::vector<Case> cases;
  cases.push_back({gramacy_encoding(), "identity"});
  EncodingDescriptor lifted;
  lifted.system_id = "synthetic";
  lifted.slot_count = 6;
  lifted.param_count = 2;
  lifted.fourier_rows = 10;
  lifted.fourier_scale = 0.8;
  cases.push_back({lifted, "identity"});
  cases.push_back({lifted, "log1p"});

  for (const auto& c : cases) {
    TrainingConfig t = small_training(1, 4, 2, 3, 23);
    t.target_transform = c.transform;
    ProxyModel m = make_proxy_model(c.enc, dense_stack({12, 8}), t);
    Rng rng = make_rng(derive_seed(7, c.transform, c.enc.slot_count));
    RealVector target(c.enc.slot_count);
    for (double& v : target) v = uniform(rng, -1.0, 1.0);
    RealVector xs(c.enc.param_count);
    for (double& v : xs) v = uniform(rng, -0.5, 0.5);

    const RealVector g = predict_loss_gradient(m, target, xs);
    REQUIRE(g.size() == xs.size());
    const double h = 1e-5;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      RealVector xp = xs, xm = xs;
      xp[j] += h;
      xm[j] -= h;
      const double fd =
          (predict_loss(m, target, xp) - predict_loss(m, target, xm)) / (2.0 * h);
      const double scale = std::max({std::abs(g[j]), std::abs(fd), 1e-8});
      CHECK(std::abs(g[j] - fd) / scale < 1e-3);
    }
  }
}

TEST_CASE("model file round trip preserves predictions bitwise") {
  EncodingDescriptor enc;
  enc.system_id = "synthetic";
  enc.slot_count = 4;
  enc.param_count = 2;
  enc.fourier_rows = 6;
  TrainingConfig t = small_training(2, 3, 2, 4, 77);
  t.target_transform = "log1p";
  RegularizationConfig reg{0.21, 12.0};
  ProxyModel m = make_proxy_model(enc, dense_stack({10}), t, reg);
  m.frozen = true;

  const auto path = std::filesystem::temp_directory_path() / "invopt_model.bin";
  save_model(path.string(), m);
  ProxyModel r = load_model(path.string());
  std::filesystem::remove(path);

  CHECK(r.encoding == m.encoding);
  CHECK(r.frozen == m.frozen);
  CHECK(r.regularization.sigma == reg.sigma);
  CHECK(r.regularization.mu == reg.mu);
  CHECK(r.training.batch_size == t.batch_size);
  CHECK(r.training.target_transform == "log1p");

  Rng rng = make_rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    RealVector target(enc.slot_count), xs(enc.param_count);
    for (double& v : target) v = uniform(rng, -2.0, 2.0);
    for (double& v : xs) v = uniform(rng, -1.0, 1.0);
    CHECK(predict_loss(r, target, xs) == predict_loss(m, target, xs));
  }
}

TEST_CASE("model file round trip works without a fourier lift") {
  EncodingDescriptor enc;
  enc.system_id = "synthetic";
  enc.slot_count = 0;
  enc.param_count = 1;
  TrainingConfig t = small_training(2, 3, 2, 4, 9);
  ProxyModel m = make_proxy_model(enc, dense_stack({8}), t);

  const auto path = std::filesystem::temp_directory_path() / "invopt_model_nf.bin";
  save_model(path.string(), m);
  ProxyModel r = load_model(path.string());
  std::filesystem::remove(path);

  CHECK(r.encoding == m.encoding);
  CHECK(r.fourier.rows() == 0);
  Rng rng = make_rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const RealVector xs{uniform(rng, -1.0, 1.0)};
    CHECK(predict_loss(r, RealVector{}, xs) == predict_loss(m, RealVector{}, xs));
  }
}

TEST_CASE("training without regularization matches the dedicated code path bitwise") {
  Dataset d = gramacy_dataset(4, 16, 2024);
  TrainingConfig t = small_training(4, 16, 16, 12, 2024);
  ProxyModel init = make_proxy_model(gramacy_encoding(), dense_stack({16, 16}), t);

  TrainResult gated = train(d, init, RegularizationConfig{0.0, 1.0});
  TrainResult plain = train_unregularized(d, init);
  REQUIRE(gated.epoch_losses.size() == plain.epoch_losses.size());
  CHECK(gated.epoch_losses == plain.epoch_losses);
  for (double x : {-0.8, 0.1, 1.9, 2.7})
    CHECK(predict_loss(gated.model, RealVector{}, RealVector{x}) ==
          predict_loss(plain.model, RealVector{}, RealVector{x}));
}

TEST_CASE("noise and penalty each change the training trace") {
  Dataset d = gramacy_dataset(2, 16, 404);
  TrainingConfig t = small_training(2, 16, 8, 6, 404);
  ProxyModel init = make_proxy_model(gramacy_encoding(), dense_stack({12}), t);
  // start the network overpredicting so the gate fires immediately
  init.state.biases.back().fill(10.0);
  TrainResult base = train(d, init, RegularizationConfig{0.0, 1.0});
  TrainResult noisy = train(d, init, RegularizationConfig{0.3, 1.0});
  TrainResult gated = train(d, init, RegularizationConfig{0.0, 20.0});
  CHECK(base.epoch_losses != noisy.epoch_losses);
  CHECK(base.epoch_losses != gated.epoch_losses);
  CHECK(noisy.model.regularization.sigma == 0.3);
  CHECK(gated.model.regularization.mu == 20.0);
  CHECK(base.model.frozen);
}

TEST_CASE("training rejects bad setups") {
  Dataset d = gramacy_dataset(1, 4, 9);
  TrainingConfig t = small_training(1, 4, 8, 2, 9);  // batch 8 > 4 samples
  CHECK_THROWS_AS(
      train(d, make_proxy_model(gramacy_encoding(), dense_stack({4}), t, {}), {}),
      ConfigError);

  TrainingConfig ok = small_training(1, 4, 2, 2, 9);
  ProxyModel frozen = make_proxy_model(gramacy_encoding(), dense_stack({4}), ok);
  frozen.frozen = true;
  CHECK_THROWS_AS(train(d, frozen, {}), ConfigError);

  EncodingDescriptor other = gramacy_encoding();
  other.system_id = "rastrigin";
  ProxyModel mismatched = make_proxy_model(other, dense_stack({4}), ok);
  CHECK_THROWS_AS(train(d, mismatched, {}), ConfigError);

  CHECK_THROWS_AS((RegularizationConfig{-0.1, 1.0}.validate()), ConfigError);
  CHECK_THROWS_AS((RegularizationConfig{0.1, 0.5}.validate()), ConfigError);
}

TEST_CASE("diverging training aborts with the epoch and batch") {
  // targets so large that the very first squared error overflows
  Dataset d;
  d.system_id = "gramacy_lee";
  d.encoding = gramacy_encoding();
  d.samples_per_trajectory = 1;
  d.attempted = 4;
  for (int i = 0; i < 4; ++i) {
    d.encoded_targets.push_back({});
    d.params.push_back({0.1 * (i + 1)});
    d.losses.push_back(1e200);
  }
  TrainingConfig t = small_training(4, 1, 2, 3, 55);
  ProxyModel init = make_proxy_model(gramacy_encoding(), dense_stack({8}), t);
  CHECK_THROWS_WITH_AS(train(d, init, {}),
                       doctest::Contains("epoch 0 batch 0"), NumericError);
}

TEST_CASE("smoothed training loss does not increase on the analytic benchmark") {
  Dataset d = gramacy_dataset(8, 32, 808);
  TrainingConfig t = small_training(8, 32, 32, 120, 808);
  ProxyModel init = make_proxy_model(gramacy_encoding(), dense_stack({32, 32}), t);
  TrainResult r = train(d, init, RegularizationConfig{0.0, 1.0});
  REQUIRE(r.epoch_losses.size() == 120);
  const int window = 10;
  double prev = 0.0;
  for (std::size_t w = 0; w + window <= r.epoch_losses.size(); ++w) {
    double s = 0.0;
    for (int k = 0; k < window; ++k) s += r.epoch_losses[w + k];
    s /= window;
    if (w > 0) CHECK(s <= prev * (1.0 + 1e-6));
    prev = s;
  }
  CHECK(r.epoch_losses.back() < r.epoch_losses.front());
}
