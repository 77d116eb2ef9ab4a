#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "invopt/landscape/systems.hpp"
#include "invopt/opt/objectives.hpp"
#include "invopt/opt/optimize.hpp"
#include "invopt/proxy/train.hpp"
#include "invopt/rng.hpp"
#include "invopt/sim/test_functions.hpp"

using namespace invopt;
using namespace invopt::opt;

namespace {

Objective quadratic_1d(double center, double lo = -10.0, double hi = 10.0) {
  Objective obj;
  obj.bounds = {{lo}, {hi}};
  obj.evaluate = [center](const RealVector& x) {
    return (x[0] - center) * (x[0] - center);
  };
  obj.gradient = [center](const RealVector& x) {
    return RealVector{2.0 * (x[0] - center)};
  };
  return obj;
}

Objective rosenbrock_2d() {
  Objective obj;
  obj.bounds = {{-2.0, -2.0}, {2.0, 2.0}};
  obj.evaluate = [](const RealVector& v) {
    const double x = v[0], y = v[1];
    return 100.0 * (y - x * x) * (y - x * x) + (1.0 - x) * (1.0 - x);
  };
  obj.gradient = [](const RealVector& v) {
    const double x = v[0], y = v[1];
    return RealVector{-400.0 * x * (y - x * x) - 2.0 * (1.0 - x),
                      200.0 * (y - x * x)};
  };
  return obj;
}

Objective gramacy_objective() {
  Objective obj;
  obj.bounds = {{-1.0}, {3.0}};
  obj.evaluate = [](const RealVector& x) { return sim::gramacy_lee(x[0]); };
  return obj;  // finite-difference gradients
}

// d/dx of sin(10 pi x)/(2x) + (x-1)^4, written straight from the quotient rule
double gramacy_derivative(double x) {
  const double c = 10.0 * std::numbers::pi;
  return c * std::cos(c * x) / (2.0 * x) - std::sin(c * x) / (2.0 * x * x) +
         4.0 * std::pow(x - 1.0, 3);
}

}  // namespace

TEST_CASE("bfgs solves a shifted quadratic in a handful of iterations") {
  OptTrace t = bfgs(quadratic_1d(3.0), {0.0});
  CHECK(t.termination == Termination::gradient_tol);
  CHECK(std::abs(t.final_params()[0] - 3.0) < 1e-8);
  CHECK(t.iterates.size() <= 6);  // start plus at most 5 steps
}

TEST_CASE("bfgs reaches the rosenbrock minimum from the classic start") {
  OptTrace t = bfgs(rosenbrock_2d(), {-1.2, 1.0});
  CHECK(t.termination == Termination::gradient_tol);
  CHECK(std::abs(t.final_params()[0] - 1.0) < 1e-6);
  CHECK(std::abs(t.final_params()[1] - 1.0) < 1e-6);
  CHECK(t.iterates.size() <= 201);
  // accepted steps decrease the objective strictly
  for (std::size_t i = 1; i < t.iterates.size(); ++i)
    CHECK(t.iterates[i].value < t.iterates[i - 1].value);
}

TEST_CASE("bfgs on the oscillatory landscape stalls in a nearby local basin") {
  OptTrace t = bfgs(gramacy_objective(), {1.5});
  REQUIRE(t.termination == Termination::gradient_tol);
  const double x = t.final_params()[0];
  const double global_x = sim::gramacy_lee_minimum().x;
  CHECK(std::abs(x - global_x) > 0.3);
  // the stall point is a true stationary point: the analytic derivative
  // vanishes and flips sign across it
  CHECK(std::abs(gramacy_derivative(x)) < 1e-5);
  CHECK(gramacy_derivative(x - 1e-4) < 0.0);
  CHECK(gramacy_derivative(x + 1e-4) > 0.0);
}

TEST_CASE("bfgs walks into the boundary and reports it") {
  OptTrace t = bfgs(quadratic_1d(5.0, -1.0, 1.0), {0.0});
  CHECK(t.final_params()[0] == 1.0);
  CHECK(t.termination == Termination::bound_hit);
  for (const OptIterate& it : t.iterates) {
    CHECK(it.params[0] <= 1.0);
    CHECK(it.params[0] >= -1.0);
  }
}

TEST_CASE("bfgs counts skipped curvature updates on a linear slope") {
  Objective obj;
  obj.bounds = {{-1.0}, {1.0}};
  obj.evaluate = [](const RealVector& x) { return x[0]; };
  obj.gradient = [](const RealVector&) { return RealVector{1.0}; };
  OptTrace t = bfgs(obj, {0.5});
  CHECK(t.termination == Termination::bound_hit);
  CHECK(t.final_params()[0] == -1.0);
  CHECK(t.curvature_skips > 0);
}

TEST_CASE("bfgs rejects a non-finite start") {
  Objective obj;
  obj.bounds = {{-1.0}, {1.0}};
  obj.evaluate = [](const RealVector& x) { return std::sqrt(x[0]); };  // NaN below 0
  CHECK_THROWS_AS(bfgs(obj, {-0.5}), NumericError);
}

TEST_CASE("gradient descent takes the textbook quadratic step") {
  OptTrace t = gradient_descent(quadratic_1d(0.0), {1.0}, 0.4, 1);
  REQUIRE(t.iterates.size() == 2);
  CHECK(t.iterates[1].params[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(t.termination == Termination::max_iter);
}

TEST_CASE("gradient descent terminates immediately at a stationary start") {
  OptTrace t = gradient_descent(quadratic_1d(0.0), {0.0}, 0.1, 50);
  CHECK(t.iterates.size() == 1);
  CHECK(t.termination == Termination::gradient_tol);
}

TEST_CASE("gradient descent matches the closed-form geometric decay") {
  const double lr = 0.1;
  OptTrace t = gradient_descent(quadratic_1d(0.0), {1.0}, lr, 20);
  REQUIRE(t.iterates.size() == 21);
  double expected = 1.0;
  for (std::size_t k = 0; k < t.iterates.size(); ++k) {
    CHECK(t.iterates[k].params[0] == doctest::Approx(expected).epsilon(1e-12));
    expected *= 1.0 - 2.0 * lr;
  }
}

TEST_CASE("finite-difference fallback matches an analytic derivative") {
  Objective obj = gramacy_objective();
  for (double x : {0.6, 1.1, 1.9, 2.6}) {
    const RealVector g = fd_gradient(obj, {x});
    const double exact = gramacy_derivative(x);
    CHECK(std::abs(g[0] - exact) / std::max(1.0, std::abs(exact)) < 1e-4);
  }
}

TEST_CASE("finite differences stay inside the box at the boundary") {
  int calls_outside = 0;
  Objective obj;
  obj.bounds = {{0.0}, {1.0}};
  obj.evaluate = [&calls_outside](const RealVector& x) {
    if (x[0] < 0.0 || x[0] > 1.0) ++calls_outside;
    return x[0] * x[0];
  };
  (void)fd_gradient(obj, {0.0});
  (void)fd_gradient(obj, {1.0});
  CHECK(calls_outside == 0);
  // one-sided difference at the edge still approximates the slope
  const RealVector g = fd_gradient(obj, {1.0});
  CHECK(g[0] == doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("two-step with identical objectives equals plain bfgs") {
  Objective obj = gramacy_objective();
  const RealVector x0{1.5};
  OptResult two = two_step_core(obj, obj, x0);
  OptTrace plain = bfgs(obj, x0);
  CHECK(two.x_predicted.values == plain.final_params());
  CHECK(two.has_secondary);
  CHECK(two.primary_trace.stage == Stage::primary);
  CHECK(two.secondary_trace.stage == Stage::secondary);
  CHECK(two.wall_time_seconds >= 0.0);
}

TEST_CASE("two-step secondary weakly improves the true objective") {
  Objective truth = gramacy_objective();
  // a deliberately misleading primary surrogate pulling toward x = 2.5
  Objective decoy = quadratic_1d(2.5, -1.0, 3.0);
  for (double start : {-0.8, 0.2, 1.1, 2.9}) {
    OptResult r = two_step_core(decoy, truth, {start});
    const double at_handoff = truth.evaluate(r.secondary_trace.iterates.front().params);
    const double at_end = truth.evaluate(r.x_predicted.values);
    CHECK(at_end <= at_handoff + 1e-12);
    CHECK(truth.bounds.contains(r.x_predicted.values));
  }
}

TEST_CASE("a primary stage that cannot move hands x0 to the secondary") {
  Objective stuck;
  stuck.bounds = {{-1.0}, {3.0}};
  stuck.evaluate = [](const RealVector& x) { return x[0] == 1.5 ? 0.0 : 1.0; };
  stuck.gradient = [](const RealVector&) { return RealVector{1.0}; };
  OptResult r = two_step_core(stuck, gramacy_objective(), {1.5});
  CHECK(r.primary_trace.termination == Termination::line_search_fail);
  CHECK(r.primary_trace.iterates.size() == 1);
  CHECK(r.secondary_trace.iterates.front().params[0] == 1.5);
  OptTrace plain = bfgs(gramacy_objective(), {1.5});
  CHECK(r.x_predicted.values == plain.final_params());
}

TEST_CASE("trace csv lists every iterate of every stage") {
  Objective obj = quadratic_1d(3.0);
  OptResult r = two_step_core(obj, obj, {0.0});
  const auto path = std::filesystem::temp_directory_path() / "invopt_trace.csv";
  save_traces_csv(path.string(), {r.primary_trace, r.secondary_trace}, {"x"});

  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "stage,iteration,x,value,grad_norm");
  std::size_t rows = 0, primary_rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (line.rfind("primary,", 0) == 0) ++primary_rows;
  }
  CHECK(rows == r.primary_trace.iterates.size() + r.secondary_trace.iterates.size());
  CHECK(primary_rows == r.primary_trace.iterates.size());
  std::filesystem::remove(path);
}

TEST_CASE("proxy and ground-truth objectives wrap the model and problem") {
  auto problem = landscape::make_problem(landscape::SystemKind::gramacy_lee, 11);
  proxy::EncodingDescriptor enc;
  enc.system_id = "gramacy_lee";
  enc.slot_count = 0;
  enc.param_count = 1;
  proxy::TrainingConfig t;
  t.dataset_size = 2;
  t.samples_per_trajectory = 8;
  t.batch_size = 4;
  t.epochs = 3;
  t.seed = 9;
  std::vector<nn::LayerSpec> hidden{{nn::LayerKind::dense, 8, nn::Activation::tanh}};
  proxy::ProxyModel model = proxy::make_proxy_model(enc, hidden, t);

  CHECK_THROWS_AS(two_step_optimize(model, problem, {1.5}), ConfigError);  // not trained

  proxy::Dataset data = proxy::generate_dataset(
      {landscape::make_problem(landscape::SystemKind::gramacy_lee, 1),
       landscape::make_problem(landscape::SystemKind::gramacy_lee, 2)},
      enc, t);
  proxy::TrainResult trained = proxy::train(data, model, {});

  Objective prox = make_proxy_objective(trained.model, problem);
  CHECK(prox.evaluate({0.7}) == proxy::predict_loss(trained.model, problem, {0.7}));
  const RealVector g = prox.gradient({0.7});
  CHECK(g.size() == 1);

  Objective truth = make_ground_truth_objective(problem);
  CHECK(truth.evaluate({0.7}) == problem.configuration_loss({0.7}));

  OptResult a = two_step_optimize(trained.model, problem, {1.5});
  OptResult b = two_step_optimize(trained.model, problem, {1.5});
  CHECK(a.x_predicted.values == b.x_predicted.values);
  CHECK(problem.true_params.bounds.contains(a.x_predicted.values));
  const double handoff = truth.evaluate(a.secondary_trace.iterates.front().params);
  CHECK(truth.evaluate(a.x_predicted.values) <= handoff + 1e-12);
}
