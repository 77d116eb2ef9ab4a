#pragma once

#include <string>
#include <vector>

#include "invopt/eval/metrics.hpp"
#include "invopt/landscape/systems.hpp"
#include "invopt/opt/objectives.hpp"

namespace invopt::eval {

enum class Method { two_step, bfgs, gd };

std::string to_string(Method m);
Method method_from_string(const std::string& name);

struct BenchmarkConfig {
  landscape::SystemKind kind = landscape::SystemKind::gramacy_lee;
  int problem_count = 32;
  std::vector<Method> methods{Method::two_step, Method::bfgs, Method::gd};
  std::uint64_t seed = 0;
  double gd_learning_rate = 1e-3;
  int gd_max_iter = 500;
  opt::BfgsOptions bfgs_options;
  RealVector thresholds;  // empty: default_thresholds of the system bounds

  void validate() const;
};

struct EvalRow {
  int problem_index = 0;
  Method method = Method::bfgs;
  RealVector x_true, x_pred;
  RealVector per_dim_error;  // |x_pred - x_true| per dimension
  double error = 0.0;        // scalar prediction error
  double resim = 0.0;        // re-simulation error at x_pred
  bool converged = false;    // false when the method or re-simulation threw
  std::string termination;
  double wall_seconds = 0.0;  // kept out of the deterministic dumps
};

struct EvalReport {
  std::string system_id;
  std::uint64_t seed = 0;
  std::vector<Method> methods;
  RealVector thresholds;
  std::vector<RealVector> starts;                  // shared x0 per problem
  std::vector<EvalRow> rows;                       // problem-major, method order
  std::vector<std::vector<AccuracyPoint>> curves;  // parallel to methods
};

// Fresh problems for a benchmark: seeded true parameters and, for PDE
// systems, seeded initial states.
std::vector<landscape::InverseProblem> make_benchmark_problems(
    landscape::SystemKind kind, int count, std::uint64_t seed);

// Runs every requested method on every problem from one shared start per
// problem. A method failure becomes a non-converged row; the run continues.
EvalReport run_benchmark(const BenchmarkConfig& config,
                         const std::vector<landscape::InverseProblem>& problems,
                         const proxy::ProxyModel* model = nullptr);
EvalReport run_benchmark(const BenchmarkConfig& config,
                         const proxy::ProxyModel* model = nullptr);

// Deterministic dumps: no timing data, stable field order, %.17g floats.
std::string report_csv(const EvalReport& report,
                       const std::vector<std::string>& param_names);
std::string curves_csv(const EvalReport& report);
std::string timings_csv(const EvalReport& report);
std::string report_hash(const EvalReport& report,
                        const std::vector<std::string>& param_names);

}  // namespace invopt::eval
