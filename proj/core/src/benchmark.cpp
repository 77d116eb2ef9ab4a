#include "invopt/eval/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <sstream>

#include "invopt/iohash.hpp"
#include "invopt/rng.hpp"

namespace invopt::eval {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// One method on one problem. Numerical failures anywhere along the run become
// a non-converged row so the rest of the benchmark is unaffected.
EvalRow run_row(const BenchmarkConfig& config, const landscape::InverseProblem& problem,
                int problem_index, Method method, const RealVector& x0,
                const proxy::ProxyModel* model) {
  EvalRow row;
  row.problem_index = problem_index;
  row.method = method;
  row.x_true = problem.true_params.values;
  const std::size_t dim = row.x_true.size();

  const auto t0 = std::chrono::steady_clock::now();
  try {
    RealVector x_pred;
    std::string termination;
    if (method == Method::two_step) {
      opt::OptResult r = opt::two_step_optimize(*model, problem, x0, config.bfgs_options);
      x_pred = r.x_predicted.values;
      termination = to_string(r.secondary_trace.termination);
    } else {
      const opt::Objective truth = opt::make_ground_truth_objective(problem);
      opt::OptTrace trace =
          method == Method::bfgs
              ? opt::bfgs(truth, x0, config.bfgs_options)
              : opt::gradient_descent(truth, x0, config.gd_learning_rate,
                                      config.gd_max_iter, config.bfgs_options);
      x_pred = trace.final_params();
      termination = to_string(trace.termination);
    }
    row.wall_seconds = seconds_since(t0);
    row.x_pred = x_pred;
    row.per_dim_error.resize(dim);
    for (std::size_t i = 0; i < dim; ++i)
      row.per_dim_error[i] = std::abs(x_pred[i] - row.x_true[i]);
    row.error = prediction_error(row.x_true, x_pred);
    row.resim = resimulation_error(problem, x_pred);
    row.converged = true;
    row.termination = termination;
  } catch (const NumericError& e) {
    row.wall_seconds = seconds_since(t0);
    row.x_pred.assign(dim, std::numeric_limits<double>::quiet_NaN());
    row.per_dim_error.assign(dim, kInf);
    row.error = kInf;
    row.resim = kInf;
    row.converged = false;
    row.termination = std::string("crash: ") + e.what();
  }
  return row;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::two_step: return "two_step";
    case Method::bfgs: return "bfgs";
    case Method::gd: return "gd";
  }
  throw ConfigError("unknown method");
}

Method method_from_string(const std::string& name) {
  if (name == "two_step") return Method::two_step;
  if (name == "bfgs") return Method::bfgs;
  if (name == "gd") return Method::gd;
  throw ConfigError("unknown method: " + name);
}

void BenchmarkConfig::validate() const {
  require(problem_count >= 1, "benchmark needs at least one problem");
  require(!methods.empty(), "benchmark needs at least one method");
  for (std::size_t i = 0; i < methods.size(); ++i)
    for (std::size_t j = i + 1; j < methods.size(); ++j)
      require(methods[i] != methods[j], "duplicate benchmark method");
  require(gd_learning_rate > 0.0, "gd learning rate must be positive");
  require(gd_max_iter >= 1, "gd needs at least one iteration");
  if (!thresholds.empty()) {
    require(std::is_sorted(thresholds.begin(), thresholds.end()),
            "thresholds must be sorted ascending");
    for (double t : thresholds) require(t > 0.0, "thresholds must be positive");
  }
}

std::vector<landscape::InverseProblem> make_benchmark_problems(landscape::SystemKind kind,
                                                               int count,
                                                               std::uint64_t seed) {
  require(count >= 1, "benchmark needs at least one problem");
  std::vector<landscape::InverseProblem> problems;
  problems.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i)
    problems.push_back(
        landscape::make_problem(kind, derive_seed(seed, "problem", static_cast<std::uint64_t>(i))));
  return problems;
}

EvalReport run_benchmark(const BenchmarkConfig& config,
                         const std::vector<landscape::InverseProblem>& problems,
                         const proxy::ProxyModel* model) {
  config.validate();
  require(!problems.empty(), "benchmark needs at least one problem");
  const std::size_t dim = problems[0].true_params.bounds.dim();
  for (const landscape::InverseProblem& p : problems) {
    p.validate();
    require(p.kind == config.kind, "problem/config system mismatch");
    require(p.true_params.bounds.dim() == dim, "problems disagree on dimension");
  }
  const bool wants_two_step =
      std::find(config.methods.begin(), config.methods.end(), Method::two_step) !=
      config.methods.end();
  if (wants_two_step) {
    require(model != nullptr, "two_step needs a trained model");
    model->validate();
    require(model->frozen, "two_step needs a trained model");
  }

  EvalReport report;
  report.system_id = problems[0].system_id;
  report.seed = config.seed;
  report.methods = config.methods;
  report.thresholds = config.thresholds.empty()
                          ? default_thresholds(problems[0].true_params.bounds)
                          : config.thresholds;

  // Every method attacks a problem from the same seeded start.
  const std::size_t n = problems.size();
  report.starts.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = make_rng(derive_seed(config.seed, "start", i));
    report.starts[i] = uniform_in_box(rng, problems[i].true_params.bounds);
  }

  const std::size_t m = config.methods.size();
  report.rows.resize(n * m);
  // Exceptions must not escape the parallel region; the first is rethrown.
  std::exception_ptr error = nullptr;
  std::atomic<bool> failed{false};
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t pi = 0; pi < static_cast<std::int64_t>(n); ++pi) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      const std::size_t p = static_cast<std::size_t>(pi);
      for (std::size_t mi = 0; mi < m; ++mi)
        report.rows[p * m + mi] = run_row(config, problems[p], static_cast<int>(p),
                                          config.methods[mi], report.starts[p], model);
    } catch (...) {
#pragma omp critical
      if (!failed.exchange(true)) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  report.curves.resize(m);
  for (std::size_t mi = 0; mi < m; ++mi) {
    RealVector errors(n);
    for (std::size_t p = 0; p < n; ++p) errors[p] = report.rows[p * m + mi].error;
    report.curves[mi] = accuracy_curve(errors, report.thresholds);
  }
  return report;
}

EvalReport run_benchmark(const BenchmarkConfig& config, const proxy::ProxyModel* model) {
  return run_benchmark(
      config, make_benchmark_problems(config.kind, config.problem_count, config.seed),
      model);
}

std::string report_csv(const EvalReport& report,
                       const std::vector<std::string>& param_names) {
  require(!report.rows.empty(), "report has no rows");
  require(param_names.size() == report.rows[0].x_true.size(),
          "param name count mismatch");
  std::ostringstream out;
  out << "problem,method";
  for (const std::string& nm : param_names) out << ",true_" << nm;
  for (const std::string& nm : param_names) out << ",pred_" << nm;
  for (const std::string& nm : param_names) out << ",err_" << nm;
  out << ",error,resim,converged,termination\n";
  for (const EvalRow& row : report.rows) {
    out << row.problem_index << ',' << to_string(row.method);
    for (double v : row.x_true) out << ',' << fmt(v);
    for (double v : row.x_pred) out << ',' << fmt(v);
    for (double v : row.per_dim_error) out << ',' << fmt(v);
    out << ',' << fmt(row.error) << ',' << fmt(row.resim) << ','
        << (row.converged ? 1 : 0) << ',' << row.termination << '\n';
  }
  return out.str();
}

std::string curves_csv(const EvalReport& report) {
  require(report.curves.size() == report.methods.size(),
          "curve count does not match method count");
  std::ostringstream out;
  out << "method,threshold,accuracy\n";
  for (std::size_t mi = 0; mi < report.methods.size(); ++mi)
    for (const AccuracyPoint& pt : report.curves[mi])
      out << to_string(report.methods[mi]) << ',' << fmt(pt.threshold) << ','
          << fmt(pt.accuracy) << '\n';
  return out.str();
}

std::string timings_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "problem,method,wall_seconds\n";
  for (const EvalRow& row : report.rows)
    out << row.problem_index << ',' << to_string(row.method) << ','
        << fmt(row.wall_seconds) << '\n';
  return out.str();
}

std::string report_hash(const EvalReport& report,
                        const std::vector<std::string>& param_names) {
  return content_hash(report_csv(report, param_names) + curves_csv(report));
}

}  // namespace invopt::eval
