#include "invopt/landscape/grid.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>

namespace invopt::landscape {

std::size_t LandscapeGrid::node_count() const {
  std::size_t n = 1;
  for (const RealVector& axis : axes) n *= axis.size();
  return axes.empty() ? 0 : n;
}

RealVector LandscapeGrid::point(std::size_t flat) const {
  RealVector x(axes.size());
  for (std::size_t d = axes.size(); d-- > 0;) {
    x[d] = axes[d][flat % axes[d].size()];
    flat /= axes[d].size();
  }
  return x;
}

void LandscapeGrid::validate() const {
  require(!axes.empty(), "grid has no axes");
  require(axis_names.size() == axes.size(), "axis name count mismatch");
  for (const RealVector& axis : axes) {
    require(axis.size() >= 2, "grid axis needs at least 2 points");
    for (std::size_t i = 1; i < axis.size(); ++i)
      require(axis[i] > axis[i - 1], "grid axis must be sorted strictly");
  }
  require(values.size() == node_count(), "grid value count mismatch");
  if (!all_finite(values)) throw NumericError("grid values are not finite");
  if (source == GridSource::ground_truth)
    for (double v : values) require(v >= 0.0, "ground-truth loss must be non-negative");
}

LandscapeGrid sample_grid(const InverseProblem& problem, const std::vector<int>& resolution,
                          const GridEvaluator& evaluator, GridSource source,
                          std::size_t node_budget) {
  const Box& box = problem.true_params.bounds;
  const std::size_t dims = box.low.size();
  require(resolution.size() == dims, "resolution dimension mismatch");

  LandscapeGrid grid;
  grid.source = source;
  if (problem.param_names.size() == dims) {
    grid.axis_names = problem.param_names;
  } else {
    grid.axis_names.resize(dims);
    for (std::size_t d = 0; d < dims; ++d) grid.axis_names[d] = "x" + std::to_string(d);
  }
  std::size_t total = 1;
  for (std::size_t d = 0; d < dims; ++d) {
    require(resolution[d] >= 2, "grid resolution must be at least 2 per dimension");
    total *= static_cast<std::size_t>(resolution[d]);
    RealVector axis(resolution[d]);
    for (int j = 0; j < resolution[d]; ++j)
      axis[j] = box.low[d] + (box.high[d] - box.low[d]) * j / (resolution[d] - 1);
    grid.axes.push_back(std::move(axis));
  }
  if (total > node_budget) {
    std::ostringstream msg;
    msg << "grid needs " << total << " nodes, budget is " << node_budget;
    throw ConfigError(msg.str());
  }

  const GridEvaluator eval =
      evaluator ? evaluator
                : GridEvaluator([&problem](const RealVector& x) {
                    return problem.configuration_loss(x);
                  });
  grid.values.assign(total, 0.0);
  const std::int64_t n = static_cast<std::int64_t>(total);
  // Exceptions must not escape the parallel region; the first is rethrown.
  std::exception_ptr error = nullptr;
  std::atomic<bool> failed{false};
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      grid.values[static_cast<std::size_t>(i)] =
          eval(grid.point(static_cast<std::size_t>(i)));
    } catch (...) {
#pragma omp critical
      if (!failed.exchange(true)) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  grid.validate();
  return grid;
}

int count_local_minima(const LandscapeGrid& grid) {
  grid.validate();
  const std::size_t dims = grid.axes.size();
  std::vector<std::size_t> shape(dims), stride(dims);
  for (std::size_t d = 0; d < dims; ++d) shape[d] = grid.axes[d].size();
  stride[dims - 1] = 1;
  for (std::size_t d = dims - 1; d-- > 0;) stride[d] = stride[d + 1] * shape[d + 1];

  int count = 0;
  std::vector<std::size_t> idx(dims, 1);
  const std::size_t total = grid.node_count();
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rem = flat;
    bool interior = true;
    for (std::size_t d = 0; d < dims; ++d) {
      idx[d] = rem / stride[d];
      rem %= stride[d];
      if (idx[d] == 0 || idx[d] + 1 >= shape[d]) interior = false;
    }
    if (!interior) continue;
    const double v = grid.values[flat];
    bool minimum = true;
    for (std::size_t d = 0; d < dims && minimum; ++d) {
      if (v >= grid.values[flat - stride[d]]) minimum = false;
      if (v >= grid.values[flat + stride[d]]) minimum = false;
    }
    if (minimum) ++count;
  }
  return count;
}

void save_grid_csv(const std::string& path, const LandscapeGrid& grid) {
  grid.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for write: " + path);
  for (const std::string& name : grid.axis_names) out << name << ",";
  out << "loss\n";
  char buf[40];
  const std::size_t total = grid.node_count();
  for (std::size_t i = 0; i < total; ++i) {
    const RealVector x = grid.point(i);
    for (double c : x) {
      std::snprintf(buf, sizeof(buf), "%.17g", c);
      out << buf << ",";
    }
    std::snprintf(buf, sizeof(buf), "%.17g", grid.values[i]);
    out << buf << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace invopt::landscape
