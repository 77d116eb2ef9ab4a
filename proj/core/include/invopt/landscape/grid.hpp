#pragma once

#include <functional>
#include <string>
#include <vector>

#include "invopt/landscape/problem.hpp"

namespace invopt::landscape {

enum class GridSource { ground_truth, proxy };

// Tensor-product sampling of a loss over the search box. Values are row-major
// with the last axis fastest.
struct LandscapeGrid {
  std::vector<std::string> axis_names;
  std::vector<RealVector> axes;
  RealVector values;
  GridSource source = GridSource::ground_truth;

  std::size_t node_count() const;
  RealVector point(std::size_t flat) const;
  void validate() const;
};

using GridEvaluator = std::function<double(const RealVector&)>;

// Evaluates at every node; empty evaluator means the problem's own
// configuration loss. Node evaluations may run in parallel; values land in
// disjoint slots so the grid is independent of evaluation order.
LandscapeGrid sample_grid(const InverseProblem& problem, const std::vector<int>& resolution,
                          const GridEvaluator& evaluator = {},
                          GridSource source = GridSource::ground_truth,
                          std::size_t node_budget = std::size_t{1} << 21);

// Interior nodes strictly smaller than every axis-adjacent neighbor.
int count_local_minima(const LandscapeGrid& grid);

// One row per node: parameter coordinates then loss, 17 significant digits.
void save_grid_csv(const std::string& path, const LandscapeGrid& grid);

}  // namespace invopt::landscape
