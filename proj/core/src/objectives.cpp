#include "invopt/opt/objectives.hpp"

#include <memory>

namespace invopt::opt {

Objective make_proxy_objective(const proxy::ProxyModel& model,
                               const landscape::InverseProblem& problem) {
  model.validate();
  problem.validate();
  require(problem.system_id == model.encoding.system_id,
          "problem system does not match the model encoding");
  // the objective owns copies, so it stays valid past its inputs
  auto m = std::make_shared<const proxy::ProxyModel>(model);
  auto encoded = std::make_shared<const RealVector>(
      proxy::encode_trajectory(problem.target, model.encoding));
  Objective obj;
  obj.bounds = problem.true_params.bounds;
  obj.evaluate = [m, encoded](const RealVector& xs) {
    return proxy::predict_loss(*m, *encoded, xs);
  };
  obj.gradient = [m, encoded](const RealVector& xs) {
    return proxy::predict_loss_gradient(*m, *encoded, xs);
  };
  return obj;
}

Objective make_ground_truth_objective(const landscape::InverseProblem& problem) {
  problem.validate();
  auto p = std::make_shared<const landscape::InverseProblem>(problem);
  Objective obj;
  obj.bounds = problem.true_params.bounds;
  obj.evaluate = [p](const RealVector& xs) { return p->configuration_loss(xs); };
  return obj;
}

OptResult two_step_optimize(const proxy::ProxyModel& model,
                            const landscape::InverseProblem& problem,
                            const RealVector& x0, const BfgsOptions& options) {
  require(model.frozen, "two-step optimization needs a trained model");
  return two_step_core(make_proxy_objective(model, problem),
                       make_ground_truth_objective(problem), x0, options);
}

}  // namespace invopt::opt
