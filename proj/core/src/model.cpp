#include "invopt/proxy/model.hpp"

#include <cmath>

#include "invopt/iohash.hpp"
#include "invopt/nn/checkpoint.hpp"
#include "invopt/nn/tape.hpp"
#include "invopt/rng.hpp"
#include "json.hpp"

namespace invopt::proxy {

void ProxyModel::validate() const {
  encoding.validate();
  regularization.validate();
  training.validate();
  spec.validate();
  nn::validate_state(spec, state);
  require(spec.output_dim == 1, "proxy network must be scalar-valued");
  require(spec.input_dim == encoding.network_input_dim(),
          "network input dimension does not match the encoding");
  if (encoding.fourier_rows > 0) {
    require(fourier.rows() == encoding.fourier_rows &&
                fourier.input_dim() == encoding.raw_input_dim(),
            "fourier map does not match the encoding");
  } else {
    require(fourier.rows() == 0, "encoding disables the fourier lift");
  }
}

ProxyModel make_proxy_model(const EncodingDescriptor& encoding,
                            const std::vector<nn::LayerSpec>& hidden,
                            const TrainingConfig& training,
                            const RegularizationConfig& regularization, int kernel_size) {
  ProxyModel m;
  m.encoding = encoding;
  m.regularization = regularization;
  m.training = training;
  m.spec.input_dim = encoding.network_input_dim();
  m.spec.hidden = hidden;
  m.spec.output_dim = 1;
  m.spec.kernel_size = kernel_size;
  m.state = nn::init_network(m.spec, derive_seed(training.seed, "proxy-init"));
  if (encoding.fourier_rows > 0)
    m.fourier = nn::make_fourier_map(encoding.fourier_rows, encoding.raw_input_dim(),
                                     encoding.fourier_scale,
                                     derive_seed(training.seed, "proxy-fourier"));
  m.validate();
  return m;
}

namespace {

RealVector assemble_input(const ProxyModel& model, const RealVector& encoded_target,
                          const RealVector& xs) {
  require(encoded_target.size() == static_cast<std::size_t>(model.encoding.slot_count),
          "encoded target width does not match the encoding");
  require(xs.size() == static_cast<std::size_t>(model.encoding.param_count),
          "parameter width does not match the encoding");
  RealVector x;
  x.reserve(encoded_target.size() + xs.size());
  x.insert(x.end(), encoded_target.begin(), encoded_target.end());
  x.insert(x.end(), xs.begin(), xs.end());
  return x;
}

RealVector problem_encoding(const ProxyModel& model,
                            const landscape::InverseProblem& problem) {
  require(problem.system_id == model.encoding.system_id,
          "problem system does not match the model encoding");
  return encode_trajectory(problem.target, model.encoding);
}

}  // namespace

double predict_loss(const ProxyModel& model, const RealVector& encoded_target,
                    const RealVector& xs) {
  RealVector x = assemble_input(model, encoded_target, xs);
  if (model.fourier.rows() > 0) x = nn::fourier_features(model.fourier, x);
  const RealVector out = nn::forward(model.spec, model.state, x);
  const double raw = out[0];
  return model.training.target_transform == "log1p" ? std::expm1(raw) : raw;
}

double predict_loss(const ProxyModel& model, const landscape::InverseProblem& problem,
                    const RealVector& xs) {
  return predict_loss(model, problem_encoding(model, problem), xs);
}

RealVector predict_loss_gradient(const ProxyModel& model, const RealVector& encoded_target,
                                 const RealVector& xs) {
  const RealVector x = assemble_input(model, encoded_target, xs);
  nn::GradientTape tape;
  tape.begin(x);
  if (model.fourier.rows() > 0) tape.apply_fourier(model.fourier);
  tape.apply_network(model.spec, model.state);
  if (model.training.target_transform == "log1p") tape.apply_expm1();
  const nn::GradientTape::Backward back = tape.backward();
  return RealVector(back.grad_input.begin() + model.encoding.slot_count,
                    back.grad_input.end());
}

RealVector predict_loss_gradient(const ProxyModel& model,
                                 const landscape::InverseProblem& problem,
                                 const RealVector& xs) {
  return predict_loss_gradient(model, problem_encoding(model, problem), xs);
}

void save_model(const std::string& path, const ProxyModel& model) {
  model.validate();
  nn::Checkpoint c;
  c.spec = model.spec;
  c.state = model.state;
  c.fourier = model.fourier;
  c.learning_rate = model.training.learning_rate;
  nlohmann::json extra{
      {"regularization",
       {{"sigma", model.regularization.sigma}, {"mu", model.regularization.mu}}},
      {"training",
       {{"dataset_size", model.training.dataset_size},
        {"samples_per_trajectory", model.training.samples_per_trajectory},
        {"batch_size", model.training.batch_size},
        {"epochs", model.training.epochs},
        {"learning_rate", model.training.learning_rate},
        {"seed", model.training.seed},
        {"target_transform", model.training.target_transform}}},
      {"encoding", nlohmann::json::parse(model.encoding.to_json())},
      {"frozen", model.frozen}};
  c.extra_json = extra.dump();
  nn::save_checkpoint(path, c);
}

ProxyModel load_model(const std::string& path) {
  const nn::Checkpoint c = nn::load_checkpoint(path);
  if (c.extra_json.empty()) throw IoError("model file has no proxy section: " + path);
  nlohmann::json extra = nlohmann::json::parse(c.extra_json, nullptr, false);
  if (extra.is_discarded()) throw IoError("malformed proxy section: " + path);

  ProxyModel m;
  m.spec = c.spec;
  m.state = c.state;
  m.fourier = c.fourier;
  try {
    const auto& reg = extra.at("regularization");
    m.regularization.sigma = reg.at("sigma").get<double>();
    m.regularization.mu = reg.at("mu").get<double>();
    const auto& tr = extra.at("training");
    m.training.dataset_size = tr.at("dataset_size").get<int>();
    m.training.samples_per_trajectory = tr.at("samples_per_trajectory").get<int>();
    m.training.batch_size = tr.at("batch_size").get<int>();
    m.training.epochs = tr.at("epochs").get<int>();
    m.training.learning_rate = tr.at("learning_rate").get<double>();
    m.training.seed = tr.at("seed").get<std::uint64_t>();
    m.training.target_transform = tr.at("target_transform").get<std::string>();
    m.encoding = EncodingDescriptor::from_json(extra.at("encoding").dump());
    m.frozen = extra.at("frozen").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("model proxy section missing field: ") + e.what());
  }
  try {
    m.validate();
  } catch (const ConfigError& e) {
    throw IoError("invalid model content: " + std::string(e.what()));
  }
  return m;
}

}  // namespace invopt::proxy
