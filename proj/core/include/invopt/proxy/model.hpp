#pragma once

#include <string>
#include <vector>

#include "invopt/landscape/problem.hpp"
#include "invopt/nn/fourier.hpp"
#include "invopt/nn/network.hpp"
#include "invopt/proxy/config.hpp"
#include "invopt/proxy/encoding.hpp"

namespace invopt::proxy {

// Surrogate for the configuration loss: network over [encoded Y* | X_s],
// optionally Fourier-lifted. The Fourier matrix is drawn once at construction
// and never trained. frozen flips after training; predictions work either way
// so an untrained model can be probed.
struct ProxyModel {
  nn::NetworkSpec spec;
  nn::NetworkState state;
  nn::FourierMap fourier;  // rows == 0 means no lift
  RegularizationConfig regularization;
  TrainingConfig training;
  EncodingDescriptor encoding;
  bool frozen = false;

  void validate() const;
};

ProxyModel make_proxy_model(const EncodingDescriptor& encoding,
                            const std::vector<nn::LayerSpec>& hidden,
                            const TrainingConfig& training,
                            const RegularizationConfig& regularization = {},
                            int kernel_size = 3);

// Deterministic, noise-free surrogate evaluation. Inverts the target
// transform, so the result lives on the configuration-loss scale.
double predict_loss(const ProxyModel& model, const RealVector& encoded_target,
                    const RealVector& xs);
double predict_loss(const ProxyModel& model, const landscape::InverseProblem& problem,
                    const RealVector& xs);

// d predict_loss / d xs via the gradient tape.
RealVector predict_loss_gradient(const ProxyModel& model, const RealVector& encoded_target,
                                 const RealVector& xs);
RealVector predict_loss_gradient(const ProxyModel& model,
                                 const landscape::InverseProblem& problem,
                                 const RealVector& xs);

void save_model(const std::string& path, const ProxyModel& model);
ProxyModel load_model(const std::string& path);

}  // namespace invopt::proxy
