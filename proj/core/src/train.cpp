#include "invopt/proxy/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>

#include "invopt/nn/adam.hpp"
#include "invopt/nn/tape.hpp"
#include "invopt/rng.hpp"

namespace invopt::proxy {

namespace {

// Chunked batch accumulation: chunks may run concurrently but are combined
// in index order, so gradients are bitwise stable for any thread count.
constexpr std::size_t kChunk = 16;

std::vector<std::size_t> shuffled_indices(std::uint64_t seed, int epoch, std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng = make_rng(derive_seed(seed, "shuffle", static_cast<std::uint64_t>(epoch)));
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

RealVector transformed_targets(const Dataset& data, const TrainingConfig& training) {
  RealVector t = data.losses;
  if (training.target_transform == "log1p")
    for (double& v : t) v = std::log1p(v);
  return t;
}

void check_setup(const Dataset& data, const ProxyModel& init) {
  data.validate();
  init.validate();
  require(!init.frozen, "initial model is already frozen");
  require(data.encoding == init.encoding, "dataset/model encoding mismatch");
  require(static_cast<std::size_t>(init.training.batch_size) <= data.size(),
          "batch size exceeds the dataset");
}

[[noreturn]] void fail_diverged(int epoch, int batch, const std::string& reason) {
  std::ostringstream msg;
  msg << "training diverged at epoch " << epoch << " batch " << batch << ": " << reason;
  throw NumericError(msg.str());
}

// Epoch/batch skeleton shared by both training paths. per_sample(k, sample,
// model, tape, back) evaluates one sample, where k is the position in the
// epoch's shuffled order; on_epoch runs serially before each epoch.
template <class OnEpoch, class PerSample>
TrainResult run_epochs(const Dataset& data, const ProxyModel& init,
                       const RegularizationConfig& reg, OnEpoch&& on_epoch,
                       PerSample&& per_sample) {
  const TrainingConfig& training = init.training;
  const std::size_t n = data.size();
  const std::size_t batch_size = static_cast<std::size_t>(training.batch_size);
  const std::size_t max_chunks = (std::min(batch_size, n) + kChunk - 1) / kChunk;

  TrainResult result;
  result.model = init;
  result.model.regularization = reg;
  result.epoch_losses.reserve(static_cast<std::size_t>(training.epochs));

  struct ChunkScratch {
    nn::GradientSet grads;
    nn::GradientTape tape;
    nn::GradientTape::Backward back;
    double loss_sum = 0.0;
  };
  std::vector<ChunkScratch> chunks_scratch;
  chunks_scratch.reserve(max_chunks);
  for (std::size_t c = 0; c < max_chunks; ++c)
    chunks_scratch.push_back({nn::make_gradients(init.spec), {}, {}, 0.0});
  nn::GradientSet total = nn::make_gradients(init.spec);

  for (int epoch = 0; epoch < training.epochs; ++epoch) {
    on_epoch(epoch);
    const std::vector<std::size_t> order = shuffled_indices(training.seed, epoch, n);
    double epoch_loss_sum = 0.0;
    int batch_index = 0;
    for (std::size_t start = 0; start < n; start += batch_size, ++batch_index) {
      const std::size_t stop = std::min(start + batch_size, n);
      const std::size_t batch_n = stop - start;
      const std::int64_t chunk_count =
          static_cast<std::int64_t>((batch_n + kChunk - 1) / kChunk);

      // Exceptions must not escape the parallel region; the first one is
      // rethrown afterwards with the epoch/batch attached.
      std::exception_ptr error = nullptr;
      std::atomic<bool> failed{false};
#pragma omp parallel for schedule(static)
      for (std::int64_t c = 0; c < chunk_count; ++c) {
        if (failed.load(std::memory_order_relaxed)) continue;
        ChunkScratch& s = chunks_scratch[static_cast<std::size_t>(c)];
        s.grads.zero();
        s.loss_sum = 0.0;
        const std::size_t lo = start + static_cast<std::size_t>(c) * kChunk;
        const std::size_t hi = std::min(lo + kChunk, stop);
        try {
          for (std::size_t k = lo; k < hi; ++k) {
            s.tape.reset();
            per_sample(k, order[k], result.model, s.tape, s.back);
            s.grads.add_scaled(s.back.grads, 1.0);
            s.loss_sum += s.back.output;
          }
        } catch (...) {
#pragma omp critical
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
      try {
        if (error) std::rethrow_exception(error);

        total.zero();
        double batch_loss_sum = 0.0;
        for (std::int64_t c = 0; c < chunk_count; ++c) {
          const ChunkScratch& s = chunks_scratch[static_cast<std::size_t>(c)];
          total.add_scaled(s.grads, 1.0);
          batch_loss_sum += s.loss_sum;
        }
        if (!std::isfinite(batch_loss_sum))
          throw NumericError("training loss is not finite");
        total.scale(1.0 / static_cast<double>(batch_n));
        nn::adam_step(result.model.spec, result.model.state, total,
                      training.learning_rate);
        epoch_loss_sum += batch_loss_sum;
      } catch (const NumericError& e) {
        fail_diverged(epoch, batch_index, e.what());
      }
    }
    result.epoch_losses.push_back(epoch_loss_sum / static_cast<double>(n));
  }
  result.model.frozen = true;
  return result;
}

}  // namespace

TrainResult train(const Dataset& data, const ProxyModel& init,
                  const RegularizationConfig& reg) {
  reg.validate();
  check_setup(data, init);

  const RealVector targets = transformed_targets(data, init.training);
  const std::size_t param_count = static_cast<std::size_t>(data.encoding.param_count);
  const std::size_t n = data.size();

  // The whole epoch's noise is drawn serially up front so concurrent chunks
  // see the same values; indexing is by position in the shuffled order.
  RealVector noise(n * param_count);
  auto on_epoch = [&](int epoch) {
    Rng rng = make_rng(
        derive_seed(init.training.seed, "sample-noise", static_cast<std::uint64_t>(epoch)));
    for (double& v : noise) v = normal(rng);
  };

  auto per_sample = [&](std::size_t k, std::size_t sample, const ProxyModel& m,
                        nn::GradientTape& tape, nn::GradientTape::Backward& back) {
    RealVector x = data.encoded_targets[sample];
    x.reserve(x.size() + param_count);
    for (std::size_t j = 0; j < param_count; ++j)
      x.push_back(data.params[sample][j] + reg.sigma * noise[k * param_count + j]);
    tape.begin(x);
    if (m.fourier.rows() > 0) tape.apply_fourier(m.fourier);
    tape.apply_network(m.spec, m.state);
    const double prediction = tape.scalar();
    const double gate = prediction > targets[sample] ? reg.mu : 1.0;
    tape.apply_squared_error(targets[sample]);
    tape.apply_scale(gate);
    tape.backward_into(back);
  };

  return run_epochs(data, init, reg, on_epoch, per_sample);
}

TrainResult train_unregularized(const Dataset& data, const ProxyModel& init) {
  check_setup(data, init);
  const RealVector targets = transformed_targets(data, init.training);
  const std::size_t param_count = static_cast<std::size_t>(data.encoding.param_count);

  auto per_sample = [&](std::size_t, std::size_t sample, const ProxyModel& m,
                        nn::GradientTape& tape, nn::GradientTape::Backward& back) {
    RealVector x = data.encoded_targets[sample];
    x.reserve(x.size() + param_count);
    for (std::size_t j = 0; j < param_count; ++j) x.push_back(data.params[sample][j]);
    tape.begin(x);
    if (m.fourier.rows() > 0) tape.apply_fourier(m.fourier);
    tape.apply_network(m.spec, m.state);
    tape.apply_squared_error(targets[sample]);
    tape.backward_into(back);
  };

  return run_epochs(data, init, RegularizationConfig{}, [](int) {}, per_sample);
}

}  // namespace invopt::proxy
