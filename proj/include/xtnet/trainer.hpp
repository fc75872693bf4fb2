#pragma once

#include <string>
#include <vector>

#include "xtnet/losses.hpp"
#include "xtnet/model.hpp"

namespace xtnet {

enum class Optimizer { sgd, adam };

struct TrainConfig {
  double learning_rate = 0.01;
  std::size_t epochs = 20;
  std::size_t batch_size = 256;
  Optimizer optimizer = Optimizer::adam;
  double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  std::uint64_t seed = 1;
  LossConfig loss;

  void validate() const;
};

struct EpochTrace {
  double factual = 0.0;
  double imbalance = 0.0;
  double total = 0.0;
  std::size_t skipped_phase1 = 0;  // batches with no isolated samples
};

struct TrainResult {
  std::vector<EpochTrace> trace;
};

// Indices of batch rows whose combo has at most one nonzero category.
std::vector<std::size_t> filter_isolated(const Dataset& data,
                                         const std::vector<std::size_t>& rows);

// Two-phase per-batch optimization: models reporting two_phase() first
// step their phase-1 parameters on the factual loss over the isolated
// sub-batch, then step phase-2 parameters on the weighted total loss
// over the full batch with phase-1 parameters frozen. Single-phase
// models run only the second step over all parameters.
TrainResult train(UpliftModel& model, const Dataset& data, const TrainConfig& cfg);

// epoch,factual,imbalance,total per line
void write_loss_trace_csv(const TrainResult& result, const std::string& path);

}  // namespace xtnet
