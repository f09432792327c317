#pragma once

#include <functional>
#include <vector>

#include "atlas/graph.hpp"
#include "atlas/model.hpp"
#include "atlas/network.hpp"
#include "atlas/vocab.hpp"

namespace atlas {

// One instance per worker annotation of a non-empty target, restricted to the
// given split and to dimensions the model covers. Empty ("none") targets are
// skipped.
std::vector<TrainingInstance> make_instances(const AtlasGraph& graph, const Vocabulary& vocab,
                                             const ModelParams& params, Split split = Split::Train);

struct TrainOptions {
  // Fan the per-instance gradients of a batch out over OpenMP threads. The
  // reduction order then depends on the thread count, so runs are only
  // reproducible for a fixed thread count. Off by default.
  bool parallel_batches = false;
  int threads = 1;
  // Called after every epoch with (epoch index, mean batch objective).
  std::function<void(int, double)> on_epoch;
  // End early once an epoch's mean objective falls below this.
  double stop_below = 0.0;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> epoch_loss;  // mean batch objective per epoch
};

// Mini-batch Adam on the multitask objective: per batch, the mean over the
// dimensions present of each dimension's mean instance loss. Deterministic for
// a given seed when parallel_batches is off. Throws NumericError on NaN/Inf.
TrainResult train(ModelParams params, const std::vector<TrainingInstance>& data,
                  const TrainOptions& options = {});

// Mean sequence_loss over a dataset. The parallel kernel evaluates instances
// concurrently and reduces in index order, so it matches the serial path bit
// for bit.
double dataset_loss(const ModelParams& params, const std::vector<TrainingInstance>& data);
double dataset_loss_parallel(const ModelParams& params, const std::vector<TrainingInstance>& data,
                             int threads);

// Adam update state; exposed for tests.
class AdamState {
 public:
  explicit AdamState(const ModelParams& shape);
  // params -= lr * mhat / (sqrt(vhat) + eps), skipping the embedding when frozen.
  void step(ModelParams& params, const ModelParams& grad, double learning_rate, bool freeze_embeddings);

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

 private:
  ModelParams m_;
  ModelParams v_;
  long step_ = 0;
};

// Global L2 norm over every gradient tensor.
double gradient_norm(const ModelParams& grad);

}  // namespace atlas
