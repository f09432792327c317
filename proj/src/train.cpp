#include "atlas/train.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "atlas/error.hpp"
#include "atlas/rng.hpp"

namespace atlas {

std::vector<TrainingInstance> make_instances(const AtlasGraph& graph, const Vocabulary& vocab,
                                             const ModelParams& params, Split split) {
  std::vector<TrainingInstance> out;
  for (const auto& t : graph.triples()) {
    if (t.split != split || t.empty || !params.has_dimension(t.dimension)) continue;
    TrainingInstance inst{vocab.encode(model_tokens(t.event)), t.dimension,
                          vocab.encode_target(model_tokens(t.target)), ""};
    if (t.workers.empty()) {
      out.push_back(std::move(inst));
      continue;
    }
    for (const auto& w : t.workers) {
      inst.worker_id = w;
      out.push_back(inst);
    }
  }
  return out;
}

AdamState::AdamState(const ModelParams& shape) : m_(shape.zeros_like()), v_(shape.zeros_like()) {}

void AdamState::step(ModelParams& params, const ModelParams& grad, double learning_rate,
                     bool freeze_embeddings) {
  ++step_;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step_));
  auto p = params.tensors();
  auto g = grad.tensors();
  auto m = m_.tensors();
  auto v = v_.tensors();
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (freeze_embeddings && p[k].name == "embedding") continue;
    for (Eigen::Index i = 0; i < p[k].size(); ++i) {
      const double gi = g[k].data[i];
      m[k].data[i] = kBeta1 * m[k].data[i] + (1.0 - kBeta1) * gi;
      v[k].data[i] = kBeta2 * v[k].data[i] + (1.0 - kBeta2) * gi * gi;
      const double mhat = m[k].data[i] / c1;
      const double vhat = v[k].data[i] / c2;
      p[k].data[i] -= learning_rate * mhat / (std::sqrt(vhat) + kEps);
    }
  }
}

double gradient_norm(const ModelParams& grad) {
  double sq = 0.0;
  for (const auto& t : grad.tensors()) {
    for (Eigen::Index i = 0; i < t.size(); ++i) sq += t.data[i] * t.data[i];
  }
  return std::sqrt(sq);
}

namespace {

void scale_tensors(ModelParams& p, double factor) {
  for (auto& t : p.tensors()) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data[i] *= factor;
  }
}

void zero_tensors(ModelParams& p) {
  for (auto& t : p.tensors()) std::fill(t.data, t.data + t.size(), 0.0);
}

void add_tensors(ModelParams& into, const ModelParams& from) {
  auto a = into.tensors();
  auto b = from.tensors();
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (Eigen::Index i = 0; i < a[k].size(); ++i) a[k].data[i] += b[k].data[i];
  }
}

// Weighted objective for one batch; accumulates its gradient into grad.
double batch_objective(const ModelParams& params, const std::vector<TrainingInstance>& data,
                       const std::vector<std::size_t>& batch, ModelParams& grad,
                       const TrainOptions& options) {
  std::map<Dimension, std::size_t> per_dim;
  for (std::size_t i : batch) ++per_dim[data[i].dimension];
  const double n_dims = static_cast<double>(per_dim.size());
  std::vector<double> weights(batch.size());
  for (std::size_t j = 0; j < batch.size(); ++j) {
    weights[j] = 1.0 / (n_dims * static_cast<double>(per_dim[data[batch[j]].dimension]));
  }

  double objective = 0.0;
#ifdef _OPENMP
  if (options.parallel_batches && options.threads > 1) {
    const int threads = options.threads;
    std::vector<ModelParams> partial(static_cast<std::size_t>(threads), grad.zeros_like());
    std::vector<double> losses(batch.size());
#pragma omp parallel for num_threads(threads) schedule(static)
    for (std::ptrdiff_t j = 0; j < static_cast<std::ptrdiff_t>(batch.size()); ++j) {
      const auto idx = static_cast<std::size_t>(j);
      losses[idx] = sequence_loss_and_gradient(params, data[batch[idx]],
                                               partial[static_cast<std::size_t>(omp_get_thread_num())],
                                               weights[idx]);
    }
    for (const auto& g : partial) add_tensors(grad, g);
    for (std::size_t j = 0; j < batch.size(); ++j) objective += weights[j] * losses[j];
    return objective;
  }
#endif
  (void)options;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    objective += weights[j] * sequence_loss_and_gradient(params, data[batch[j]], grad, weights[j]);
  }
  return objective;
}

}  // namespace

TrainResult train(ModelParams params, const std::vector<TrainingInstance>& data,
                  const TrainOptions& options) {
  const ModelConfig cfg = params.config();
  cfg.validate();
  for (const auto& inst : data) check_instance(params, inst);

  TrainResult result;
  AdamState adam(params);
  Rng order_rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  ModelParams grad = params.zeros_like();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(order);
    double epoch_total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(end));
      zero_tensors(grad);
      const double objective = batch_objective(params, data, batch, grad, options);
      if (!std::isfinite(objective)) {
        throw NumericError("non-finite training loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batches));
      }
      if (cfg.clip_norm > 0.0) {
        const double norm = gradient_norm(grad);
        if (!std::isfinite(norm)) throw NumericError("non-finite gradient norm at epoch " + std::to_string(epoch));
        if (norm > cfg.clip_norm) scale_tensors(grad, cfg.clip_norm / norm);
      }
      adam.step(params, grad, cfg.learning_rate, cfg.freeze_embeddings);
      epoch_total += objective;
      ++batches;
    }
    const double mean = batches ? epoch_total / static_cast<double>(batches) : 0.0;
    result.epoch_loss.push_back(mean);
    if (options.on_epoch) options.on_epoch(epoch, mean);
    if (mean < options.stop_below) break;
  }
  if (!params.all_finite()) throw NumericError("training produced non-finite parameters");
  result.params = std::move(params);
  return result;
}

double dataset_loss(const ModelParams& params, const std::vector<TrainingInstance>& data) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const auto& inst : data) total += sequence_loss(params, inst);
  return total / static_cast<double>(data.size());
}

double dataset_loss_parallel(const ModelParams& params, const std::vector<TrainingInstance>& data,
                             int threads) {
  if (data.empty()) return 0.0;
  for (const auto& inst : data) check_instance(params, inst);
  std::vector<double> losses(data.size());
#pragma omp parallel for num_threads(threads) schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(data.size()); ++i) {
    losses[static_cast<std::size_t>(i)] = sequence_loss(params, data[static_cast<std::size_t>(i)]);
  }
  (void)threads;
  double total = 0.0;
  for (double l : losses) total += l;
  return total / static_cast<double>(data.size());
}

}  // namespace atlas
