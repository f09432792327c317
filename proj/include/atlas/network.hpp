#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "atlas/model.hpp"

namespace atlas {

// One training example: a worker's annotation of one event along one dimension.
struct TrainingInstance {
  std::vector<int> event;   // encoder input ids, non-empty
  Dimension dimension;
  std::vector<int> target;  // <bos> ... <eos>, at least two ids
  std::string worker_id;
};

// Single GRU step: h' = (1 - z) * n + z * h.
Eigen::VectorXd gru_step(const GruParams& cell, const Eigen::VectorXd& x, const Eigen::VectorXd& h);

// Concatenated final forward and backward states of the encoder serving
// `encoder_id` (length enc_hidden). Throws DataError on an empty sequence.
Eigen::VectorXd encode(const ModelParams& params, const std::string& encoder_id,
                       std::span<const int> event);

// Decoder start state for a dimension: bridge applied to encode(...).
Eigen::VectorXd initial_decoder_state(const ModelParams& params, Dimension dim,
                                      std::span<const int> event);

struct DecodeStep {
  Eigen::VectorXd probs;   // softmax over the vocabulary
  Eigen::VectorXd hidden;  // next decoder state
};

DecodeStep decode_step(const ModelParams& params, Dimension dim, const Eigen::VectorXd& hidden,
                       int prev_token);

// Same step returning raw logits instead of probabilities.
std::pair<Eigen::VectorXd, Eigen::VectorXd> decode_logits(const ModelParams& params, Dimension dim,
                                                          const Eigen::VectorXd& hidden,
                                                          int prev_token);

// Numerically stable log-softmax.
Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits);

// Teacher-forced mean of -log p(gold) over target positions 1..m.
double sequence_loss(const ModelParams& params, const TrainingInstance& instance);

// Loss plus gradient; adds weight * d(loss)/d(theta) into grad, which must be
// shaped like params (ModelParams::zeros_like). Returns the unweighted loss.
double sequence_loss_and_gradient(const ModelParams& params, const TrainingInstance& instance,
                                  ModelParams& grad, double weight = 1.0);

// Throws DataError when ids fall outside the vocabulary or shapes are wrong.
void check_instance(const ModelParams& params, const TrainingInstance& instance);

}  // namespace atlas
