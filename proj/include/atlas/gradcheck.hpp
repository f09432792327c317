#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "atlas/model.hpp"
#include "atlas/network.hpp"

namespace atlas {

struct GradCheckOptions {
  double epsilon = 1e-4;
  std::size_t samples = 200;
  std::uint64_t seed = 0;
  // Denominator floor for the relative error, so coordinates whose true
  // gradient is zero compare on an absolute scale.
  double floor = 1e-8;
  // Restrict sampling to tensors whose name passes; empty means all
  // tensors touched by the instance.
  std::function<bool(std::string_view)> tensor_filter;
};

struct GradCheckSample {
  std::string tensor;
  long index;
  double analytic;
  double numeric;
  double relative_error;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::vector<GradCheckSample> samples;
};

// Compares the backprop gradient of sequence_loss with central differences
// at randomly sampled coordinates. Sampling is stratified so the embedding
// rows of the instance, its encoder, its decoder cell and its output
// projection each get a share.
GradCheckResult gradient_check(const ModelParams& params, const TrainingInstance& instance,
                               const GradCheckOptions& options = {});

}  // namespace atlas
