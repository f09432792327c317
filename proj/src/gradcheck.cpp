#include "atlas/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "atlas/error.hpp"
#include "atlas/rng.hpp"

namespace atlas {

namespace {

struct Coordinate {
  std::size_t tensor;
  long index;
};

}  // namespace

GradCheckResult gradient_check(const ModelParams& params, const TrainingInstance& instance,
                               const GradCheckOptions& options) {
  check_instance(params, instance);
  if (!(options.epsilon > 0.0)) throw DataError("gradient check epsilon must be positive");

  ModelParams analytic = params.zeros_like();
  sequence_loss_and_gradient(params, instance, analytic);
  ModelParams probe = params;

  const auto probe_tensors = probe.tensors();
  const auto grad_tensors = analytic.tensors();

  const std::string enc_prefix = "encoder/" + params.encoder_id(instance.dimension) + "/";
  const std::string dec_prefix = "decoder/" + std::string(dimension_name(instance.dimension)) + "/";

  std::set<int> token_rows(instance.event.begin(), instance.event.end());
  token_rows.insert(instance.target.begin(), instance.target.end() - 1);

  // Four strata: embedding rows used by the instance, encoder + bridge,
  // decoder cell, output projection.
  std::vector<std::vector<Coordinate>> strata(4);
  for (std::size_t k = 0; k < probe_tensors.size(); ++k) {
    const auto& t = probe_tensors[k];
    if (options.tensor_filter && !options.tensor_filter(t.name)) continue;
    int stratum = -1;
    if (t.name == "embedding") stratum = 0;
    else if (t.name.starts_with(enc_prefix)) stratum = 1;
    else if (t.name.starts_with(dec_prefix + "cell.")) stratum = 2;
    else if (t.name.starts_with(dec_prefix + "out.")) stratum = 3;
    if (stratum < 0) continue;
    if (stratum == 0) {
      // Column-major storage: index = row + col * rows.
      for (int row : token_rows) {
        for (Eigen::Index c = 0; c < t.cols; ++c) strata[0].push_back({k, static_cast<long>(row + c * t.rows)});
      }
    } else {
      for (Eigen::Index i = 0; i < t.size(); ++i) strata[static_cast<std::size_t>(stratum)].push_back({k, static_cast<long>(i)});
    }
  }

  std::vector<std::size_t> live;
  for (std::size_t s = 0; s < strata.size(); ++s) {
    if (!strata[s].empty()) live.push_back(s);
  }
  if (live.empty()) throw DataError("gradient check: no coordinates match the tensor filter");

  Rng rng(options.seed);
  GradCheckResult result;
  for (std::size_t n = 0; n < options.samples; ++n) {
    const auto& pool = strata[live[n % live.size()]];
    const Coordinate c = pool[static_cast<std::size_t>(rng.below(pool.size()))];
    double* slot = probe_tensors[c.tensor].data + c.index;
    const double saved = *slot;
    *slot = saved + options.epsilon;
    const double plus = sequence_loss(probe, instance);
    *slot = saved - options.epsilon;
    const double minus = sequence_loss(probe, instance);
    *slot = saved;

    const double numeric = (plus - minus) / (2.0 * options.epsilon);
    const double a = grad_tensors[c.tensor].data[c.index];
    const double denom = std::max({std::abs(a), std::abs(numeric), options.floor});
    const double rel = std::abs(a - numeric) / denom;
    result.max_relative_error = std::max(result.max_relative_error, rel);
    result.samples.push_back({probe_tensors[c.tensor].name, c.index, a, numeric, rel});
  }
  return result;
}

}  // namespace atlas
