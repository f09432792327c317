#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "atlas/dimension.hpp"

namespace atlas {

class Rng;
class Vocabulary;

// Encoder-sharing configurations. Single9 trains nine independent
// encoder-decoders; the three multitask variants share one encoder per group
// of the taxonomy. NearestNeighbor is the retrieval baseline and has no
// network parameters.
enum class Variant { Single9, EventInvolEvent, EventPersonXY, EventPrePost, NearestNeighbor };

std::string_view variant_name(Variant v) noexcept;  // "single9", "event-invol", ...
std::optional<Variant> parse_variant(std::string_view name) noexcept;

struct ModelConfig {
  Variant variant = Variant::EventInvolEvent;
  int embed_dim = 64;   // encoder/decoder input size
  int enc_hidden = 64;  // both directions together; must be even
  int dec_hidden = 64;
  int max_decode_len = 20;
  double learning_rate = 1e-3;
  int batch_size = 32;
  int epochs = 10;
  std::uint64_t seed = 1;
  double clip_norm = 5.0;  // global gradient norm; <= 0 disables clipping
  double init_scale = 0.1;
  bool freeze_embeddings = false;

  // Throws DataError on a bad combination.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Dimension -> encoder id. Throws DataError for NearestNeighbor.
std::map<Dimension, std::string> encoder_grouping(Variant variant);

// Gated recurrent cell. Rows of W, U and b are stacked as
// [update gate; reset gate; candidate], each block `hidden` rows tall.
struct GruParams {
  Eigen::MatrixXd W;  // 3H x I
  Eigen::MatrixXd U;  // 3H x H
  Eigen::VectorXd b;  // 3H

  static GruParams zeros(int input, int hidden);
  int hidden() const noexcept { return static_cast<int>(U.cols()); }
  int input() const noexcept { return static_cast<int>(W.cols()); }
};

struct EncoderParams {
  GruParams forward;        // hidden enc_hidden/2
  GruParams backward;       // hidden enc_hidden/2
  Eigen::MatrixXd bridge_W;  // dec_hidden x enc_hidden
  Eigen::VectorXd bridge_b;  // dec_hidden
};

struct DecoderParams {
  GruParams cell;           // hidden dec_hidden
  Eigen::MatrixXd out_W;    // |V| x dec_hidden
  Eigen::VectorXd out_b;    // |V|
};

// A named view over one parameter tensor's storage.
struct TensorRef {
  std::string name;
  double* data;
  Eigen::Index rows;
  Eigen::Index cols;

  Eigen::Index size() const noexcept { return rows * cols; }
};

struct ConstTensorRef {
  std::string name;
  const double* data;
  Eigen::Index rows;
  Eigen::Index cols;

  Eigen::Index size() const noexcept { return rows * cols; }
};

class ModelParams {
 public:
  ModelParams() = default;

  // All-zero parameters sized for config and vocabulary.
  static ModelParams zeros(const ModelConfig& config, std::size_t vocab_size);
  // Uniform(-init_scale, init_scale) weights, zero biases.
  static ModelParams random(const ModelConfig& config, std::size_t vocab_size, Rng& rng);

  ModelParams zeros_like() const;

  const ModelConfig& config() const noexcept { return config_; }
  std::size_t vocab_size() const noexcept { return vocab_size_; }
  const std::map<Dimension, std::string>& grouping() const noexcept { return grouping_; }
  bool has_dimension(Dimension d) const { return grouping_.contains(d); }
  std::vector<Dimension> dimensions() const;

  Eigen::MatrixXd& embedding() noexcept { return embedding_; }  // |V| x embed_dim
  const Eigen::MatrixXd& embedding() const noexcept { return embedding_; }

  std::map<std::string, EncoderParams>& encoders() noexcept { return encoders_; }
  const std::map<std::string, EncoderParams>& encoders() const noexcept { return encoders_; }
  std::map<Dimension, DecoderParams>& decoders() noexcept { return decoders_; }
  const std::map<Dimension, DecoderParams>& decoders() const noexcept { return decoders_; }

  // The encoder shared by every dimension of the same group. Throws DataError
  // if the dimension is not part of this model.
  EncoderParams& encoder_for(Dimension d);
  const EncoderParams& encoder_for(Dimension d) const;
  const std::string& encoder_id(Dimension d) const;
  DecoderParams& decoder(Dimension d);
  const DecoderParams& decoder(Dimension d) const;

  // Every tensor, sorted by name. The order fixes checkpoint layout:
  // bridges and encoders by encoder id, decoders by dimension name.
  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;

  std::size_t parameter_count() const;
  bool all_finite() const;

  friend bool operator==(const ModelParams& a, const ModelParams& b);

 private:
  ModelConfig config_;
  std::size_t vocab_size_ = 0;
  std::map<Dimension, std::string> grouping_;
  Eigen::MatrixXd embedding_;
  std::map<std::string, EncoderParams> encoders_;
  std::map<Dimension, DecoderParams> decoders_;
};

// token<TAB>f1 f2 ... fd. Rows for tokens present in the vocabulary are
// copied into the embedding matrix; returns how many rows were set. Throws
// DataError on a width mismatch or malformed line.
std::size_t load_static_embeddings(const std::filesystem::path& path, const Vocabulary& vocab,
                                   ModelParams& params);

}  // namespace atlas
