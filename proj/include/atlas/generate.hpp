#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "atlas/graph.hpp"
#include "atlas/model.hpp"
#include "atlas/vocab.hpp"

namespace atlas {

struct BeamOptions {
  int beam_width = 10;
  int max_len = 20;
  int bos_id = Vocabulary::kBos;
  int eos_id = Vocabulary::kEos;
  // Never emitted. Probabilities are renormalized over the remaining tokens.
  std::vector<int> banned;
};

struct Hypothesis {
  std::vector<int> tokens;  // ends with eos unless max_len was reached
  double log_score = 0.0;   // sum of token log-probabilities

  friend bool operator==(const Hypothesis&, const Hypothesis&) = default;
};

// Length-unnormalized beam search. At each step every live hypothesis is
// extended by every allowed token and the best beam_width candidates survive;
// candidates that emit eos or reach max_len retire to the result pool.
// Ties on score break toward the lexicographically smaller id sequence.
// Returns at most beam_width hypotheses, best first.
std::vector<Hypothesis> beam_search(const ModelParams& params, std::span<const int> event,
                                    Dimension dim, const BeamOptions& options);

// Argmax decoding with the same tie-break; equals beam_search at width 1.
Hypothesis greedy_decode(const ModelParams& params, std::span<const int> event, Dimension dim,
                         const BeamOptions& options);

struct Generation {
  std::string text;
  double score = 0.0;

  friend bool operator==(const Generation&, const Generation&) = default;
};

// Ranked outputs for one (event, dimension).
struct GenerationList {
  std::string event;
  Dimension dimension = Dimension::xIntent;
  int beam_width = 0;
  std::vector<Generation> entries;  // score descending, texts distinct

  friend bool operator==(const GenerationList&, const GenerationList&) = default;
};

// Beam search on a tokenized event, detokenized; entries that decode to the
// same string keep the better score. <pad> and <bos> are always banned,
// <unk> too when suppress_unk is set.
GenerationList generate(const ModelParams& params, const Vocabulary& vocab,
                        const std::string& event_text, Dimension dim, int beam_width,
                        bool suppress_unk = false);

struct GenerationRequest {
  std::string event;
  Dimension dimension;
};

// Serial reference and OpenMP kernel over many (event, dimension) pairs.
// Results come back in request order either way.
std::vector<GenerationList> generate_all(const ModelParams& params, const Vocabulary& vocab,
                                         const std::vector<GenerationRequest>& requests,
                                         int beam_width, bool suppress_unk = false);
std::vector<GenerationList> generate_all_parallel(const ModelParams& params,
                                                  const Vocabulary& vocab,
                                                  const std::vector<GenerationRequest>& requests,
                                                  int beam_width, bool suppress_unk, int threads);

// Token vectors for the retrieval baseline. Missing tokens map to zero.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(int dim) : dim_(dim) {}

  static EmbeddingTable from_model(const ModelParams& params, const Vocabulary& vocab);
  static EmbeddingTable load(const std::filesystem::path& path);

  void set(const std::string& token, Eigen::VectorXd v);
  Eigen::VectorXd lookup(const std::string& token) const;
  // Mean vector of the model tokens of text.
  Eigen::VectorXd mean(const std::string& text) const;
  int dim() const noexcept { return dim_; }

 private:
  int dim_ = 0;
  std::unordered_map<std::string, Eigen::VectorXd> vectors_;
};

// Cosine similarity; 0 when either vector is zero.
double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Precomputed mean vectors of the training events, per dimension.
class NearestNeighborIndex {
 public:
  NearestNeighborIndex(const AtlasGraph& train_graph, const EmbeddingTable& embeddings);
  GenerationList predict(const std::string& event_text, Dimension dim, int k = 10) const;

 private:
  struct Entry {
    std::string event;
    Eigen::VectorXd mean;
    std::vector<std::string> targets;  // distinct, non-empty, graph order
  };
  const EmbeddingTable* embeddings_;
  std::map<Dimension, std::vector<Entry>> by_dim_;
};

// Retrieval baseline: rank training events that have triples for dim by
// cosine of mean embeddings (ties lexicographic), then collect up to k
// distinct non-empty targets in that order. Scores are the similarities.
GenerationList nearest_neighbor_predict(const AtlasGraph& train_graph, const EmbeddingTable& embeddings,
                                        const std::string& event_text, Dimension dim, int k = 10);

// JSON lines: {"event", "dimension", "beam_width", "generations": [{"text","score"}]}.
void write_generations(const std::vector<GenerationList>& lists, std::ostream& out);
std::vector<GenerationList> read_generations(std::istream& in);

}  // namespace atlas
