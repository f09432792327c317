#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "atlas/graph.hpp"

namespace atlas {

// Token <-> id bijection. The first eight ids are reserved and always present.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;
  static constexpr int kPersonX = 4;
  static constexpr int kPersonY = 5;
  static constexpr int kPersonZ = 6;
  static constexpr int kBlank = 7;
  static constexpr int kNumReserved = 8;

  Vocabulary();

  // Rebuild from a stored token list (checkpoints). Throws DataError if the
  // reserved prefix is wrong or a token repeats.
  static Vocabulary from_tokens(std::vector<std::string> tokens);

  int id(std::string_view token) const;  // kUnk when absent
  bool contains(std::string_view token) const;
  const std::string& token(int id) const;
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  std::vector<int> encode(const std::vector<std::string>& tokens) const;
  // <bos> + tokens + <eos>
  std::vector<int> encode_target(const std::vector<std::string>& tokens) const;
  // Drops <bos>/<eos>/<pad>.
  std::vector<std::string> decode(const std::vector<int>& ids) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  void append(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

// Model tokenization: whitespace split, lowercased, with person variables
// kept in their canonical PersonX/PersonY/PersonZ spelling.
std::vector<std::string> model_tokens(std::string_view text);

// Tokens seen at least min_count times, ordered by count descending then
// lexicographically, after the reserved block.
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& sequences, int min_count);

// Vocabulary over the Train split of a graph: each base event once plus every
// non-empty target annotation.
Vocabulary build_vocab(const AtlasGraph& graph, int min_count);

}  // namespace atlas
