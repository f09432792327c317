#include "atlas/vocab.hpp"

#include <algorithm>
#include <map>

#include "atlas/error.hpp"
#include "atlas/text.hpp"

namespace atlas {

namespace {
constexpr const char* kReserved[Vocabulary::kNumReserved] = {
    "<pad>", "<unk>", "<bos>", "<eos>", "PersonX", "PersonY", "PersonZ", "___",
};
}  // namespace

Vocabulary::Vocabulary() {
  for (const char* t : kReserved) append(t);
}

void Vocabulary::append(std::string token) {
  const int next = static_cast<int>(tokens_.size());
  if (!ids_.emplace(token, next).second) throw DataError("duplicate vocabulary token '" + token + "'");
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < kNumReserved) throw DataError("vocabulary is missing reserved tokens");
  for (int i = 0; i < kNumReserved; ++i) {
    if (tokens[i] != kReserved[i]) throw DataError("vocabulary reserved token mismatch at id " + std::to_string(i));
  }
  Vocabulary v;
  for (std::size_t i = kNumReserved; i < tokens.size(); ++i) v.append(std::move(tokens[i]));
  return v;
}

int Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return ids_.contains(std::string(token));
}

const std::string& Vocabulary::token(int id) const {
  return tokens_.at(static_cast<std::size_t>(id));
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

std::vector<int> Vocabulary::encode_target(const std::vector<std::string>& tokens) const {
  std::vector<int> out;
  out.reserve(tokens.size() + 2);
  out.push_back(kBos);
  for (const auto& t : tokens) out.push_back(id(t));
  out.push_back(kEos);
  return out;
}

std::vector<std::string> Vocabulary::decode(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  for (int i : ids) {
    if (i == kBos || i == kEos || i == kPad) continue;
    out.push_back(token(i));
  }
  return out;
}

std::vector<std::string> model_tokens(std::string_view text) {
  auto tokens = split_whitespace(text);
  for (auto& t : tokens) {
    if (is_person_variable(t)) continue;
    t = to_lower(t);
    if (t == "personx") t = "PersonX";
    else if (t == "persony") t = "PersonY";
    else if (t == "personz") t = "PersonZ";
  }
  return tokens;
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& sequences, int min_count) {
  if (min_count < 1) throw DataError("min_count must be >= 1");
  Vocabulary v;
  std::map<std::string, std::size_t> counts;
  for (const auto& seq : sequences) {
    for (const auto& t : seq) {
      if (!v.contains(t)) ++counts[t];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : counts) {
    if (n >= static_cast<std::size_t>(min_count)) kept.emplace_back(tok, n);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens = v.tokens();
  for (auto& [tok, n] : kept) tokens.push_back(std::move(tok));
  return Vocabulary::from_tokens(std::move(tokens));
}

Vocabulary build_vocab(const AtlasGraph& graph, int min_count) {
  std::vector<std::vector<std::string>> sequences;
  std::string last_event;
  for (const auto& t : graph.triples()) {
    if (t.split != Split::Train) continue;
    if (t.event != last_event) {
      sequences.push_back(model_tokens(t.event));
      last_event = t.event;
    }
    if (t.empty) continue;
    auto toks = model_tokens(t.target);
    for (std::size_t i = 0; i < t.annotation_count(); ++i) sequences.push_back(toks);
  }
  return build_vocab(sequences, min_count);
}

}  // namespace atlas
