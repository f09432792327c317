#include "atlas/graph.hpp"

#include <algorithm>
#include <set>
#include <tuple>
#include <unordered_map>

#include "atlas/error.hpp"
#include "atlas/text.hpp"

namespace atlas {

std::string_view split_name(Split s) noexcept {
  switch (s) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "?";
}

std::optional<Split> parse_split(std::string_view name) noexcept {
  if (name == "train") return Split::Train;
  if (name == "dev") return Split::Dev;
  if (name == "test") return Split::Test;
  return std::nullopt;
}

EventPhrase EventPhrase::from_text(std::string_view text) {
  EventPhrase e;
  e.tokens_ = split_whitespace(text);
  if (e.tokens_.empty()) throw DataError("event text is empty");
  bool seen[3] = {false, false, false};
  for (const auto& tok : e.tokens_) {
    if (tok == kBlankToken) ++e.blanks_;
    if (starts_with_person_variable(tok)) seen[tok[6] - 'X'] = true;
  }
  if ((seen[1] || seen[2]) && !seen[0]) {
    throw DataError("event '" + e.text() + "' uses PersonY/PersonZ without PersonX");
  }
  static constexpr const char* kVars[] = {"PersonX", "PersonY", "PersonZ"};
  for (int i = 0; i < 3; ++i) {
    if (seen[i]) e.slots_.emplace_back(kVars[i]);
  }
  return e;
}

std::string EventPhrase::text() const { return join(tokens_); }

bool EventPhrase::has_slot(std::string_view var) const noexcept {
  return std::find(slots_.begin(), slots_.end(), var) != slots_.end();
}

InferenceTarget InferenceTarget::from_text(std::string_view text) {
  InferenceTarget t;
  t.text_ = collapse_whitespace(text);
  if (t.text_.empty()) throw DataError("inference target is empty");
  t.empty_ = to_lower(t.text_) == kEmptyAnnotation;
  if (t.empty_) t.text_ = std::string(kEmptyAnnotation);
  return t;
}

std::span<const GraphTriple> AtlasGraph::adjacent(std::string_view event_text,
                                                  Dimension dim) const {
  auto it = adjacency_.find({node_key(event_text), dim});
  if (it == adjacency_.end()) return {};
  const auto [lo, hi] = it->second;
  return std::span<const GraphTriple>(triples_).subspan(lo, hi - lo);
}

std::vector<std::pair<std::string, Dimension>> AtlasGraph::keys() const {
  std::vector<std::pair<std::string, Dimension>> out;
  for (const auto& t : triples_) {
    std::pair<std::string, Dimension> k{node_key(t.event), t.dimension};
    if (out.empty() || out.back() != k) out.push_back(std::move(k));
  }
  return out;
}

std::optional<Split> AtlasGraph::event_split(std::string_view event_text) const {
  const std::string key = node_key(event_text);
  auto it = std::lower_bound(triples_.begin(), triples_.end(), key,
                             [](const GraphTriple& t, const std::string& k) {
                               return node_key(t.event) < k;
                             });
  if (it == triples_.end() || node_key(it->event) != key) return std::nullopt;
  return it->split;
}

std::vector<Triple> AtlasGraph::to_triples() const {
  std::vector<Triple> out;
  for (const auto& t : triples_) {
    const auto event = EventPhrase::from_text(t.event);
    const auto target = InferenceTarget::from_text(t.target);
    if (t.workers.empty()) {
      out.push_back({event, t.dimension, target, "", t.split});
    }
    for (const auto& w : t.workers) out.push_back({event, t.dimension, target, w, t.split});
  }
  return out;
}

AtlasGraph build_graph(std::vector<Triple> triples) {
  using Key = std::tuple<std::string, std::string_view, std::string>;
  struct Slot {
    GraphTriple triple;
    std::set<std::string> workers;
  };
  std::map<Key, Slot> merged;

  AtlasGraph g;
  std::size_t implied = 0;
  for (auto& t : triples) {
    const std::string event_text = t.event.text();
    Key key{node_key(event_text), dimension_name(t.dimension), node_key(t.target.text())};
    auto [it, inserted] = merged.try_emplace(std::move(key));
    Slot& slot = it->second;
    if (inserted) {
      slot.triple.event = event_text;
      slot.triple.dimension = t.dimension;
      slot.triple.target = t.target.text();
      slot.triple.empty = t.target.is_empty();
      slot.triple.split = t.split;
      // Implied participants are legal; just count them.
      if (classify_dimension(t.dimension).subject == Subject::Theme &&
          !t.event.has_slot("PersonY") && !t.target.is_empty()) {
        ++implied;
      }
    } else if (slot.triple.split != t.split) {
      g.diagnostics_.push_back("split conflict for '" + event_text + "'; keeping " +
                               std::string(split_name(slot.triple.split)));
    }
    slot.workers.insert(std::move(t.worker_id));
  }

  if (implied > 0) {
    g.diagnostics_.push_back(std::to_string(implied) +
                             " theme-dimension triples on events without PersonY (implied participants)");
  }

  g.triples_.reserve(merged.size());
  for (auto& [key, slot] : merged) {
    slot.triple.workers.assign(slot.workers.begin(), slot.workers.end());
    // A lone empty worker id means no provenance was recorded.
    if (slot.triple.workers.size() == 1 && slot.triple.workers[0].empty()) {
      slot.triple.workers.clear();
    }
    g.triples_.push_back(std::move(slot.triple));
  }

  std::set<std::string> event_keys;
  std::set<std::string> node_keys;
  std::vector<std::string> event_texts;
  for (std::size_t i = 0; i < g.triples_.size(); ++i) {
    const auto& t = g.triples_[i];
    std::string ek = node_key(t.event);
    if (event_keys.insert(ek).second) event_texts.push_back(t.event);
    node_keys.insert(ek);
    if (!t.empty) node_keys.insert(node_key(t.target));
    auto [it, inserted] = g.adjacency_.try_emplace({std::move(ek), t.dimension}, i, i + 1);
    if (!inserted) it->second.second = i + 1;
  }
  g.events_ = std::move(event_texts);
  g.nodes_.assign(node_keys.begin(), node_keys.end());
  return g;
}

StatsReport graph_stats(const AtlasGraph& graph) {
  StatsReport r;
  std::map<ContentType, std::set<std::string>> targets_by_type;
  std::unordered_map<std::string, std::size_t> occurrences;

  for (const auto& t : graph.triples()) {
    if (t.empty) {
      ++r.empty_annotations;
      continue;
    }
    const ContentType ct = classify_dimension(t.dimension).content_type;
    ++r.triples_total;
    ++r.triples_by_content_type[ct];
    std::string tk = node_key(t.target);
    targets_by_type[ct].insert(tk);
    ++occurrences[node_key(t.event)];
    ++occurrences[std::move(tk)];
  }

  for (const auto& [ct, keys] : targets_by_type) {
    r.nodes_by_content_type[ct] = keys.size();
    WordAverage avg;
    for (const auto& k : keys) avg.words += split_whitespace(k).size();
    avg.nodes = keys.size();
    r.avg_words_per_node[ct] = avg;
  }

  r.nodes_total = graph.nodes().size();
  for (const auto& k : graph.nodes()) r.avg_words_all_nodes.words += split_whitespace(k).size();
  r.avg_words_all_nodes.nodes = r.nodes_total;

  r.base_event_count = graph.events().size();
  for (const auto& e : graph.events()) r.avg_words_base_events.words += split_whitespace(e).size();
  r.avg_words_base_events.nodes = r.base_event_count;

  for (const auto& [key, n] : occurrences) {
    if (n > 1) ++r.nodes_appearing_multiple;
  }
  return r;
}

std::vector<InferenceTarget> query_inferences(const AtlasGraph& graph,
                                              std::string_view event_text,
                                              Dimension dim,
                                              bool include_empty) {
  std::vector<InferenceTarget> out;
  for (const auto& t : graph.adjacent(event_text, dim)) {
    if (t.empty && !include_empty) continue;
    out.push_back(InferenceTarget::from_text(t.target));
  }
  return out;
}

}  // namespace atlas
