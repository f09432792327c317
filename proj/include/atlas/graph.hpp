#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "atlas/dimension.hpp"

namespace atlas {

enum class Split { Train, Dev, Test };

std::string_view split_name(Split s) noexcept;  // "train" | "dev" | "test"
std::optional<Split> parse_split(std::string_view name) noexcept;

// A normalized base event: a verb phrase with person variables and blanks.
class EventPhrase {
 public:
  // Throws DataError when the text is empty or a PersonY/PersonZ slot
  // appears without PersonX.
  static EventPhrase from_text(std::string_view text);

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::string text() const;
  // Subset of {PersonX, PersonY, PersonZ} in that order.
  const std::vector<std::string>& person_slots() const noexcept { return slots_; }
  std::size_t blank_count() const noexcept { return blanks_; }
  bool has_slot(std::string_view var) const noexcept;

  friend bool operator==(const EventPhrase& a, const EventPhrase& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::string> slots_;
  std::size_t blanks_ = 0;
};

class InferenceTarget {
 public:
  // Throws DataError on empty text. "none" (any case) is the empty sentinel.
  static InferenceTarget from_text(std::string_view text);
  static InferenceTarget empty() { return from_text("none"); }

  const std::string& text() const noexcept { return text_; }
  bool is_empty() const noexcept { return empty_; }

  friend bool operator==(const InferenceTarget&, const InferenceTarget&) = default;

 private:
  std::string text_;
  bool empty_ = false;
};

// One worker's annotation as it appears in an atlas file.
struct Triple {
  EventPhrase event;
  Dimension dimension;
  InferenceTarget target;
  std::string worker_id;
  Split split = Split::Train;

  friend bool operator==(const Triple&, const Triple&) = default;
};

// A distinct (event, dimension, target) edge with every worker that produced it.
struct GraphTriple {
  std::string event;
  Dimension dimension;
  std::string target;
  bool empty = false;
  Split split = Split::Train;
  std::vector<std::string> workers;  // sorted, unique

  // Number of worker annotations collapsed into this edge.
  std::size_t annotation_count() const noexcept {
    return workers.empty() ? 1 : workers.size();
  }

  friend bool operator==(const GraphTriple&, const GraphTriple&) = default;
};

// Immutable after build_graph; every accessor is const and thread-safe.
class AtlasGraph {
 public:
  AtlasGraph() = default;

  // Sorted by (event key, dimension name, target key).
  const std::vector<GraphTriple>& triples() const noexcept { return triples_; }
  // Distinct base-event texts, sorted by key.
  const std::vector<std::string>& events() const noexcept { return events_; }
  // Distinct node keys over events and non-empty targets, sorted.
  const std::vector<std::string>& nodes() const noexcept { return nodes_; }
  // Non-fatal notes raised during construction (e.g. split conflicts).
  const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

  // Every triple for (event, dim); empty span when either is unseen.
  std::span<const GraphTriple> adjacent(std::string_view event_text, Dimension dim) const;

  // All (event key, dimension) pairs present, in triple order.
  std::vector<std::pair<std::string, Dimension>> keys() const;

  bool empty() const noexcept { return triples_.empty(); }

  // The split recorded for an event (its first triple), if the event exists.
  std::optional<Split> event_split(std::string_view event_text) const;

  // Expand back into one Triple per worker, in graph order.
  std::vector<Triple> to_triples() const;

 private:
  friend AtlasGraph build_graph(std::vector<Triple> triples);

  std::vector<GraphTriple> triples_;
  std::vector<std::string> events_;
  std::vector<std::string> nodes_;
  std::vector<std::string> diagnostics_;
  std::map<std::pair<std::string, Dimension>, std::pair<std::size_t, std::size_t>> adjacency_;
};

// Collapse duplicates (same event, dimension and target keys), merge worker
// provenance and index adjacency. Construction is single-threaded.
AtlasGraph build_graph(std::vector<Triple> triples);

// Word totals and node counts kept as an exact ratio.
struct WordAverage {
  std::size_t words = 0;
  std::size_t nodes = 0;

  double value() const noexcept {
    return nodes == 0 ? 0.0 : static_cast<double>(words) / static_cast<double>(nodes);
  }
  friend bool operator==(const WordAverage&, const WordAverage&) = default;
};

struct StatsReport {
  std::size_t triples_total = 0;
  std::map<ContentType, std::size_t> triples_by_content_type;
  std::size_t empty_annotations = 0;
  std::size_t nodes_total = 0;
  std::map<ContentType, std::size_t> nodes_by_content_type;
  std::map<ContentType, WordAverage> avg_words_per_node;
  WordAverage avg_words_all_nodes;
  WordAverage avg_words_base_events;
  std::size_t base_event_count = 0;
  std::size_t nodes_appearing_multiple = 0;

  friend bool operator==(const StatsReport&, const StatsReport&) = default;
};

StatsReport graph_stats(const AtlasGraph& graph);

// Targets for (event, dim) in graph order. Empty sentinels are skipped unless
// include_empty is set.
std::vector<InferenceTarget> query_inferences(const AtlasGraph& graph,
                                              std::string_view event_text,
                                              Dimension dim,
                                              bool include_empty = false);

}  // namespace atlas
