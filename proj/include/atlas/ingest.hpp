#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "atlas/graph.hpp"

namespace atlas {

using WordSet = std::unordered_set<std::string>;

// Replace lexicon names (case-insensitive, possessive 's kept) with PersonX,
// PersonY, PersonZ in first-mention order. Existing variables keep their
// slot. Throws DataError on more than three distinct people or empty input.
EventPhrase normalize_event(std::string_view raw, const WordSet& name_lexicon);

enum class CorpusSource { Stories, Blogs, Ngrams };

std::string_view corpus_source_name(CorpusSource s) noexcept;

// (verb, argument span) co-occurrence counts from one corpus.
struct FrequencyTable {
  CorpusSource source = CorpusSource::Stories;
  std::map<std::pair<std::string, std::string>, std::uint64_t> counts;

  // Throws DataError for counts below 1.
  void add(std::string verb, std::string argument, std::uint64_t count);
};

// Default thresholds: 5 for stories, 100 for blogs. Ngrams use a rank
// cutoff instead; see ngram_rank_threshold.
std::uint64_t default_threshold(CorpusSource source);

// Count of the entry at rank `top_k` (1-based, by descending count), so that
// blanking with this threshold keeps exactly the top-k entries up to ties.
std::uint64_t ngram_rank_threshold(const FrequencyTable& freq, std::size_t top_k = 10000);

// The predicate is the first token that is not a person variable or a blank.
// Every argument span listed for that verb whose count is below threshold
// is replaced by a single ___ token. Throws DataError when no verb exists.
EventPhrase blank_infrequent_args(const EventPhrase& event, const FrequencyTable& freq,
                                  std::uint64_t threshold);

struct CorefVoteRecord {
  EventPhrase event_candidate;
  int votes_valid = 0;  // 0..3

  static constexpr int kWorkers = 3;
};

// Keeps candidates with at least two valid votes; order preserved.
std::vector<EventPhrase> filter_coref_combinations(const std::vector<CorefVoteRecord>& records);

using ContentKey = std::pair<std::string, std::string>;

// First two lowercased tokens that are neither stopwords, person variables,
// nor blanks; padded with empty strings.
ContentKey content_key(const EventPhrase& event, const WordSet& stopwords);

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

struct SplitAssignment {
  std::map<std::string, Split> assignment;  // base event text -> split
  SplitRatios ratios;
  std::uint64_t seed = 0;

  std::size_t count(Split s) const;
};

// Group events by content key, shuffle groups with the seed, then place
// groups largest-first into whichever split is furthest below its target
// event count (Train, Dev, Test order on ties).
SplitAssignment split_events(const std::vector<EventPhrase>& events, const SplitRatios& ratios,
                             std::uint64_t seed, const WordSet& stopwords);

// Built-in 40-word list: articles, prepositions, auxiliaries, pronouns.
const WordSet& default_stopwords();

// One entry per line; blank lines and '#' comments ignored.
WordSet load_word_list(const std::filesystem::path& path, bool lowercase = true);

// TSV verb<TAB>args<TAB>count<TAB>source. Every row must name the same source.
FrequencyTable load_frequency_table(const std::filesystem::path& path);

}  // namespace atlas
