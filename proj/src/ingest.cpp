#include "atlas/ingest.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <fstream>

#include "atlas/error.hpp"
#include "atlas/rng.hpp"
#include "atlas/text.hpp"

namespace atlas {

EventPhrase normalize_event(std::string_view raw, const WordSet& name_lexicon) {
  auto tokens = split_whitespace(raw);
  if (tokens.empty()) throw DataError("cannot normalize an empty event");

  static constexpr const char* kVars[] = {"PersonX", "PersonY", "PersonZ"};
  bool taken[3] = {false, false, false};
  for (const auto& tok : tokens) {
    if (starts_with_person_variable(tok)) taken[tok[6] - 'X'] = true;
  }

  auto split_possessive = [](const std::string& tok) -> std::pair<std::string, std::string> {
    if (tok.size() > 2 && tok.compare(tok.size() - 2, 2, "'s") == 0) {
      return {tok.substr(0, tok.size() - 2), "'s"};
    }
    return {tok, ""};
  };

  std::map<std::string, int> assigned;  // lowercased name -> variable index
  for (auto& tok : tokens) {
    if (starts_with_person_variable(tok)) continue;
    auto [base, suffix] = split_possessive(tok);
    std::string key = to_lower(base);
    if (!name_lexicon.contains(key) && !name_lexicon.contains(base)) continue;
    auto it = assigned.find(key);
    if (it == assigned.end()) {
      int slot = 0;
      while (slot < 3 && taken[slot]) ++slot;
      if (slot == 3) {
        throw DataError("more than three distinct people in event '" + std::string(raw) + "'");
      }
      taken[slot] = true;
      it = assigned.emplace(std::move(key), slot).first;
    }
    tok = kVars[it->second] + suffix;
  }
  return EventPhrase::from_text(join(tokens));
}

std::string_view corpus_source_name(CorpusSource s) noexcept {
  switch (s) {
    case CorpusSource::Stories: return "stories";
    case CorpusSource::Blogs: return "blogs";
    case CorpusSource::Ngrams: return "ngrams";
  }
  return "?";
}

void FrequencyTable::add(std::string verb, std::string argument, std::uint64_t count) {
  if (count < 1) throw DataError("frequency counts must be >= 1");
  counts[{to_lower(verb), to_lower(collapse_whitespace(argument))}] += count;
}

std::uint64_t default_threshold(CorpusSource source) {
  switch (source) {
    case CorpusSource::Stories: return 5;
    case CorpusSource::Blogs: return 100;
    case CorpusSource::Ngrams: break;
  }
  throw DataError("ngram tables use a rank cutoff; call ngram_rank_threshold");
}

std::uint64_t ngram_rank_threshold(const FrequencyTable& freq, std::size_t top_k) {
  if (top_k == 0) throw DataError("rank cutoff must be >= 1");
  std::vector<std::uint64_t> counts;
  counts.reserve(freq.counts.size());
  for (const auto& [key, c] : freq.counts) counts.push_back(c);
  if (counts.size() <= top_k) return 1;
  std::nth_element(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(top_k - 1),
                   counts.end(), std::greater<>());
  return counts[top_k - 1];
}

EventPhrase blank_infrequent_args(const EventPhrase& event, const FrequencyTable& freq,
                                  std::uint64_t threshold) {
  if (threshold < 1) throw DataError("blanking threshold must be >= 1");
  std::vector<std::string> tokens = event.tokens();
  std::size_t verb_at = tokens.size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!starts_with_person_variable(tokens[i]) && tokens[i] != kBlankToken) {
      verb_at = i;
      break;
    }
  }
  if (verb_at == tokens.size()) {
    throw DataError("event '" + event.text() + "' has no verb token to anchor blanking");
  }
  const std::string verb = to_lower(tokens[verb_at]);

  // Rare argument spans for this verb, longest first so nested spans lose.
  std::vector<std::vector<std::string>> rare;
  for (auto it = freq.counts.lower_bound({verb, ""});
       it != freq.counts.end() && it->first.first == verb; ++it) {
    if (it->second < threshold && !it->first.second.empty()) {
      rare.push_back(split_whitespace(it->first.second));
    }
  }
  std::stable_sort(rare.begin(), rare.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });

  for (const auto& span : rare) {
    std::vector<std::string> next(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(verb_at + 1));
    std::size_t i = verb_at + 1;
    while (i < tokens.size()) {
      bool match = i + span.size() <= tokens.size();
      for (std::size_t k = 0; match && k < span.size(); ++k) {
        match = to_lower(tokens[i + k]) == span[k];
      }
      if (match) {
        next.emplace_back(kBlankToken);
        i += span.size();
      } else {
        next.push_back(tokens[i++]);
      }
    }
    tokens = std::move(next);
  }
  return EventPhrase::from_text(join(tokens));
}

std::vector<EventPhrase> filter_coref_combinations(const std::vector<CorefVoteRecord>& records) {
  std::vector<EventPhrase> out;
  for (const auto& r : records) {
    if (r.votes_valid < 0 || r.votes_valid > CorefVoteRecord::kWorkers) {
      throw DataError("coreference votes must be in 0..3, got " + std::to_string(r.votes_valid));
    }
    if (r.votes_valid >= 2) out.push_back(r.event_candidate);
  }
  return out;
}

ContentKey content_key(const EventPhrase& event, const WordSet& stopwords) {
  ContentKey key;
  int found = 0;
  for (const auto& tok : event.tokens()) {
    if (starts_with_person_variable(tok) || tok == kBlankToken) continue;
    std::string lower = to_lower(tok);
    if (stopwords.contains(lower)) continue;
    (found == 0 ? key.first : key.second) = std::move(lower);
    if (++found == 2) break;
  }
  return key;
}

std::size_t SplitAssignment::count(Split s) const {
  return static_cast<std::size_t>(std::count_if(
      assignment.begin(), assignment.end(), [s](const auto& kv) { return kv.second == s; }));
}

SplitAssignment split_events(const std::vector<EventPhrase>& events, const SplitRatios& ratios,
                             std::uint64_t seed, const WordSet& stopwords) {
  const double r[3] = {ratios.train, ratios.dev, ratios.test};
  for (double x : r) {
    if (!(x >= 0.0)) throw DataError("split ratios must be non-negative");
  }
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) throw DataError("split ratios must sum to 1");

  std::map<ContentKey, std::vector<std::string>> by_key;
  std::map<std::string, bool> seen;
  for (const auto& e : events) {
    std::string text = e.text();
    if (!seen.emplace(text, true).second) continue;
    by_key[content_key(e, stopwords)].push_back(std::move(text));
  }

  std::vector<std::vector<std::string>> groups;
  groups.reserve(by_key.size());
  for (auto& [k, members] : by_key) groups.push_back(std::move(members));

  if (groups.size() < 3 && r[0] > 0 && r[1] > 0 && r[2] > 0) {
    throw DataError("need at least 3 content-key groups for a three-way split, found " +
                    std::to_string(groups.size()));
  }

  Rng rng(seed);
  rng.shuffle(groups);
  std::stable_sort(groups.begin(), groups.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });

  const double n = static_cast<double>(seen.size());
  double filled[3] = {0, 0, 0};
  SplitAssignment out;
  out.ratios = ratios;
  out.seed = seed;
  for (const auto& g : groups) {
    std::size_t best = 0;
    double best_deficit = -1e300;
    for (std::size_t s = 0; s < 3; ++s) {
      if (r[s] <= 0) continue;
      const double deficit = r[s] * n - filled[s];
      if (deficit > best_deficit) {
        best_deficit = deficit;
        best = s;
      }
    }
    filled[best] += static_cast<double>(g.size());
    for (const auto& text : g) out.assignment[text] = static_cast<Split>(best);
  }
  return out;
}

const WordSet& default_stopwords() {
  static const WordSet kWords = {
      "a",    "an",   "the",   "to",   "of",    "in",   "on",   "at",   "for",  "with",
      "from", "by",   "up",    "out",  "about", "into", "over", "as",   "and",  "or",
      "is",   "are",  "was",   "were", "be",    "been", "has",  "have", "had",  "do",
      "does", "did",  "his",   "her",  "their", "its",  "it",   "him",  "them", "they",
  };
  return kWords;
}

WordSet load_word_list(const std::filesystem::path& path, bool lowercase) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open word list " + path.string());
  WordSet out;
  std::string line;
  while (std::getline(in, line)) {
    std::string w = collapse_whitespace(line);
    if (w.empty() || w.front() == '#') continue;
    out.insert(lowercase ? to_lower(w) : w);
  }
  return out;
}

FrequencyTable load_frequency_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open frequency table " + path.string());
  FrequencyTable table;
  bool have_source = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
      auto pos = line.find('\t', start);
      cols.push_back(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    if (cols.size() != 4) {
      throw ParseError(ParseError::Kind::ColumnCount, line_no, "expected verb, args, count, source");
    }
    CorpusSource src;
    if (cols[3] == "stories") src = CorpusSource::Stories;
    else if (cols[3] == "blogs") src = CorpusSource::Blogs;
    else if (cols[3] == "ngrams") src = CorpusSource::Ngrams;
    else throw ParseError(ParseError::Kind::BadValue, line_no, "unknown source '" + cols[3] + "'");
    if (have_source && src != table.source) {
      throw ParseError(ParseError::Kind::BadValue, line_no, "mixed sources in one table");
    }
    table.source = src;
    have_source = true;
    std::uint64_t count = 0;
    try {
      std::size_t used = 0;
      count = std::stoull(cols[2], &used);
      if (used != cols[2].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParseError(ParseError::Kind::BadValue, line_no, "bad count '" + cols[2] + "'");
    }
    if (count < 1) throw ParseError(ParseError::Kind::BadValue, line_no, "count must be >= 1");
    table.add(cols[0], cols[1], count);
  }
  return table;
}

}  // namespace atlas
