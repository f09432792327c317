#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "atlas/dimension.hpp"
#include "atlas/graph.hpp"
#include "atlas/rng.hpp"
#include "atlas/text.hpp"

namespace atlas::test {

inline const std::vector<std::string>& verbs() {
  static const std::vector<std::string> v = {"pays", "eats", "visits", "calls", "helps", "finds", "buys", "sells",
                                             "paints", "fixes", "drives", "reads", "writes", "cooks", "cleans",
                                             "loses", "wins", "takes", "gives", "meets"};
  return v;
}

inline const std::vector<std::string>& nouns() {
  static const std::vector<std::string> v = {"car", "dog", "house", "book", "cake", "phone", "bike", "letter",
                                             "garden", "song", "game", "coat", "lamp", "door", "boat", "map",
                                             "ticket", "ring", "hat", "piano", "table", "clock", "shirt", "key"};
  return v;
}

inline const std::vector<std::string>& words() {
  static const std::vector<std::string> v = {"happy", "sad", "tired", "rich", "proud", "calm", "angry", "kind",
                                             "to", "be", "a", "the", "go", "home", "get", "help", "money",
                                             "rest", "thank", "smile", "cry", "work", "sleep", "eat"};
  return v;
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(rng.below(v.size()))];
}

inline std::string random_phrase(Rng& rng, std::size_t max_len = 4) {
  const std::size_t n = 1 + static_cast<std::size_t>(rng.below(max_len));
  std::vector<std::string> toks;
  for (std::size_t i = 0; i < n; ++i) toks.push_back(pick(rng, words()));
  return join(toks);
}

inline std::string random_event(Rng& rng) {
  std::string e = "PersonX " + pick(rng, verbs());
  switch (rng.below(4)) {
    case 0: e += " PersonY's " + pick(rng, nouns()); break;
    case 1: e += " ___"; break;
    case 2: e += " the " + pick(rng, nouns()); break;
    default: e += " a " + pick(rng, nouns()) + " for PersonY"; break;
  }
  return e;
}

// Random annotations with duplicates, case variants, empty sentinels and
// repeated workers, spread over the three splits by event.
inline std::vector<Triple> random_triples(Rng& rng, std::size_t n_events, std::size_t per_event) {
  std::vector<Triple> out;
  for (std::size_t i = 0; i < n_events; ++i) {
    std::string ev = random_event(rng);
    const Split split = static_cast<Split>(rng.below(3));
    for (std::size_t j = 0; j < per_event; ++j) {
      const Dimension d = kAllDimensions[static_cast<std::size_t>(rng.below(kNumDimensions))];
      std::string target = rng.below(6) == 0 ? "none" : random_phrase(rng);
      if (rng.below(5) == 0) target = to_lower(target) == target ? "  " + target + " " : target;
      std::string text = rng.below(7) == 0 ? to_lower(ev) : ev;
      out.push_back({EventPhrase::from_text(text), d, InferenceTarget::from_text(target),
                     "w" + std::to_string(rng.below(5)), split});
    }
  }
  return out;
}

// Naive statistics computed straight from the raw triples.
struct NaiveStats {
  std::size_t triples = 0;
  std::map<ContentType, std::size_t> triples_by_type;
  std::size_t empty = 0;
  std::size_t nodes = 0;
  std::map<ContentType, std::size_t> nodes_by_type;
  std::size_t base_events = 0;
  std::size_t multiple = 0;
  std::size_t node_words = 0;
  std::size_t event_words = 0;
};

inline std::string naive_key(const std::string& s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += static_cast<char>(c >= 'A' && c <= 'Z' ? c - 'A' + 'a' : c);
  }
  return out;
}

inline std::size_t count_words(const std::string& s) {
  std::size_t n = 0;
  bool in = false;
  for (char c : s) {
    const bool ws = c == ' ' || c == '\t';
    if (!ws && !in) ++n;
    in = !ws;
  }
  return n;
}

inline NaiveStats naive_stats(const std::vector<Triple>& raw) {
  NaiveStats s;
  // Distinct edges by linear scan over a list.
  std::vector<std::tuple<std::string, Dimension, std::string, bool>> edges;
  for (const auto& t : raw) {
    auto e = std::make_tuple(naive_key(t.event.text()), t.dimension, naive_key(t.target.text()), t.target.is_empty());
    if (std::find(edges.begin(), edges.end(), e) == edges.end()) edges.push_back(e);
  }
  std::set<std::string> events;
  std::set<std::string> nodes;
  std::map<ContentType, std::set<std::string>> typed;
  std::map<std::string, std::size_t> occ;
  for (const auto& [ev, d, tg, empty] : edges) {
    events.insert(ev);
    nodes.insert(ev);
    if (empty) {
      ++s.empty;
      continue;
    }
    ++s.triples;
    const ContentType ct = classify_dimension(d).content_type;
    ++s.triples_by_type[ct];
    typed[ct].insert(tg);
    nodes.insert(tg);
    ++occ[ev];
    ++occ[tg];
  }
  s.nodes = nodes.size();
  for (const auto& [ct, set] : typed) s.nodes_by_type[ct] = set.size();
  s.base_events = events.size();
  for (const auto& [k, n] : occ) s.multiple += n > 1 ? 1 : 0;
  for (const auto& n : nodes) s.node_words += count_words(n);
  for (const auto& e : events) s.event_words += count_words(e);
  return s;
}

// Scalar BLEU-2 written from the definition with plain vectors.
inline double oracle_bleu2(const std::vector<std::string>& cand, const std::vector<std::vector<std::string>>& refs,
                           double eps = 0.1) {
  if (cand.empty()) return 0.0;
  double logp = 0.0;
  for (std::size_t n = 1; n <= 2; ++n) {
    std::vector<std::vector<std::string>> grams;
    for (std::size_t i = 0; i + n <= cand.size(); ++i) grams.emplace_back(cand.begin() + i, cand.begin() + i + n);
    std::vector<std::vector<std::string>> seen;
    double clipped = 0;
    for (const auto& g : grams) {
      if (std::find(seen.begin(), seen.end(), g) != seen.end()) continue;
      seen.push_back(g);
      const auto c = std::count(grams.begin(), grams.end(), g);
      long best = 0;
      for (const auto& r : refs) {
        long rc = 0;
        for (std::size_t i = 0; i + n <= r.size(); ++i) {
          if (std::equal(g.begin(), g.end(), r.begin() + i)) ++rc;
        }
        best = std::max(best, rc);
      }
      clipped += static_cast<double>(std::min<long>(c, best));
    }
    const double denom = std::max<double>(1.0, static_cast<double>(grams.size()));
    const double p = clipped > 0 ? clipped / denom : eps / denom;
    logp += std::log(p) / 2.0;
  }
  const double c = static_cast<double>(cand.size());
  double r = static_cast<double>(refs[0].size());
  for (const auto& ref : refs) {
    const double len = static_cast<double>(ref.size());
    if (std::abs(len - c) < std::abs(r - c) || (std::abs(len - c) == std::abs(r - c) && len < r)) r = len;
  }
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(logp);
}

// Fifty "PersonX <verb> the <noun>" events with one templated annotation per
// dimension; each target reuses the event's verb and noun.
inline std::vector<Triple> overfit_triples(std::size_t n_events = 50) {
  static const std::map<Dimension, std::string> templates = {
      {Dimension::xIntent, "to V the N for a good reason"},
      {Dimension::xNeed, "to find the N before they V it"},
      {Dimension::xAttr, "someone who likes to V every N"},
      {Dimension::xEffect, "gets tired after they V the N"},
      {Dimension::xReact, "feels proud to V the N so well"},
      {Dimension::xWant, "to V another N again very soon"},
      {Dimension::oEffect, "others watch them V the N now"},
      {Dimension::oReact, "others feel happy about the N"},
      {Dimension::oWant, "others want to V the N too"},
  };
  std::vector<Triple> out;
  for (std::size_t i = 0; i < n_events; ++i) {
    const std::string& verb = verbs()[i % verbs().size()];
    const std::string& noun = nouns()[i % nouns().size()];
    const auto event = EventPhrase::from_text("PersonX " + verb + " the " + noun);
    for (const auto& [d, tmpl] : templates) {
      std::vector<std::string> toks;
      for (const auto& t : split_whitespace(tmpl)) toks.push_back(t == "V" ? verb : t == "N" ? noun : t);
      out.push_back({event, d, InferenceTarget::from_text(join(toks)), "w1", Split::Train});
    }
  }
  return out;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("atlas_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace atlas::test
