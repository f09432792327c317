#include "atlas/conceptnet_overlap.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <unordered_set>

#include "atlas/error.hpp"
#include "atlas/text.hpp"

namespace atlas {

namespace {

std::string edge_key(std::string_view relation, std::string_view start, std::string_view end) {
  std::string k(relation);
  k += '\x1f';
  k += start;
  k += '\x1f';
  k += end;
  return k;
}

std::string clean_concept(std::string_view text) {
  std::string s(text);
  std::replace(s.begin(), s.end(), '_', ' ');
  return node_key(s);
}

bool is_person_token(std::string_view lowered) {
  return lowered.size() >= 7 && lowered.substr(0, 6) == "person" &&
         (lowered[6] == 'x' || lowered[6] == 'y' || lowered[6] == 'z') &&
         (lowered.size() == 7 || lowered[7] == '\'' || lowered[7] == '.' || lowered[7] == ',');
}

struct EdgeIndex {
  std::unordered_set<std::string> keys;
};

EdgeIndex index_edges(const std::vector<ExternalEdge>& edges, const ConceptNormalizer& normalizer) {
  EdgeIndex idx;
  for (const auto& e : edges) {
    const std::string s = normalizer(e.start);
    const std::string t = normalizer(e.end);
    if (s.empty() || t.empty()) continue;
    idx.keys.insert(edge_key(e.relation, s, t));
  }
  return idx;
}

bool triple_matches(const GraphTriple& t, const EdgeIndex& idx, const ConceptNormalizer& normalizer) {
  const std::string s = normalizer(t.event);
  const std::string e = normalizer(t.target);
  if (s.empty() || e.empty()) return false;
  const auto& relations = dimension_relation_map()[static_cast<std::size_t>(group_of(t.dimension))].relations;
  return std::any_of(relations.begin(), relations.end(),
                     [&](const std::string& r) { return idx.keys.count(edge_key(r, s, e)) > 0; });
}

std::map<RelationGroup, OverlapCount> empty_counts() {
  std::map<RelationGroup, OverlapCount> out;
  for (RelationGroup g : kAllGroups) out[g] = {};
  return out;
}

}  // namespace

std::string_view group_name(RelationGroup g) noexcept {
  switch (g) {
    case RelationGroup::Wants: return "Wants";
    case RelationGroup::Effects: return "Effects";
    case RelationGroup::Needs: return "Needs";
    case RelationGroup::Intents: return "Intents";
    case RelationGroup::Reactions: return "Reactions";
    case RelationGroup::Attributes: return "Attributes";
  }
  return "";
}

const std::vector<GroupMapping>& dimension_relation_map() {
  using D = Dimension;
  static const std::vector<GroupMapping> map = {
      {RelationGroup::Wants, {D::xWant, D::oWant}, {"MotivatedByGoal", "HasSubevent", "HasFirstSubevent", "CausesDesire"}},
      {RelationGroup::Effects, {D::xEffect, D::oEffect}, {"Causes", "HasSubevent", "HasFirstSubevent", "HasLastSubevent"}},
      {RelationGroup::Needs, {D::xNeed}, {"MotivatedByGoal", "Entails", "HasPrerequisite"}},
      {RelationGroup::Intents, {D::xIntent}, {"MotivatedByGoal", "CausesDesire", "HasSubevent", "HasFirstSubevent"}},
      {RelationGroup::Reactions, {D::xReact, D::oReact}, {"Causes", "HasLastSubevent", "HasSubevent"}},
      {RelationGroup::Attributes, {D::xAttr}, {"HasProperty"}},
  };
  return map;
}

RelationGroup group_of(Dimension d) noexcept {
  switch (d) {
    case Dimension::xWant:
    case Dimension::oWant: return RelationGroup::Wants;
    case Dimension::xEffect:
    case Dimension::oEffect: return RelationGroup::Effects;
    case Dimension::xNeed: return RelationGroup::Needs;
    case Dimension::xIntent: return RelationGroup::Intents;
    case Dimension::xReact:
    case Dimension::oReact: return RelationGroup::Reactions;
    case Dimension::xAttr: return RelationGroup::Attributes;
  }
  return RelationGroup::Attributes;
}

std::vector<ExternalEdge> parse_external_edges(std::istream& in) {
  std::vector<ExternalEdge> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto a = line.find('\t');
    const auto b = a == std::string::npos ? a : line.find('\t', a + 1);
    if (b == std::string::npos || line.find('\t', b + 1) != std::string::npos) {
      throw ParseError(ParseError::Kind::ColumnCount, line_no, "expected relation<TAB>start<TAB>end");
    }
    ExternalEdge e{collapse_whitespace(line.substr(0, a)), clean_concept(line.substr(a + 1, b - a - 1)),
                   clean_concept(line.substr(b + 1))};
    if (e.relation.empty() || e.start.empty() || e.end.empty()) {
      throw ParseError(ParseError::Kind::BadValue, line_no, "empty edge field");
    }
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ExternalEdge> load_external_edges(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return parse_external_edges(in);
  } catch (const ParseError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string normalize_concept(std::string_view text) {
  std::string s(text);
  std::replace(s.begin(), s.end(), '_', ' ');
  std::vector<std::string> kept;
  for (auto& tok : lower_tokens(s)) {
    if (!is_person_token(tok)) kept.push_back(std::move(tok));
  }
  std::string out = join(kept);
  while (true) {
    if (out.starts_with("to ")) out.erase(0, 3);
    else if (out.starts_with("the ")) out.erase(0, 4);
    else break;
  }
  return out;
}

std::map<RelationGroup, OverlapCount> triple_overlap(const AtlasGraph& atlas, const std::vector<ExternalEdge>& edges,
                                                     const ConceptNormalizer& normalizer) {
  const EdgeIndex idx = index_edges(edges, normalizer);
  auto out = empty_counts();
  for (const auto& t : atlas.triples()) {
    if (t.empty) continue;
    auto& c = out[group_of(t.dimension)];
    ++c.total;
    if (triple_matches(t, idx, normalizer)) ++c.overlapping;
  }
  return out;
}

std::map<RelationGroup, OverlapCount> triple_overlap_parallel(const AtlasGraph& atlas,
                                                              const std::vector<ExternalEdge>& edges,
                                                              const ConceptNormalizer& normalizer, int threads) {
  const EdgeIndex idx = index_edges(edges, normalizer);
  const auto& triples = atlas.triples();
  std::vector<char> hit(triples.size(), 0);
#pragma omp parallel for num_threads(threads) schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(triples.size()); ++i) {
    const auto& t = triples[static_cast<std::size_t>(i)];
    if (!t.empty) hit[static_cast<std::size_t>(i)] = triple_matches(t, idx, normalizer) ? 1 : 0;
  }
  (void)threads;
  auto out = empty_counts();
  for (std::size_t i = 0; i < triples.size(); ++i) {
    if (triples[i].empty) continue;
    auto& c = out[group_of(triples[i].dimension)];
    ++c.total;
    if (hit[i]) ++c.overlapping;
  }
  return out;
}

OverlapCount event_coverage(const AtlasGraph& atlas, const std::vector<ExternalEdge>& edges,
                            const ConceptNormalizer& normalizer) {
  std::unordered_set<std::string> concepts;
  for (const auto& e : edges) {
    for (const std::string* c : {&e.start, &e.end}) {
      std::string n = normalizer(*c);
      if (!n.empty()) concepts.insert(std::move(n));
    }
  }
  OverlapCount out;
  for (const auto& ev : atlas.events()) {
    ++out.total;
    const std::string n = normalizer(ev);
    if (!n.empty() && concepts.count(n)) ++out.overlapping;
  }
  return out;
}

nlohmann::ordered_json overlap_json(const std::map<RelationGroup, OverlapCount>& groups, const OverlapCount& coverage) {
  nlohmann::ordered_json j;
  auto g = nlohmann::ordered_json::object();
  for (RelationGroup group : kAllGroups) {
    auto it = groups.find(group);
    const OverlapCount c = it == groups.end() ? OverlapCount{} : it->second;
    g[std::string(group_name(group))] = {
        {"percent", c.percent()}, {"overlapping", c.overlapping}, {"total", c.total}};
  }
  j["triple_overlap"] = std::move(g);
  j["event_coverage"] = {
      {"percent", coverage.percent()}, {"found", coverage.overlapping}, {"total", coverage.total}};
  return j;
}

}  // namespace atlas
