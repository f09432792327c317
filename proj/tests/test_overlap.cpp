#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "atlas/conceptnet_overlap.hpp"
#include "atlas/error.hpp"
#include "support.hpp"

using namespace atlas;

namespace {

Triple tr(const std::string& event, Dimension d, const std::string& target) {
  return {EventPhrase::from_text(event), d, InferenceTarget::from_text(target), "w1", Split::Train};
}

const std::vector<std::string>& relations() {
  static const std::vector<std::string> r = {"MotivatedByGoal", "HasSubevent", "HasFirstSubevent", "HasLastSubevent",
                                             "CausesDesire",    "Causes",      "Entails",          "HasPrerequisite",
                                             "HasProperty",     "IsA",         "RelatedTo"};
  return r;
}

// Double loop over triples and edges.
std::map<RelationGroup, OverlapCount> naive_overlap(const AtlasGraph& g, const std::vector<ExternalEdge>& edges,
                                                    const ConceptNormalizer& norm) {
  std::map<RelationGroup, OverlapCount> out;
  for (RelationGroup grp : kAllGroups) out[grp] = {};
  std::vector<std::pair<std::string, std::string>> ends;
  for (const auto& edge : edges) ends.emplace_back(norm(edge.start), norm(edge.end));
  for (const auto& t : g.triples()) {
    if (t.empty) continue;
    const RelationGroup grp = group_of(t.dimension);
    ++out[grp].total;
    const auto& rels = dimension_relation_map()[static_cast<std::size_t>(grp)].relations;
    const std::string s = norm(t.event);
    const std::string e = norm(t.target);
    if (s.empty() || e.empty()) continue;
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (std::find(rels.begin(), rels.end(), edges[i].relation) == rels.end()) continue;
      if (ends[i].first == s && ends[i].second == e) {
        ++out[grp].overlapping;
        break;
      }
    }
  }
  return out;
}

// Edges that partly copy atlas triples, with noise in relation and case.
std::vector<ExternalEdge> random_edges(Rng& rng, const AtlasGraph& g, std::size_t n) {
  std::vector<ExternalEdge> out;
  const auto& ts = g.triples();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = ts[static_cast<std::size_t>(rng.below(ts.size()))];
    const std::string rel = test::pick(rng, relations());
    std::string start = rng.below(2) == 0 ? t.event : test::random_event(rng);
    std::string end = rng.below(3) == 0 ? test::random_phrase(rng) : t.target;
    if (rng.below(4) == 0) start = "to " + start;
    out.push_back({rel, start, end});
  }
  return out;
}

std::string identity(std::string_view s) { return std::string(s); }

}  // namespace

TEST_SUITE("relation map") {
  TEST_CASE("groups and memberships") {
    const auto& m = dimension_relation_map();
    REQUIRE(m.size() == 6);
    CHECK(m[static_cast<std::size_t>(RelationGroup::Attributes)].relations == std::vector<std::string>{"HasProperty"});
    CHECK(m[static_cast<std::size_t>(RelationGroup::Needs)].relations ==
          std::vector<std::string>{"MotivatedByGoal", "Entails", "HasPrerequisite"});
    CHECK(group_of(Dimension::xWant) == RelationGroup::Wants);
    CHECK(group_of(Dimension::oWant) == RelationGroup::Wants);
    std::multiset<Dimension> seen;
    for (const auto& g : m) {
      for (Dimension d : g.dimensions) {
        seen.insert(d);
        CHECK(group_of(d) == g.group);
      }
    }
    CHECK(seen.size() == 9);
    for (Dimension d : kAllDimensions) CHECK(seen.count(d) == 1);
  }
}

TEST_SUITE("normalize") {
  TEST_CASE("concept normalization") {
    CHECK(normalize_concept("PersonX eats PersonY's cake") == "eats cake");
    CHECK(normalize_concept("to_eat_food") == "eat food");
    CHECK(normalize_concept("To  The   Store") == "store");
    CHECK(normalize_concept("the the dog") == "dog");
    CHECK(normalize_concept("tomato") == "tomato");
    CHECK(normalize_concept("PersonX") == "");
  }

  TEST_CASE("edge files") {
    std::istringstream in("# comment\n\nHasProperty\tPersonX_is_kind\tNice_Person\nCauses\tthe rain\n");
    CHECK_THROWS_AS(parse_external_edges(in), DataError);
    std::istringstream ok("# comment\n\nHasProperty\tPersonX_is_kind\tNice_Person\n");
    const auto edges = parse_external_edges(ok);
    REQUIRE(edges.size() == 1);
    CHECK(edges[0].end == "nice person");
  }
}

TEST_SUITE("overlap") {
  TEST_CASE("two of four wants triples match") {
    const auto g = build_graph({tr("PersonX eats cake", Dimension::xWant, "to sleep"),
                                tr("PersonX eats cake", Dimension::oWant, "to share"),
                                tr("PersonX bakes bread", Dimension::xWant, "to sell it"),
                                tr("PersonX bakes bread", Dimension::oWant, "none"),
                                tr("PersonX drives home", Dimension::oWant, "to rest"),
                                tr("PersonX drives home", Dimension::xAttr, "careful")});
    const std::vector<ExternalEdge> edges = {{"CausesDesire", "eats cake", "sleep"},
                                             {"MotivatedByGoal", "drive home", "rest"},
                                             {"HasSubevent", "bakes bread", "sell it"},
                                             {"HasProperty", "eats cake", "share"}};
    const auto r = triple_overlap(g, edges);
    CHECK(r.at(RelationGroup::Wants).total == 4);
    CHECK(r.at(RelationGroup::Wants).percent() == 50.0);
    CHECK(r.at(RelationGroup::Attributes).percent() == 0.0);
    CHECK(r.at(RelationGroup::Attributes).total == 1);
  }

  TEST_CASE("no edges gives zero everywhere") {
    Rng rng(1);
    const auto g = build_graph(test::random_triples(rng, 30, 9));
    for (const auto& [grp, c] : triple_overlap(g, {})) CHECK(c.percent() == 0.0);
    CHECK(event_coverage(g, {}).percent() == 0.0);
  }

  TEST_CASE("equals the naive double loop on random fixtures") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      Rng rng(seed);
      const auto g = build_graph(test::random_triples(rng, 100 * seed, 10));
      const auto edges = random_edges(rng, g, 60 * seed);
      CAPTURE(seed);
      const auto fast = triple_overlap(g, edges);
      CHECK(fast == naive_overlap(g, edges, normalize_concept));
      CHECK(triple_overlap(g, edges, identity) == naive_overlap(g, edges, identity));
      CHECK(triple_overlap_parallel(g, edges, normalize_concept, 3) == fast);
      std::size_t matched = 0;
      for (const auto& [grp, c] : fast) matched += c.overlapping;
      CHECK(matched > 0);
    }
  }

  TEST_CASE("adding edges never lowers a percentage") {
    Rng rng(4);
    const auto g = build_graph(test::random_triples(rng, 200, 10));
    const auto edges = random_edges(rng, g, 400);
    std::vector<ExternalEdge> prefix;
    auto prev = triple_overlap(g, prefix);
    auto prev_cov = event_coverage(g, prefix);
    for (std::size_t i = 0; i < edges.size(); i += 40) {
      prefix.insert(prefix.end(), edges.begin() + static_cast<std::ptrdiff_t>(i),
                    edges.begin() + static_cast<std::ptrdiff_t>(std::min(edges.size(), i + 40)));
      const auto cur = triple_overlap(g, prefix);
      for (RelationGroup grp : kAllGroups) CHECK(cur.at(grp).percent() >= prev.at(grp).percent());
      const auto cov = event_coverage(g, prefix);
      CHECK(cov.percent() >= prev_cov.percent());
      prev = cur;
      prev_cov = cov;
    }
  }
}

TEST_SUITE("coverage") {
  TEST_CASE("three of twelve events appear as concepts") {
    std::vector<Triple> raw;
    for (std::size_t i = 0; i < 12; ++i) raw.push_back(tr("PersonX " + test::verbs()[i] + " the " + test::nouns()[i], Dimension::xNeed, "time"));
    const auto g = build_graph(raw);
    const std::vector<ExternalEdge> edges = {{"IsA", "pays the car", "payment"},
                                             {"RelatedTo", "music", "eats the dog"},
                                             {"HasSubevent", "to visits_the_house", "walk"},
                                             {"HasSubevent", "finds phone", "walk"},
                                             {"Causes", "calls", "phone"}};
    const auto c = event_coverage(g, edges);
    CHECK(c.total == 12);
    CHECK(c.overlapping == 3);
    CHECK(c.percent() == 25.0);
  }

  TEST_CASE("every event present gives one hundred") {
    const auto g = build_graph({tr("PersonX eats", Dimension::xNeed, "food"), tr("PersonX runs", Dimension::xNeed, "shoes")});
    CHECK(event_coverage(g, {{"IsA", "eats", "runs"}}).percent() == 100.0);
  }
}
