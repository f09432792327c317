#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "atlas/error.hpp"
#include "atlas/eval.hpp"
#include "atlas/text.hpp"
#include "support.hpp"

using namespace atlas;

namespace {

using Tokens = std::vector<std::string>;

Tokens toks(const std::string& s) { return split_whitespace(s); }

Triple tr(const std::string& event, Dimension d, const std::string& target, const std::string& worker = "w1") {
  return {EventPhrase::from_text(event), d, InferenceTarget::from_text(target), worker, Split::Dev};
}

// Five events, nine dimensions, ten generations each.
std::vector<GenerationList> sheet_fixture() {
  std::vector<GenerationList> out;
  for (int e = 0; e < 5; ++e) {
    for (Dimension d : kAllDimensions) {
      GenerationList g{"PersonX " + test::verbs()[static_cast<std::size_t>(e)] + " it", d, 10, {}};
      for (int r = 0; r < 10; ++r) g.entries.push_back({"guess " + std::to_string(r), -r * 0.5});
      out.push_back(g);
    }
  }
  return out;
}

}  // namespace

TEST_SUITE("bleu") {
  TEST_CASE("identical candidate scores one") {
    CHECK(bleu2(toks("to be nice"), {toks("to be nice")}) == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("closed-form brevity example") {
    CHECK(std::abs(bleu2(toks("a b"), {toks("a b c d")}) - std::exp(-1.0)) < 1e-4);
    CHECK(bleu2(toks("a b"), {toks("a b c d")}) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  }

  TEST_CASE("unigram overlap without bigram overlap") {
    // p1 = 3/3, p2 = 0.1/2, closest reference length 3 so BP = 1.
    const double expected = std::sqrt(0.1 / 2.0);
    CHECK(bleu2(toks("cake eat to"), {toks("to eat cake")}) == doctest::Approx(expected).epsilon(1e-14));
  }

  TEST_CASE("agrees with the scalar oracle on random cases") {
    Rng rng(99);
    for (int i = 0; i < 200; ++i) {
      auto phrase = [&] {
        Tokens t;
        const auto n = 1 + rng.below(7);
        for (std::uint64_t j = 0; j < n; ++j) t.push_back(test::words()[static_cast<std::size_t>(rng.below(8))]);
        return t;
      };
      const Tokens cand = phrase();
      std::vector<Tokens> refs;
      const auto nr = 1 + rng.below(4);
      for (std::uint64_t j = 0; j < nr; ++j) refs.push_back(phrase());
      CAPTURE(i);
      CHECK(std::abs(bleu2(cand, refs) - test::oracle_bleu2(cand, refs)) < 1e-9);
    }
  }

  TEST_CASE("edge cases") {
    CHECK(bleu2({}, {toks("a")}) == 0.0);
    // A one-token candidate has no bigrams, so its bigram precision is smoothed.
    CHECK(bleu2(toks("food"), {toks("food")}) == doctest::Approx(std::sqrt(0.1)));
    CHECK_THROWS_AS(bleu2(toks("a"), {}), DataError);
    // Brevity ties go to the shorter reference.
    CHECK(bleu2(toks("a b c"), {toks("a b"), toks("a b c d")}) == doctest::Approx(test::oracle_bleu2(toks("a b c"), {toks("a b"), toks("a b c d")})));
    CHECK(bleu2(toks("x y"), {toks("a b")}) > 0.0);
    BleuOptions no_unigram;
    no_unigram.smooth_unigrams = false;
    CHECK(bleu2(toks("x y"), {toks("a b")}, no_unigram) == 0.0);
  }

  TEST_CASE("reference order does not matter and more references never hurt") {
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
      const Tokens cand = toks(test::random_phrase(rng, 5));
      const Tokens r1 = toks(test::random_phrase(rng, 5));
      const Tokens r2 = toks(test::random_phrase(rng, 5));
      const double one = bleu2(cand, {r1});
      const double both = bleu2(cand, {r1, r2});
      CHECK(both == bleu2(cand, {r2, r1}));
      if (r2.size() == r1.size()) CHECK(both >= one);
    }
  }
}

TEST_SUITE("evaluable") {
  TEST_CASE("one third or more empty is omitted") {
    CHECK_FALSE(is_instance_evaluable(1, 3));
    CHECK(is_instance_evaluable(0, 3));
    CHECK(is_instance_evaluable(1, 4));
    CHECK_FALSE(is_instance_evaluable(2, 6));
    CHECK(is_instance_evaluable(333, 1000));
    const std::vector<InferenceTarget> anns = {InferenceTarget::from_text("to eat"), InferenceTarget::from_text("none"),
                                               InferenceTarget::from_text("to rest")};
    CHECK_FALSE(is_instance_evaluable(anns));
  }
}

TEST_SUITE("avg top-k bleu") {
  TEST_CASE("self-match scores one hundred") {
    const auto g = build_graph({tr("PersonX eats", Dimension::xNeed, "some food"), tr("PersonX eats", Dimension::xNeed, "a fork"),
                                tr("PersonX runs", Dimension::xWant, "to rest")});
    const std::vector<GenerationList> gens = {{"PersonX eats", Dimension::xNeed, 2, {{"some food", -1}, {"a fork", -2}}},
                                              {"PersonX runs", Dimension::xWant, 1, {{"to rest", -1}}}};
    const auto r = avg_topk_bleu(gens, g, 2);
    CHECK(r.dimensions.at(Dimension::xNeed).percent() == doctest::Approx(100.0));
    CHECK(r.dimensions.at(Dimension::xWant).percent() == doctest::Approx(100.0));
  }

  TEST_CASE("disjoint predictions hit the smoothing floor") {
    const auto g = build_graph({tr("PersonX eats", Dimension::xNeed, "food now"), tr("PersonX runs", Dimension::xNeed, "shoes on")});
    const std::vector<GenerationList> gens = {{"PersonX eats", Dimension::xNeed, 1, {{"blue sky", -1}}},
                                              {"PersonX runs", Dimension::xNeed, 1, {{"red sea", -1}}}};
    const auto r = avg_topk_bleu(gens, g, 10);
    const double floor = 100.0 * test::oracle_bleu2(toks("blue sky"), {toks("food now")});
    CHECK(floor > 0.0);
    CHECK(r.dimensions.at(Dimension::xNeed).percent() == doctest::Approx(floor));
    CHECK(r.dimensions.at(Dimension::xNeed).evaluated == 2);
  }

  TEST_CASE("omission counts annotations including repeats") {
    // Weighted by worker: 1 empty of 4 keeps "eats", 1 of 2 drops "runs".
    const auto g = build_graph({tr("PersonX eats", Dimension::xNeed, "food", "w1"), tr("PersonX eats", Dimension::xNeed, "food", "w2"),
                                tr("PersonX eats", Dimension::xNeed, "food", "w4"), tr("PersonX eats", Dimension::xNeed, "none", "w3"), tr("PersonX runs", Dimension::xNeed, "shoes"),
                                tr("PersonX runs", Dimension::xNeed, "none", "w2")});
    const std::vector<GenerationList> gens = {{"PersonX eats", Dimension::xNeed, 1, {{"food", -1}}},
                                              {"PersonX runs", Dimension::xNeed, 1, {{"shoes", -1}}},
                                              {"PersonX sleeps", Dimension::xNeed, 1, {{"bed", -1}}}};
    const auto r = avg_topk_bleu(gens, g, 10, {}, "dev");
    CHECK(r.dimensions.at(Dimension::xNeed).evaluated == 1);
    CHECK(r.dimensions.at(Dimension::xNeed).omitted == 1);
    CHECK(r.skipped_no_gold == 1);
    const auto j = r.to_json();
    CHECK(j["meta"]["split"] == "dev");
    CHECK(j["xNeed"]["total"] == 2);
  }

  TEST_CASE("matches a per-instance recomputation on random fixtures") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Rng rng(seed);
      const auto g = build_graph(test::random_triples(rng, 80, 10));
      std::vector<GenerationList> gens;
      std::map<Dimension, std::pair<double, std::size_t>> expect;
      for (const auto& [event, dim] : g.keys()) {
        GenerationList gl{g.adjacent(event, dim).front().event, dim, 10, {}};
        const auto n = rng.below(12);
        for (std::uint64_t i = 0; i < n; ++i) gl.entries.push_back({test::random_phrase(rng), -static_cast<double>(i)});
        std::size_t empty = 0, total = 0;
        std::vector<Tokens> refs;
        for (const auto& t : g.adjacent(event, dim)) {
          total += t.annotation_count();
          if (t.empty) empty += t.annotation_count();
          else refs.push_back(toks(t.target));
        }
        if (3 * empty >= total) continue;
        double s = 0;
        const std::size_t m = std::min<std::size_t>(10, gl.entries.size());
        for (std::size_t i = 0; i < m; ++i) s += test::oracle_bleu2(toks(gl.entries[i].text), refs);
        expect[dim].first += m == 0 ? 0.0 : s / static_cast<double>(m);
        ++expect[dim].second;
        gens.push_back(std::move(gl));
      }
      const auto r = avg_topk_bleu(gens, g, 10);
      for (const auto& [d, e] : expect) {
        CHECK(r.dimensions.at(d).evaluated == e.second);
        CHECK(r.dimensions.at(d).percent() == doctest::Approx(100.0 * e.first / static_cast<double>(e.second)).epsilon(1e-12));
      }
      const auto par = avg_topk_bleu_parallel(gens, g, 10, {}, "", 3);
      CHECK(par.dimensions == r.dimensions);
    }
  }

  TEST_CASE("repeated instances are rejected") {
    const auto g = build_graph({tr("PersonX eats", Dimension::xNeed, "food")});
    const std::vector<GenerationList> gens = {{"PersonX eats", Dimension::xNeed, 1, {{"food", -1}}},
                                              {"personx  eats", Dimension::xNeed, 1, {{"food", -1}}}};
    CHECK_THROWS_AS(avg_topk_bleu(gens, g, 10), DataError);
    CHECK(instance_bleu({"PersonX eats", Dimension::xNeed, 1, {}}, g.adjacent("PersonX eats", Dimension::xNeed), 10) == 0.0);
  }
}

TEST_SUITE("human eval") {
  TEST_CASE("ninety rows per sampled event, deterministic sample") {
    const auto gens = sheet_fixture();
    const auto a = export_human_eval_sheet(gens, 2, 7);
    CHECK(a.size() == 180);
    CHECK(a == export_human_eval_sheet(gens, 2, 7));
    std::set<std::string> events;
    for (const auto& row : a) {
      events.insert(row.event);
      CHECK_FALSE(row.votes_valid.has_value());
    }
    CHECK(events.size() == 2);
    CHECK_THROWS_AS(export_human_eval_sheet(gens, 6, 7), DataError);
  }

  TEST_CASE("an untouched sheet reports no judgments") {
    const auto sheet = export_human_eval_sheet(sheet_fixture(), 1, 3);
    std::stringstream buf;
    write_judgment_sheet(sheet, buf);
    const auto back = read_judgment_sheet(buf);
    CHECK(back == sheet);
    const auto r = precision_at_10(back);
    CHECK_FALSE(r.has_judgments);
    CHECK(r.precision.empty());
    CHECK(r.to_json()["meta"]["state"] == "no judgments");
  }

  TEST_CASE("precision arithmetic") {
    auto sheet = export_human_eval_sheet(sheet_fixture(), 1, 3);
    for (auto& row : sheet) {
      row.judges_total = 3;
      row.votes_valid = 3;
    }
    auto all = precision_at_10(sheet);
    REQUIRE(all.has_judgments);
    for (const auto& [d, p] : all.precision) CHECK(p == 100.0);
    CHECK(all.precision.size() == 9);

    for (auto& row : sheet) {
      if (row.dimension == Dimension::xWant) row.votes_valid = row.rank <= 5 ? 2 : 1;
    }
    CHECK(precision_at_10(sheet, ValidityRule::Majority).precision.at(Dimension::xWant) == 50.0);
    CHECK(precision_at_10(sheet, ValidityRule::AnyJudge).precision.at(Dimension::xWant) == 100.0);

    sheet[4].votes_valid.reset();
    CHECK_THROWS_AS(precision_at_10(sheet), DataError);
    sheet[4].votes_valid = 5;
    CHECK_THROWS_AS(precision_at_10(sheet), DataError);
  }

  TEST_CASE("rule names") {
    CHECK(parse_validity_rule("any") == ValidityRule::AnyJudge);
    CHECK(parse_validity_rule("majority") == ValidityRule::Majority);
    CHECK_FALSE(parse_validity_rule("most").has_value());
  }
}
