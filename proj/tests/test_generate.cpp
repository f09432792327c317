#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "atlas/error.hpp"
#include "atlas/generate.hpp"
#include "atlas/network.hpp"
#include "support.hpp"

using namespace atlas;

namespace {

ModelParams toy_model(std::uint64_t seed, int vocab = 5) {
  ModelConfig c;
  c.variant = Variant::EventInvolEvent;
  c.embed_dim = 4;
  c.enc_hidden = 4;
  c.dec_hidden = 4;
  c.init_scale = 1.5;
  Rng rng(seed);
  auto p = ModelParams::random(c, static_cast<std::size_t>(vocab), rng);
  for (auto& [d, dec] : p.decoders()) {
    for (Eigen::Index i = 0; i < dec.out_b.size(); ++i) dec.out_b(i) = rng.uniform(-1.0, 1.0);
  }
  return p;
}

// Every sequence that stops at eos or at max_len, scored by teacher forcing.
std::vector<Hypothesis> enumerate(const ModelParams& p, std::span<const int> event, Dimension dim, int max_len) {
  std::vector<Hypothesis> out;
  struct Partial {
    Hypothesis h;
    Eigen::VectorXd state;
  };
  std::vector<Partial> frontier = {{{}, initial_decoder_state(p, dim, event)}};
  for (int step = 0; step < max_len; ++step) {
    std::vector<Partial> next;
    for (const auto& f : frontier) {
      const int prev = f.h.tokens.empty() ? Vocabulary::kBos : f.h.tokens.back();
      auto [logits, state] = decode_logits(p, dim, f.state, prev);
      const auto lp = log_softmax(logits);
      for (int v = 0; v < lp.size(); ++v) {
        Hypothesis h = f.h;
        h.tokens.push_back(v);
        h.log_score += lp(v);
        if (v == Vocabulary::kEos || step + 1 == max_len) out.push_back(h);
        else next.push_back({h, state});
      }
    }
    frontier = std::move(next);
  }
  std::sort(out.begin(), out.end(), [](const Hypothesis& a, const Hypothesis& b) {
    return a.log_score != b.log_score ? a.log_score > b.log_score : a.tokens < b.tokens;
  });
  return out;
}

AtlasGraph nn_graph() {
  auto t = [](const std::string& e, const std::string& target) {
    return Triple{EventPhrase::from_text(e), Dimension::xWant, InferenceTarget::from_text(target), "w", Split::Train};
  };
  return build_graph({t("PersonX eats cake", "more cake"), t("PersonX eats cake", "a nap"),
                      t("PersonX bakes bread", "to sell it"), t("PersonX drives home", "to rest"),
                      t("PersonX drives home", "none")});
}

EmbeddingTable nn_embeddings() {
  EmbeddingTable e(3);
  e.set("eats", Eigen::Vector3d(1, 0, 0));
  e.set("cake", Eigen::Vector3d(1, 1, 0));
  e.set("bakes", Eigen::Vector3d(0, 1, 0));
  e.set("bread", Eigen::Vector3d(0, 1, 1));
  e.set("drives", Eigen::Vector3d(0, 0, 1));
  e.set("home", Eigen::Vector3d(1, 0, 1));
  return e;
}

}  // namespace

TEST_SUITE("beam") {
  TEST_CASE("exhaustive width equals brute-force enumeration") {
    const std::vector<int> event = {4, 1};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto p = toy_model(seed);
      for (Dimension d : {Dimension::xIntent, Dimension::oReact}) {
        const auto all = enumerate(p, event, d, 3);
        REQUIRE(all.size() == 85);
        BeamOptions o;
        o.max_len = 3;
        o.beam_width = 85;
        const auto beam = beam_search(p, event, d, o);
        REQUIRE(beam.size() == all.size());
        for (std::size_t i = 0; i < all.size(); ++i) {
          CHECK(beam[i].tokens == all[i].tokens);
          CHECK(beam[i].log_score == doctest::Approx(all[i].log_score).epsilon(1e-12));
        }
      }
    }
  }

  TEST_CASE("narrow beams return the exact top-k when search is exhaustive per step") {
    const std::vector<int> event = {4};
    const auto p = toy_model(11);
    const auto all = enumerate(p, event, Dimension::xNeed, 3);
    BeamOptions o;
    o.max_len = 3;
    o.beam_width = 25;
    const auto beam = beam_search(p, event, Dimension::xNeed, o);
    REQUIRE(beam.size() == 25);
    for (std::size_t i = 0; i < beam.size(); ++i) CHECK(beam[i].tokens == all[i].tokens);
  }

  TEST_CASE("width one equals greedy decoding") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto p = toy_model(seed, 12);
      const std::vector<int> event = {4, 9, 10};
      BeamOptions o;
      o.beam_width = 1;
      o.max_len = 6;
      o.banned = {Vocabulary::kPad};
      const auto beam = beam_search(p, event, Dimension::oWant, o);
      REQUIRE(beam.size() == 1);
      const auto greedy = greedy_decode(p, event, Dimension::oWant, o);
      CHECK(beam[0].tokens == greedy.tokens);
      CHECK(beam[0].log_score == greedy.log_score);
    }
  }

  TEST_CASE("scores are non-increasing and banned tokens never appear") {
    const auto p = toy_model(3, 20);
    const std::vector<int> event = {4, 12};
    BeamOptions o;
    o.beam_width = 10;
    o.max_len = 5;
    o.banned = {Vocabulary::kPad, Vocabulary::kBos, 15};
    const auto beam = beam_search(p, event, Dimension::xEffect, o);
    REQUIRE(beam.size() == 10);
    for (std::size_t i = 1; i < beam.size(); ++i) CHECK(beam[i - 1].log_score >= beam[i].log_score);
    for (const auto& h : beam) {
      for (int t : h.tokens) CHECK(std::find(o.banned.begin(), o.banned.end(), t) == o.banned.end());
    }
  }

  TEST_CASE("invalid options are rejected") {
    const auto p = toy_model(1);
    const std::vector<int> event = {4};
    BeamOptions o;
    o.beam_width = 0;
    CHECK_THROWS_AS(beam_search(p, event, Dimension::xNeed, o), DataError);
    o.beam_width = 2;
    o.eos_id = 9;
    CHECK_THROWS_AS(beam_search(p, event, Dimension::xNeed, o), DataError);
  }
}

TEST_SUITE("generate") {
  TEST_CASE("texts are distinct and ranked") {
    const auto graph = build_graph(test::overfit_triples(4));
    const auto vocab = build_vocab(graph, 1);
    ModelConfig c;
    c.embed_dim = c.enc_hidden = c.dec_hidden = 8;
    c.max_decode_len = 4;
    Rng rng(2);
    const auto p = ModelParams::random(c, vocab.size(), rng);
    const auto g = generate(p, vocab, "PersonX eats the dog", Dimension::xReact, 10, true);
    CHECK(g.beam_width == 10);
    CHECK_FALSE(g.entries.empty());
    for (std::size_t i = 0; i < g.entries.size(); ++i) {
      if (i > 0) CHECK(g.entries[i - 1].score >= g.entries[i].score);
      CHECK(g.entries[i].text.find("<unk>") == std::string::npos);
      for (std::size_t j = 0; j < i; ++j) CHECK(g.entries[i].text != g.entries[j].text);
    }
  }

  TEST_CASE("parallel generation equals serial generation") {
    const auto graph = build_graph(test::overfit_triples(8));
    const auto vocab = build_vocab(graph, 1);
    ModelConfig c;
    c.embed_dim = c.enc_hidden = c.dec_hidden = 8;
    c.max_decode_len = 5;
    Rng rng(4);
    const auto p = ModelParams::random(c, vocab.size(), rng);
    std::vector<GenerationRequest> reqs;
    for (const auto& e : graph.events()) {
      for (Dimension d : kAllDimensions) reqs.push_back({e, d});
    }
    const auto serial = generate_all(p, vocab, reqs, 5);
    CHECK(generate_all_parallel(p, vocab, reqs, 5, false, 3) == serial);
    reqs.push_back({"   ", Dimension::xNeed});
    CHECK_THROWS_AS(generate_all_parallel(p, vocab, reqs, 5, false, 3), DataError);
  }

  TEST_CASE("generation files round-trip") {
    std::vector<GenerationList> lists = {
        {"PersonX eats cake", Dimension::xWant, 10, {{"more cake", -0.25}, {"a nap", -1.0 / 3.0}}},
        {"PersonX drives home", Dimension::oReact, 3, {}}};
    std::stringstream buf;
    write_generations(lists, buf);
    CHECK(read_generations(buf) == lists);
    std::stringstream bad(R"({"event":"PersonX eats","dimension":"xWish","beam_width":1,"generations":[]})");
    CHECK_THROWS_AS(read_generations(bad), DataError);
  }
}

TEST_SUITE("nearest neighbor") {
  TEST_CASE("cosine") {
    CHECK(cosine(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 3)) == 0.0);
    CHECK(cosine(Eigen::Vector2d(1, 1), Eigen::Vector2d(2, 2)) == doctest::Approx(1.0));
    CHECK(cosine(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 1)) == 0.0);
  }

  TEST_CASE("a training event returns its own targets first") {
    const auto g = nn_graph();
    const auto e = nn_embeddings();
    const auto r = nearest_neighbor_predict(g, e, "PersonX eats cake", Dimension::xWant, 10);
    REQUIRE(r.entries.size() == 4);
    CHECK(r.entries[0].score == doctest::Approx(1.0));
    CHECK(std::vector<std::string>{r.entries[0].text, r.entries[1].text} == std::vector<std::string>{"a nap", "more cake"});
  }

  TEST_CASE("ranking follows hand-computed cosines") {
    // Query mean is proportional to (1, 1, 2); training means to (0, 2, 1),
    // (1, 0, 2) and (2, 1, 0), giving cosines 4, 5 and 3 over sqrt(30).
    const auto g = nn_graph();
    const auto e = nn_embeddings();
    const auto r = nearest_neighbor_predict(g, e, "PersonX bread home", Dimension::xWant, 10);
    REQUIRE(r.entries.size() == 4);
    CHECK(r.entries[0].text == "to rest");
    CHECK(r.entries[1].text == "to sell it");
    CHECK(r.entries[2].text == "a nap");
    CHECK(r.entries[0].score == doctest::Approx(5.0 / std::sqrt(30.0)));
    CHECK(r.entries[1].score == doctest::Approx(4.0 / std::sqrt(30.0)));
    CHECK(r.entries[3].score == doctest::Approx(3.0 / std::sqrt(30.0)));
    CHECK(nearest_neighbor_predict(g, e, "PersonX eats cake", Dimension::xWant, 1).entries.size() == 1);
  }

  TEST_CASE("an orthogonal query falls back to the first event in order") {
    const auto g = nn_graph();
    const auto e = nn_embeddings();
    const auto r = nearest_neighbor_predict(g, e, "PersonX zzz", Dimension::xWant, 10);
    REQUIRE_FALSE(r.entries.empty());
    CHECK(r.entries[0].text == "to sell it");
    CHECK(nearest_neighbor_predict(g, e, "PersonX eats cake", Dimension::oWant, 10).entries.empty());
  }

  TEST_CASE("the index and the one-shot call agree") {
    const auto g = nn_graph();
    const auto e = nn_embeddings();
    const NearestNeighborIndex idx(g, e);
    for (const char* q : {"PersonX eats cake", "PersonX drives", "PersonX bread home"}) {
      CHECK(idx.predict(q, Dimension::xWant, 3) == nearest_neighbor_predict(g, e, q, Dimension::xWant, 3));
    }
  }
}
