#include <benchmark/benchmark.h>

#include "atlas/conceptnet_overlap.hpp"
#include "atlas/eval.hpp"
#include "atlas/generate.hpp"
#include "atlas/train.hpp"
#include "support.hpp"

using namespace atlas;

namespace {

struct ModelFixture {
  AtlasGraph graph;
  Vocabulary vocab;
  ModelParams params;
  std::vector<TrainingInstance> data;
  std::vector<GenerationRequest> requests;

  ModelFixture() : graph(build_graph(test::overfit_triples(50))), vocab(build_vocab(graph, 1)) {
    ModelConfig c;
    c.embed_dim = c.enc_hidden = c.dec_hidden = 32;
    c.max_decode_len = 10;
    Rng rng(1);
    params = ModelParams::random(c, vocab.size(), rng);
    data = make_instances(graph, vocab, params);
    for (const auto& [key, dim] : graph.keys()) requests.push_back({graph.adjacent(key, dim).front().event, dim});
  }
};

const ModelFixture& model_fixture() {
  static const ModelFixture f;
  return f;
}

struct EvalFixture {
  AtlasGraph graph;
  std::vector<GenerationList> gens;
  std::vector<ExternalEdge> edges;

  EvalFixture() {
    Rng rng(3);
    graph = build_graph(test::random_triples(rng, 1000, 10));
    for (const auto& [key, dim] : graph.keys()) {
      GenerationList g{graph.adjacent(key, dim).front().event, dim, 10, {}};
      for (int i = 0; i < 10; ++i) g.entries.push_back({test::random_phrase(rng), -i * 1.0});
      gens.push_back(std::move(g));
    }
    static const std::vector<std::string> rels = {"MotivatedByGoal", "HasSubevent", "Causes", "HasProperty"};
    for (int i = 0; i < 20000; ++i) {
      const auto& t = graph.triples()[static_cast<std::size_t>(rng.below(graph.triples().size()))];
      edges.push_back({test::pick(rng, rels), rng.below(2) == 0 ? t.event : test::random_event(rng), t.target});
    }
  }
};

const EvalFixture& eval_fixture() {
  static const EvalFixture f;
  return f;
}

void BM_DatasetLossSerial(benchmark::State& state) {
  const auto& f = model_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(dataset_loss(f.params, f.data));
}

void BM_DatasetLossParallel(benchmark::State& state) {
  const auto& f = model_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(dataset_loss_parallel(f.params, f.data, static_cast<int>(state.range(0))));
}

void BM_GenerateSerial(benchmark::State& state) {
  const auto& f = model_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(generate_all(f.params, f.vocab, f.requests, 5));
}

void BM_GenerateParallel(benchmark::State& state) {
  const auto& f = model_fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(generate_all_parallel(f.params, f.vocab, f.requests, 5, false, static_cast<int>(state.range(0))));
  }
}

void BM_BleuSerial(benchmark::State& state) {
  const auto& f = eval_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(avg_topk_bleu(f.gens, f.graph, 10));
}

void BM_BleuParallel(benchmark::State& state) {
  const auto& f = eval_fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(avg_topk_bleu_parallel(f.gens, f.graph, 10, {}, "", static_cast<int>(state.range(0))));
  }
}

void BM_OverlapSerial(benchmark::State& state) {
  const auto& f = eval_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(triple_overlap(f.graph, f.edges));
}

void BM_OverlapParallel(benchmark::State& state) {
  const auto& f = eval_fixture();
  for (auto _ : state) {
    benchmark::DoNotOptimize(triple_overlap_parallel(f.graph, f.edges, normalize_concept, static_cast<int>(state.range(0))));
  }
}

}  // namespace

BENCHMARK(BM_DatasetLossSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DatasetLossParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GenerateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GenerateParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BleuSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BleuParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OverlapSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OverlapParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
