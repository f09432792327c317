#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "atlas/atlas_io.hpp"
#include "atlas/eval.hpp"
#include "atlas/generate.hpp"
#include "support.hpp"

using namespace atlas;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::string& args, const fs::path& dir) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string(ATLAS_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  auto slurp = [](const fs::path& p) {
    std::ifstream f(p);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
  };
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string slurp_binary(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream f(p);
  return nlohmann::json::parse(f);
}

fs::path fixture(const fs::path& dir) {
  Rng rng(3);
  auto raw = test::random_triples(rng, 40, 9);
  save_atlas(build_graph(raw).to_triples(), dir / "fixture.tsv");
  return dir / "fixture.tsv";
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("stats prints and writes the counts") {
    const auto dir = test::temp_dir("cli_stats");
    const auto atlas = fixture(dir);
    const auto r = run("stats --atlas " + atlas.string() + " --out " + (dir / "s.json").string(), dir);
    REQUIRE(r.code == 0);
    CHECK(r.out.find("# triples") != std::string::npos);
    CHECK(r.out.find("# base events") != std::string::npos);
    Rng rng(3);
    const auto naive = test::naive_stats(test::random_triples(rng, 40, 9));
    const auto j = read_json(dir / "s.json");
    CHECK(j["triples"]["total"] == naive.triples);
    CHECK(j["nodes"]["total"] == naive.nodes);
    CHECK(j["base_events"] == naive.base_events);
    const auto cfg = read_json(dir / "s.json.config.json");
    CHECK(cfg["subcommand"] == "stats");
    CHECK(cfg["options"]["split"] == "all");
  }

  TEST_CASE("training twice with one seed gives identical checkpoints") {
    const auto dir = test::temp_dir("cli_train");
    const auto atlas = fixture(dir);
    const std::string common = "train --atlas " + atlas.string() +
                               " --variant event-invol --epochs 1 --seed 7 --embed-dim 8 --enc-hidden 8 --dec-hidden 8 --quiet";
    REQUIRE(run(common + " --out " + (dir / "a.ckpt").string(), dir).code == 0);
    REQUIRE(run(common + " --out " + (dir / "b.ckpt").string(), dir).code == 0);
    const auto a = slurp_binary(dir / "a.ckpt");
    CHECK_FALSE(a.empty());
    CHECK(a == slurp_binary(dir / "b.ckpt"));
  }

  TEST_CASE("eval-bleu reports per-dimension percentages") {
    const auto dir = test::temp_dir("cli_eval");
    const auto atlas = fixture(dir);
    const auto graph = build_graph(load_atlas(atlas));
    std::vector<GenerationList> gens;
    Rng rng(8);
    for (const auto& [event, dim] : graph.keys()) {
      GenerationList g{graph.adjacent(event, dim).front().event, dim, 10, {}};
      for (int i = 0; i < 10; ++i) g.entries.push_back({test::random_phrase(rng), -i * 1.0});
      gens.push_back(std::move(g));
    }
    {
      std::ofstream f(dir / "gen.jsonl");
      write_generations(gens, f);
    }
    const auto r = run("eval-bleu --gen " + (dir / "gen.jsonl").string() + " --atlas " + atlas.string() +
                           " --k 10 --out " + (dir / "e.json").string(),
                       dir);
    REQUIRE(r.code == 0);
    const auto expect = avg_topk_bleu(gens, graph, 10);
    const auto j = read_json(dir / "e.json");
    for (const auto& [d, s] : expect.dimensions) {
      const std::string name(dimension_name(d));
      CHECK(j[name]["bleu"].get<double>() == doctest::Approx(s.percent()).epsilon(1e-12));
      CHECK(j[name]["evaluated"] == s.evaluated);
    }
  }

  TEST_CASE("config files feed option values and reject unknown keys") {
    const auto dir = test::temp_dir("cli_config");
    const auto atlas = fixture(dir);
    {
      std::ofstream f(dir / "good.json");
      f << R"({"atlas": ")" << atlas.string() << R"(", "split": "train"})";
      std::ofstream g(dir / "bad.json");
      g << R"({"atlas": ")" << atlas.string() << R"(", "bogus": 1})";
    }
    CHECK(run("stats --config " + (dir / "good.json").string(), dir).code == 0);
    CHECK(run("stats --config " + (dir / "bad.json").string(), dir).code == 1);
  }

  TEST_CASE("exit codes") {
    const auto dir = test::temp_dir("cli_codes");
    const auto atlas = fixture(dir);
    CHECK(run("", dir).code == 1);
    CHECK(run("frobnicate", dir).code == 1);
    CHECK(run("stats", dir).code == 1);
    CHECK(run("stats --atlas " + atlas.string() + " --split sideways", dir).code == 1);
    CHECK(run("stats --atlas " + (dir / "missing.tsv").string(), dir).code == 2);
    {
      std::ofstream f(dir / "broken.tsv");
      f << "PersonX eats\txNeed\tfood\ttrain\tw1\nPersonX runs\txWish\tshoes\ttrain\tw1\n";
    }
    const auto bad = run("stats --atlas " + (dir / "broken.tsv").string(), dir);
    CHECK(bad.code == 2);
    CHECK(bad.err.find("line 2") != std::string::npos);
    CHECK(run("gradcheck --tolerance 1e-30 --samples 20", dir).code == 3);
    CHECK(run("gradcheck --samples 50", dir).code == 0);
  }

  TEST_CASE("help lists defaults") {
    const auto dir = test::temp_dir("cli_help");
    const auto r = run("train --help", dir);
    CHECK(r.code == 0);
    CHECK(r.out.find("--lr") != std::string::npos);
    CHECK(r.out.find("0.001") != std::string::npos);
    CHECK(r.out.find("event-invol") != std::string::npos);
  }
}
