#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "atlas/atlas_io.hpp"
#include "atlas/checkpoint.hpp"
#include "atlas/conceptnet_overlap.hpp"
#include "atlas/error.hpp"
#include "atlas/eval.hpp"
#include "atlas/generate.hpp"
#include "atlas/gradcheck.hpp"
#include "atlas/graph.hpp"
#include "atlas/ingest.hpp"
#include "atlas/model.hpp"
#include "atlas/rng.hpp"
#include "atlas/text.hpp"
#include "atlas/train.hpp"
#include "atlas/vocab.hpp"
#include "json_config.hpp"

namespace fs = std::filesystem;
using namespace atlas;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Command {
  CLI::App* app;
  std::string* out;
  std::function<void()> run;
};

void write_json(const nlohmann::ordered_json& j, const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

void emit_resolved_config(const CLI::App* app, const std::string& out) {
  if (out.empty()) return;
  nlohmann::ordered_json j;
  j["subcommand"] = app->get_name();
  j["options"] = cli::JsonConfig::resolved(app);
  write_json(j, out + ".config.json");
}

AtlasGraph load_graph(const std::string& path) { return build_graph(load_atlas(path)); }

// "all" keeps every split.
std::optional<Split> split_filter(const std::string& name) {
  if (name == "all") return std::nullopt;
  auto s = parse_split(name);
  if (!s) throw UsageError("unknown split '" + name + "' (train, dev, test or all)");
  return s;
}

AtlasGraph restrict_split(const AtlasGraph& g, std::optional<Split> split) {
  if (!split) return g;
  std::vector<Triple> kept;
  for (auto& t : g.to_triples()) {
    if (t.split == *split) kept.push_back(std::move(t));
  }
  return build_graph(std::move(kept));
}

std::vector<Dimension> parse_dimensions(const std::vector<std::string>& names) {
  if (names.empty()) return {kAllDimensions.begin(), kAllDimensions.end()};
  std::vector<Dimension> out;
  for (const auto& n : names) {
    auto d = parse_dimension(n);
    if (!d) throw UsageError("unknown dimension '" + n + "'");
    out.push_back(*d);
  }
  return out;
}

Variant require_variant(const std::string& name) {
  auto v = parse_variant(name);
  if (!v) throw UsageError("unknown variant '" + name + "'");
  return *v;
}

std::string fmt(double v, int digits = 2) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

nlohmann::ordered_json stats_json(const StatsReport& r) {
  nlohmann::ordered_json j;
  auto by_type = [](const std::map<ContentType, std::size_t>& m) {
    nlohmann::ordered_json o;
    for (auto t : {ContentType::MentalState, ContentType::Event, ContentType::Persona}) {
      auto it = m.find(t);
      o[std::string(content_type_name(t))] = it == m.end() ? 0 : it->second;
    }
    return o;
  };
  j["triples"] = {{"total", r.triples_total}, {"by_content_type", by_type(r.triples_by_content_type)}};
  j["empty_annotations"] = r.empty_annotations;
  j["nodes"] = {{"total", r.nodes_total}, {"by_content_type", by_type(r.nodes_by_content_type)}};
  nlohmann::ordered_json words;
  for (auto t : {ContentType::MentalState, ContentType::Event, ContentType::Persona}) {
    auto it = r.avg_words_per_node.find(t);
    words[std::string(content_type_name(t))] = it == r.avg_words_per_node.end() ? 0.0 : it->second.value();
  }
  words["all_nodes"] = r.avg_words_all_nodes.value();
  words["base_events"] = r.avg_words_base_events.value();
  j["avg_words"] = std::move(words);
  j["base_events"] = r.base_event_count;
  j["nodes_appearing_multiple"] = r.nodes_appearing_multiple;
  return j;
}

void print_stats(const StatsReport& r) {
  auto count = [](const std::map<ContentType, std::size_t>& m, ContentType t) {
    auto it = m.find(t);
    return it == m.end() ? std::size_t{0} : it->second;
  };
  auto words = [&](ContentType t) {
    auto it = r.avg_words_per_node.find(t);
    return it == r.avg_words_per_node.end() ? 0.0 : it->second.value();
  };
  std::cout << std::left;
  std::cout << std::setw(34) << "# triples" << r.triples_total << '\n';
  for (auto t : {ContentType::MentalState, ContentType::Event, ContentType::Persona}) {
    std::cout << "  " << std::setw(32) << content_type_name(t) << count(r.triples_by_content_type, t) << '\n';
  }
  std::cout << std::setw(34) << "# empty annotations" << r.empty_annotations << '\n';
  std::cout << std::setw(34) << "# nodes" << r.nodes_total << '\n';
  for (auto t : {ContentType::MentalState, ContentType::Event, ContentType::Persona}) {
    std::cout << "  " << std::setw(32) << content_type_name(t) << count(r.nodes_by_content_type, t) << '\n';
  }
  std::cout << std::setw(34) << "# nodes appearing > 1" << r.nodes_appearing_multiple << '\n';
  std::cout << std::setw(34) << "avg words per node" << fmt(r.avg_words_all_nodes.value()) << '\n';
  for (auto t : {ContentType::MentalState, ContentType::Event, ContentType::Persona}) {
    std::cout << "  " << std::setw(32) << content_type_name(t) << fmt(words(t)) << '\n';
  }
  std::cout << std::setw(34) << "# base events" << r.base_event_count << '\n';
  std::cout << std::setw(34) << "avg words per base event" << fmt(r.avg_words_base_events.value()) << '\n';
}

void add_ingest(CLI::App& app, std::vector<Command>& cmds) {
  auto* sub = app.add_subcommand("ingest", "Normalize raw events and write a canonical atlas");
  struct Opts {
    std::string input, out, names, freq;
    std::uint64_t threshold = 0;
    std::size_t top_k = 10000;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--input", o->input, "Atlas file with raw event text (TSV or JSONL)")->required();
  sub->add_option("--out", o->out, "Output atlas (.tsv or .jsonl)")->required();
  sub->add_option("--names", o->names, "Name lexicon, one name per line");
  sub->add_option("--freq", o->freq, "Verb/argument frequency table for blanking");
  sub->add_option("--threshold", o->threshold, "Blanking threshold; 0 uses the source default");
  sub->add_option("--top-k", o->top_k, "Rank cutoff for ngram frequency tables");
  cmds.push_back({sub, &o->out, [o] {
    auto triples = load_atlas(o->input);
    const WordSet names = o->names.empty() ? WordSet{} : load_word_list(o->names);
    std::optional<FrequencyTable> freq;
    std::uint64_t threshold = o->threshold;
    if (!o->freq.empty()) {
      freq = load_frequency_table(o->freq);
      if (threshold == 0) {
        threshold = freq->source == CorpusSource::Ngrams ? ngram_rank_threshold(*freq, o->top_k)
                                                         : default_threshold(freq->source);
      }
    }
    std::size_t renamed = 0;
    std::size_t blanked = 0;
    for (auto& t : triples) {
      EventPhrase e = normalize_event(t.event.text(), names);
      if (!(e == t.event)) ++renamed;
      if (freq) {
        EventPhrase b = blank_infrequent_args(e, *freq, threshold);
        if (!(b == e)) ++blanked;
        e = std::move(b);
      }
      t.event = std::move(e);
    }
    const AtlasGraph g = build_graph(triples);
    auto out = g.to_triples();
    canonical_order(out);
    save_atlas(out, o->out);
    std::cout << "annotations read      " << triples.size() << '\n'
              << "events renamed        " << renamed << '\n'
              << "events blanked        " << blanked << '\n'
              << "distinct triples      " << g.triples().size() << '\n'
              << "base events           " << g.events().size() << '\n';
    for (const auto& d : g.diagnostics()) std::cout << "note: " << d << '\n';
  }});
}

void add_stats(CLI::App& app, std::vector<Command>& cmds) {
  auto* sub = app.add_subcommand("stats", "Print triple, node and word counts");
  struct Opts {
    std::string atlas, out, split = "all";
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--atlas", o->atlas, "Atlas file")->required();
  sub->add_option("--split", o->split, "train, dev, test or all");
  sub->add_option("--out", o->out, "Write the report as JSON");
  cmds.push_back({sub, &o->out, [o] {
    const AtlasGraph g = restrict_split(load_graph(o->atlas), split_filter(o->split));
    const StatsReport r = graph_stats(g);
    print_stats(r);
    if (!o->out.empty()) write_json(stats_json(r), o->out);
  }});
}

void add_query(CLI::App& app, std::vector<Command>& cmds) {
  auto* sub = app.add_subcommand("query", "List the inferences of an event");
  struct Opts {
    std::string atlas, event, out;
    std::vector<std::string> dimensions;
    bool include_empty = false;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--atlas", o->atlas, "Atlas file")->required();
  sub->add_option("--event", o->event, "Base event text")->required();
  sub->add_option("--dimension", o->dimensions, "Dimensions to list (default: all nine)");
  sub->add_flag("--include-empty", o->include_empty, "Also list empty annotations");
  sub->add_option("--out", o->out, "Write the inferences as JSON");
  cmds.push_back({sub, &o->out, [o] {
    const AtlasGraph g = load_graph(o->atlas);
    if (!g.event_split(o->event)) throw DataError("event not in atlas: " + o->event);
    nlohmann::ordered_json j;
    j["event"] = o->event;
    for (Dimension d : parse_dimensions(o->dimensions)) {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& t : query_inferences(g, o->event, d, o->include_empty)) {
        std::cout << dimension_name(d) << '\t' << t.text() << '\n';
        arr.push_back(t.text());
      }
      j["inferences"][std::string(dimension_name(d))] = std::move(arr);
    }
    if (!o->out.empty()) write_json(j, o->out);
  }});
}

void add_split(CLI::App& app, std::vector<Command>& cmds) {
  auto* sub = app.add_subcommand("split", "Assign train/dev/test by content-key groups");
  struct Opts {
    std::string atlas, out, stopwords;
    double train = 0.8, dev = 0.1, test = 0.1;
    std::uint64_t seed = 1;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--atlas", o->atlas, "Atlas file")->required();
  sub->add_option("--out", o->out, "Output atlas with the split column rewritten")->required();
  sub->add_option("--train", o->train, "Train ratio");
  sub->add_option("--dev", o->dev, "Dev ratio");
  sub->add_option("--test", o->test, "Test ratio");
  sub->add_option("--seed", o->seed, "Shuffle seed");
  sub->add_option("--stopwords", o->stopwords, "Stopword list (default: built-in 40 words)");
  cmds.push_back({sub, &o->out, [o] {
    auto triples = load_atlas(o->atlas);
    const WordSet stop = o->stopwords.empty() ? default_stopwords() : load_word_list(o->stopwords);
    std::vector<EventPhrase> events;
    events.reserve(triples.size());
    for (const auto& t : triples) events.push_back(t.event);
    const auto a = split_events(events, {o->train, o->dev, o->test}, o->seed, stop);
    for (auto& t : triples) t.split = a.assignment.at(t.event.text());
    canonical_order(triples);
    save_atlas(triples, o->out);
    for (Split s : {Split::Train, Split::Dev, Split::Test}) {
      std::cout << std::left << std::setw(8) << split_name(s) << a.count(s) << " events\n";
    }
  }});
}

void add_train(CLI::App& app, std::vector<Command>& cmds) {
  auto* sub = app.add_subcommand("train", "Train a multitask encoder-decoder");
  struct Opts {
    std::string atlas, out, variant = "event-invol", embeddings;
    ModelConfig cfg;
    int min_count = 1;
    bool fast = false;
    int threads = 1;
    bool quiet = false;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--atlas", o->atlas, "Atlas file; the train split is used")->required();
  sub->add_option("--out", o->out, "Checkpoint path")->required();
  sub->add_option("--variant", o->variant, "single9, event-invol, event-xy or event-prepost");
  sub->add_option("--embed-dim", o->cfg.embed_dim, "Embedding size");
  sub->add_option("--enc-hidden", o->cfg.enc_hidden, "Encoder hidden size (both directions)");
  sub->add_option("--dec-hidden", o->cfg.dec_hidden, "Decoder hidden size");
  sub->add_option("--max-decode-len", o->cfg.max_decode_len, "Decode length limit stored in the checkpoint");
  sub->add_option("--lr", o->cfg.learning_rate, "Adam learning rate");
  sub->add_option("--batch-size", o->cfg.batch_size, "Instances per batch");
  sub->add_option("--epochs", o->cfg.epochs, "Training epochs");
  sub->add_option("--seed", o->cfg.seed, "Initialization and shuffling seed");
  sub->add_option("--clip-norm", o->cfg.clip_norm, "Global gradient norm clip; <= 0 disables");
  sub->add_option("--init-scale", o->cfg.init_scale, "Uniform init range");
  sub->add_option("--min-count", o->min_count, "Vocabulary frequency cutoff");
  sub->add_option("--embeddings", o->embeddings, "Static embedding file token<TAB>values");
  sub->add_flag("--freeze-embeddings", o->cfg.freeze_embeddings, "Keep the embedding matrix fixed");
  sub->add_flag("--fast-nondeterministic", o->fast, "Parallel batch gradients; reproducible only per thread count");
  sub->add_option("--threads", o->threads, "Threads for --fast-nondeterministic");
  sub->add_flag("--quiet", o->quiet, "Do not print per-epoch losses");
  cmds.push_back({sub, &o->out, [o] {
    o->cfg.variant = require_variant(o->variant);
    if (o->cfg.variant == Variant::NearestNeighbor) {
      throw UsageError("nearest-neighbor has no parameters to train; use generate --variant nearest-neighbor");
    }
    o->cfg.validate();
    const AtlasGraph g = load_graph(o->atlas);
    const Vocabulary vocab = build_vocab(g, o->min_count);
    Rng rng(o->cfg.seed);
    ModelParams params = ModelParams::random(o->cfg, vocab.size(), rng);
    if (!o->embeddings.empty()) {
      const auto n = load_static_embeddings(o->embeddings, vocab, params);
      std::cout << "static embeddings     " << n << " of " << vocab.size() << " tokens\n";
    }
    const auto data = make_instances(g, vocab, params, Split::Train);
    if (data.empty()) throw DataError("no training instances in the train split of " + o->atlas);
    TrainOptions opts;
    opts.parallel_batches = o->fast;
    opts.threads = o->threads;
    if (!o->quiet) {
      opts.on_epoch = [](int epoch, double loss) {
        std::cout << "epoch " << std::setw(4) << epoch + 1 << "  loss " << fmt(loss, 6) << '\n';
      };
    }
    std::cout << "vocabulary            " << vocab.size() << '\n'
              << "instances             " << data.size() << '\n'
              << "parameters            " << params.parameter_count() << '\n';
    TrainResult r = train(std::move(params), data, opts);
    save_checkpoint(r.params, vocab, o->out);
    std::cout << "final loss            " << fmt(r.epoch_loss.empty() ? 0.0 : r.epoch_loss.back(), 6) << '\n';
  }});
}

void add_generate(CLI::App& app, std::vector<Command>& cmds) {
  auto* sub = app.add_subcommand("generate", "Generate ranked inferences for events");
  struct Opts {
    std::string checkpoint, atlas, out, split = "test", variant, embeddings, event;
    std::vector<std::string> dimensions;
    int beam = 10;
    bool suppress_unk = false;
    int threads = 1;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--checkpoint", o->checkpoint, "Trained checkpoint");
  sub->add_option("--atlas", o->atlas, "Atlas whose events to generate for");
  sub->add_option("--split", o->split, "Split of --atlas to use: train, dev, test or all");
  sub->add_option("--event", o->event, "Generate for this single event instead of --atlas");
  sub->add_option("--dimension", o->dimensions, "Dimensions (default: every dimension with gold triples)");
  sub->add_option("--beam", o->beam, "Beam width and number of generations");
  sub->add_flag("--suppress-unk", o->suppress_unk, "Never emit <unk>");
  sub->add_option("--variant", o->variant, "Set to nearest-neighbor for the retrieval baseline");
  sub->add_option("--embeddings", o->embeddings, "Static embeddings for nearest-neighbor");
  sub->add_option("--threads", o->threads, "Worker threads");
  sub->add_option("--out", o->out, "Generations (JSON lines)")->required();
  cmds.push_back({sub, &o->out, [o] {
    if (o->threads < 1) throw UsageError("--threads must be >= 1");
    const bool nn = !o->variant.empty() && require_variant(o->variant) == Variant::NearestNeighbor;
    if (o->atlas.empty() && o->event.empty()) throw UsageError("give --atlas or --event");

    std::optional<AtlasGraph> graph;
    if (!o->atlas.empty()) graph = load_graph(o->atlas);
    std::vector<GenerationRequest> requests;
    const auto dims = parse_dimensions(o->dimensions);
    if (!o->event.empty()) {
      for (Dimension d : dims) requests.push_back({o->event, d});
    } else {
      const std::set<Dimension> wanted(dims.begin(), dims.end());
      const AtlasGraph part = restrict_split(*graph, split_filter(o->split));
      for (const auto& [key, d] : part.keys()) {
        if (wanted.contains(d)) requests.push_back({part.adjacent(key, d).front().event, d});
      }
    }

    std::vector<GenerationList> lists;
    if (nn) {
      if (!graph) throw UsageError("nearest-neighbor needs --atlas for its training events");
      EmbeddingTable table;
      if (!o->embeddings.empty()) {
        table = EmbeddingTable::load(o->embeddings);
      } else if (!o->checkpoint.empty()) {
        const Checkpoint ck = load_checkpoint(o->checkpoint);
        table = EmbeddingTable::from_model(ck.params, ck.vocab);
      } else {
        throw UsageError("nearest-neighbor needs --embeddings or --checkpoint");
      }
      const AtlasGraph train_graph = restrict_split(*graph, Split::Train);
      const NearestNeighborIndex index(train_graph, table);
      lists.resize(requests.size());
#pragma omp parallel for num_threads(o->threads) schedule(dynamic, 8)
      for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(requests.size()); ++i) {
        const auto& r = requests[static_cast<std::size_t>(i)];
        lists[static_cast<std::size_t>(i)] = index.predict(r.event, r.dimension, o->beam);
      }
    } else {
      if (o->checkpoint.empty()) throw UsageError("--checkpoint is required unless --variant nearest-neighbor");
      const Checkpoint ck = load_checkpoint(o->checkpoint);
      std::erase_if(requests, [&](const GenerationRequest& r) { return !ck.params.has_dimension(r.dimension); });
      lists = o->threads == 1
                  ? generate_all(ck.params, ck.vocab, requests, o->beam, o->suppress_unk)
                  : generate_all_parallel(ck.params, ck.vocab, requests, o->beam, o->suppress_unk, o->threads);
    }
    std::ofstream f(o->out);
    if (!f) throw DataError("cannot write " + o->out);
    write_generations(lists, f);
    std::cout << "generation lists      " << lists.size() << '\n';
    if (!o->event.empty()) {
      for (const auto& l : lists) {
        for (const auto& e : l.entries) {
          std::cout << dimension_name(l.dimension) << '\t' << fmt(e.score, 4) << '\t' << e.text << '\n';
        }
      }
    }
  }});
}

EvalReport run_bleu(const std::vector<GenerationList>& gens, const AtlasGraph& gold, int k, const BleuOptions& b,
                    const std::string& split, int threads) {
  return threads == 1 ? avg_topk_bleu(gens, gold, k, b, split)
                      : avg_topk_bleu_parallel(gens, gold, k, b, split, threads);
}

void add_eval_bleu(CLI::App& app, std::vector<Command>& cmds) {
  auto* sub = app.add_subcommand("eval-bleu", "Average top-k BLEU-2 against gold annotations");
  struct Opts {
    std::string gen, atlas, out, split = "all";
    int k = 10;
    double epsilon = 0.1;
    bool no_unigram_smoothing = false;
    int threads = 1;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--gen", o->gen, "Generations (JSON lines)")->required();
  sub->add_option("--atlas", o->atlas, "Gold atlas")->required();
  sub->add_option("--split", o->split, "Gold split: train, dev, test or all");
  sub->add_option("--k", o->k, "Generations scored per instance");
  sub->add_option("--epsilon", o->epsilon, "Smoothing1 numerator");
  sub->add_flag("--no-unigram-smoothing", o->no_unigram_smoothing, "Smooth only the bigram precision");
  sub->add_option("--threads", o->threads, "Worker threads");
  sub->add_option("--out", o->out, "EvalReport JSON");
  cmds.push_back({sub, &o->out, [o] {
    if (o->threads < 1) throw UsageError("--threads must be >= 1");
    const AtlasGraph gold = restrict_split(load_graph(o->atlas), split_filter(o->split));
    std::ifstream in(o->gen);
    if (!in) throw DataError("cannot open " + o->gen);
    std::vector<GenerationList> gens;
    try {
      gens = read_generations(in);
    } catch (const ParseError& e) {
      throw DataError(o->gen + ": " + e.what());
    }
    BleuOptions b;
    b.epsilon = o->epsilon;
    b.smooth_unigrams = !o->no_unigram_smoothing;
    const EvalReport r = run_bleu(gens, gold, o->k, b, o->split, o->threads);
    for (const auto& [d, s] : r.dimensions) {
      std::cout << std::left << std::setw(10) << dimension_name(d) << fmt(s.percent()) << "  (" << s.evaluated
                << " evaluated, " << s.omitted << " omitted)\n";
    }
    if (r.skipped_no_gold > 0) std::cout << "skipped without gold  " << r.skipped_no_gold << '\n';
    if (!o->out.empty()) write_json(r.to_json(), o->out);
  }});
}

void add_export(CLI::App& app, std::vector<Command>& cmds) {
  auto* sub = app.add_subcommand("export-human-eval", "Write a judgment sheet for sampled events");
  struct Opts {
    std::string gen, out;
    std::size_t sample_size = 100;
    std::uint64_t seed = 1;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--gen", o->gen, "Generations (JSON lines)")->required();
  sub->add_option("--sample-size", o->sample_size, "Events to sample");
  sub->add_option("--seed", o->seed, "Sampling seed");
  sub->add_option("--out", o->out, "Judgment sheet TSV")->required();
  cmds.push_back({sub, &o->out, [o] {
    std::ifstream in(o->gen);
    if (!in) throw DataError("cannot open " + o->gen);
    const auto sheet = export_human_eval_sheet(read_generations(in), o->sample_size, o->seed);
    save_judgment_sheet(sheet, o->out);
    std::cout << "rows                  " << sheet.size() << '\n';
  }});
}

void add_precision(CLI::App& app, std::vector<Command>& cmds) {
  auto* sub = app.add_subcommand("precision", "Precision at 10 from a filled judgment sheet");
  struct Opts {
    std::string sheet, out, rule = "majority";
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--sheet", o->sheet, "Judgment sheet TSV")->required();
  sub->add_option("--rule", o->rule, "any or majority");
  sub->add_option("--out", o->out, "Report JSON");
  cmds.push_back({sub, &o->out, [o] {
    const auto rule = parse_validity_rule(o->rule);
    if (!rule) throw UsageError("unknown rule '" + o->rule + "' (any or majority)");
    const PrecisionReport r = precision_at_10(load_judgment_sheet(o->sheet), *rule);
    if (!r.has_judgments) {
      std::cout << "no judgments\n";
    } else {
      for (const auto& [d, p] : r.precision) {
        std::cout << std::left << std::setw(10) << dimension_name(d) << fmt(p) << '\n';
      }
    }
    if (!o->out.empty()) write_json(r.to_json(), o->out);
  }});
}

void add_overlap(CLI::App& app, std::vector<Command>& cmds) {
  auto* sub = app.add_subcommand("overlap", "Triple overlap and event coverage against external edges");
  struct Opts {
    std::string atlas, edges, out;
    int threads = 1;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--atlas", o->atlas, "Atlas file")->required();
  sub->add_option("--edges", o->edges, "Edge TSV relation<TAB>start<TAB>end")->required();
  sub->add_option("--threads", o->threads, "Worker threads");
  sub->add_option("--out", o->out, "Report JSON");
  cmds.push_back({sub, &o->out, [o] {
    if (o->threads < 1) throw UsageError("--threads must be >= 1");
    const AtlasGraph g = load_graph(o->atlas);
    const auto edges = load_external_edges(o->edges);
    const auto groups = o->threads == 1 ? triple_overlap(g, edges)
                                        : triple_overlap_parallel(g, edges, normalize_concept, o->threads);
    const OverlapCount cov = event_coverage(g, edges);
    for (const auto& [grp, c] : groups) {
      std::cout << std::left << std::setw(12) << group_name(grp) << fmt(c.percent()) << "%  (" << c.overlapping
                << " of " << c.total << ")\n";
    }
    std::cout << std::setw(12) << "events" << fmt(cov.percent()) << "%  (" << cov.overlapping << " of " << cov.total
              << ")\n";
    if (!o->out.empty()) write_json(overlap_json(groups, cov), o->out);
  }});
}

void add_gradcheck(CLI::App& app, std::vector<Command>& cmds) {
  auto* sub = app.add_subcommand("gradcheck", "Compare backprop with central differences on a random model");
  struct Opts {
    std::string variant = "event-invol", out;
    int vocab_size = 30, hidden = 16;
    std::size_t samples = 200;
    double epsilon = 1e-4, tolerance = 1e-3;
    std::uint64_t seed = 1;
  };
  auto o = std::make_shared<Opts>();
  sub->add_option("--variant", o->variant, "single9, event-invol, event-xy or event-prepost");
  sub->add_option("--vocab-size", o->vocab_size, "Vocabulary size (>= 9)");
  sub->add_option("--hidden", o->hidden, "Embedding and hidden size");
  sub->add_option("--samples", o->samples, "Coordinates sampled per dimension");
  sub->add_option("--epsilon", o->epsilon, "Finite-difference step");
  sub->add_option("--tolerance", o->tolerance, "Largest acceptable relative error");
  sub->add_option("--seed", o->seed, "Model and sampling seed");
  sub->add_option("--out", o->out, "Report JSON");
  cmds.push_back({sub, &o->out, [o] {
    ModelConfig cfg;
    cfg.variant = require_variant(o->variant);
    if (cfg.variant == Variant::NearestNeighbor) throw UsageError("nearest-neighbor has no gradients");
    if (o->vocab_size <= Vocabulary::kNumReserved) throw UsageError("--vocab-size must exceed 8");
    cfg.embed_dim = cfg.enc_hidden = cfg.dec_hidden = o->hidden;
    cfg.init_scale = 0.5;
    cfg.seed = o->seed;
    cfg.validate();
    Rng rng(o->seed);
    const ModelParams params = ModelParams::random(cfg, static_cast<std::size_t>(o->vocab_size), rng);
    auto token = [&] {
      return Vocabulary::kNumReserved + static_cast<int>(rng.below(static_cast<std::uint64_t>(o->vocab_size - Vocabulary::kNumReserved)));
    };
    nlohmann::ordered_json j;
    double worst = 0.0;
    for (Dimension d : params.dimensions()) {
      TrainingInstance inst{{Vocabulary::kPersonX, token(), token(), token()}, d, {Vocabulary::kBos}, "gradcheck"};
      for (int i = 0; i < 4; ++i) inst.target.push_back(token());
      inst.target.push_back(Vocabulary::kEos);
      GradCheckOptions gopts;
      gopts.epsilon = o->epsilon;
      gopts.samples = o->samples;
      gopts.seed = o->seed + dimension_index(d);
      const auto r = gradient_check(params, inst, gopts);
      worst = std::max(worst, r.max_relative_error);
      j[std::string(dimension_name(d))] = r.max_relative_error;
      std::cout << std::left << std::setw(10) << dimension_name(d) << std::scientific << std::setprecision(3)
                << r.max_relative_error << std::defaultfloat << '\n';
    }
    j["max_relative_error"] = worst;
    j["tolerance"] = o->tolerance;
    if (!o->out.empty()) write_json(j, o->out);
    if (!(worst < o->tolerance)) throw NumericError("gradient check failed: max relative error " + std::to_string(worst));
  }});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Typed if-then commonsense atlas: ingest, train, generate, evaluate"};
  auto formatter = std::make_shared<cli::JsonConfig>();
  app.config_formatter(formatter);
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.set_config("--config", "", "JSON file of subcommand option values; flags override it");

  std::vector<Command> cmds;
  add_ingest(app, cmds);
  add_stats(app, cmds);
  add_query(app, cmds);
  add_split(app, cmds);
  add_train(app, cmds);
  add_generate(app, cmds);
  add_eval_bleu(app, cmds);
  add_export(app, cmds);
  add_precision(app, cmds);
  add_overlap(app, cmds);
  add_gradcheck(app, cmds);
  for (int i = 1; i < argc && formatter->section.empty(); ++i) {
    for (const auto& c : cmds) {
      if (c.app->get_name() == argv[i]) formatter->section = argv[i];
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  for (auto& c : cmds) {
    if (!c.app->parsed()) continue;
    try {
      c.run();
      emit_resolved_config(c.app, *c.out);
      return kOk;
    } catch (const UsageError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kUsage;
    } catch (const NumericError& e) {
      std::cerr << "numeric error: " << e.what() << '\n';
      return kNumeric;
    } catch (const DataError& e) {
      std::cerr << "data error: " << e.what() << '\n';
      return kData;
    } catch (const std::filesystem::filesystem_error& e) {
      std::cerr << "data error: " << e.what() << '\n';
      return kData;
    } catch (const nlohmann::json::exception& e) {
      std::cerr << "data error: " << e.what() << '\n';
      return kData;
    }
  }
  return kUsage;
}
