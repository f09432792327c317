#include "atlas/generate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "atlas/error.hpp"
#include "atlas/network.hpp"
#include "atlas/text.hpp"

namespace atlas {

namespace {

using Eigen::VectorXd;

std::vector<char> allowed_mask(std::size_t vocab_size, const BeamOptions& options) {
  std::vector<char> allowed(vocab_size, 1);
  for (int b : options.banned) {
    if (b >= 0 && static_cast<std::size_t>(b) < vocab_size) allowed[static_cast<std::size_t>(b)] = 0;
  }
  return allowed;
}

// Log-probabilities renormalized over allowed tokens; banned entries are -inf.
VectorXd masked_log_softmax(const VectorXd& logits, const std::vector<char>& allowed) {
  double m = -std::numeric_limits<double>::infinity();
  for (Eigen::Index v = 0; v < logits.size(); ++v) {
    if (allowed[static_cast<std::size_t>(v)]) m = std::max(m, logits(v));
  }
  double sum = 0.0;
  for (Eigen::Index v = 0; v < logits.size(); ++v) {
    if (allowed[static_cast<std::size_t>(v)]) sum += std::exp(logits(v) - m);
  }
  const double lse = m + std::log(sum);
  VectorXd out(logits.size());
  for (Eigen::Index v = 0; v < logits.size(); ++v) {
    out(v) = allowed[static_cast<std::size_t>(v)] ? logits(v) - lse : -std::numeric_limits<double>::infinity();
  }
  return out;
}

bool better(const Hypothesis& a, const Hypothesis& b) {
  if (a.log_score != b.log_score) return a.log_score > b.log_score;
  return a.tokens < b.tokens;
}

void check_options(const ModelParams& params, const BeamOptions& options) {
  if (options.beam_width < 1) throw DataError("beam width must be >= 1");
  if (options.max_len < 1) throw DataError("max decode length must be >= 1");
  const auto V = static_cast<int>(params.vocab_size());
  if (options.bos_id < 0 || options.bos_id >= V || options.eos_id < 0 || options.eos_id >= V) {
    throw DataError("bos/eos ids outside the vocabulary");
  }
}

}  // namespace

std::vector<Hypothesis> beam_search(const ModelParams& params, std::span<const int> event,
                                    Dimension dim, const BeamOptions& options) {
  check_options(params, options);
  const auto allowed = allowed_mask(params.vocab_size(), options);
  const auto width = static_cast<std::size_t>(options.beam_width);
  const auto max_len = static_cast<std::size_t>(options.max_len);

  struct Live {
    Hypothesis hyp;
    VectorXd state;
  };
  struct Candidate {
    std::size_t parent;
    int token;
    double score;
  };

  std::vector<Live> alive;
  alive.push_back({{}, initial_decoder_state(params, dim, event)});
  std::vector<Hypothesis> finished;

  for (std::size_t step = 0; step < max_len && !alive.empty(); ++step) {
    std::vector<Candidate> cands;
    std::vector<VectorXd> next_states(alive.size());
    for (std::size_t i = 0; i < alive.size(); ++i) {
      const auto& h = alive[i].hyp;
      const int prev = h.tokens.empty() ? options.bos_id : h.tokens.back();
      auto [logits, next] = decode_logits(params, dim, alive[i].state, prev);
      next_states[i] = std::move(next);
      const VectorXd lp = masked_log_softmax(logits, allowed);
      for (Eigen::Index v = 0; v < lp.size(); ++v) {
        if (allowed[static_cast<std::size_t>(v)]) cands.push_back({i, static_cast<int>(v), h.log_score + lp(v)});
      }
    }
    // Same length at every step, so the lexicographic tie-break compares the
    // parent prefix first and then the new token.
    auto cmp = [&](const Candidate& a, const Candidate& b) {
      if (a.score != b.score) return a.score > b.score;
      if (a.parent != b.parent) return alive[a.parent].hyp.tokens < alive[b.parent].hyp.tokens;
      return a.token < b.token;
    };
    const std::size_t keep = std::min(width, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(), cmp);

    std::vector<Live> next_alive;
    for (std::size_t c = 0; c < keep; ++c) {
      Hypothesis h{alive[cands[c].parent].hyp.tokens, cands[c].score};
      h.tokens.push_back(cands[c].token);
      if (cands[c].token == options.eos_id || h.tokens.size() == max_len) {
        finished.push_back(std::move(h));
      } else {
        next_alive.push_back({std::move(h), next_states[cands[c].parent]});
      }
    }
    alive = std::move(next_alive);

    // Scores only fall as sequences grow: once the pool is full and no live
    // hypothesis beats its worst member, nothing can change the result.
    if (finished.size() >= width && !alive.empty()) {
      std::sort(finished.begin(), finished.end(), better);
      const double floor = finished[width - 1].log_score;
      const bool any_better = std::any_of(alive.begin(), alive.end(),
                                          [&](const Live& l) { return l.hyp.log_score >= floor; });
      if (!any_better) break;
    }
  }
  std::sort(finished.begin(), finished.end(), better);
  if (finished.size() > width) finished.resize(width);
  return finished;
}

Hypothesis greedy_decode(const ModelParams& params, std::span<const int> event, Dimension dim,
                         const BeamOptions& options) {
  check_options(params, options);
  const auto allowed = allowed_mask(params.vocab_size(), options);
  Hypothesis h;
  VectorXd state = initial_decoder_state(params, dim, event);
  int prev = options.bos_id;
  for (int step = 0; step < options.max_len; ++step) {
    auto [logits, next] = decode_logits(params, dim, state, prev);
    const VectorXd lp = masked_log_softmax(logits, allowed);
    int best = -1;
    for (Eigen::Index v = 0; v < lp.size(); ++v) {
      if (!allowed[static_cast<std::size_t>(v)]) continue;
      if (best < 0 || lp(v) > lp(best)) best = static_cast<int>(v);
    }
    if (best < 0) throw DataError("every token is banned");
    h.tokens.push_back(best);
    h.log_score += lp(best);
    if (best == options.eos_id) break;
    state = std::move(next);
    prev = best;
  }
  return h;
}

GenerationList generate(const ModelParams& params, const Vocabulary& vocab,
                        const std::string& event_text, Dimension dim, int beam_width,
                        bool suppress_unk) {
  BeamOptions options;
  options.beam_width = beam_width;
  options.max_len = params.config().max_decode_len;
  options.banned = {Vocabulary::kPad, Vocabulary::kBos};
  if (suppress_unk) options.banned.push_back(Vocabulary::kUnk);

  const auto ids = vocab.encode(model_tokens(event_text));
  GenerationList out;
  out.event = event_text;
  out.dimension = dim;
  out.beam_width = beam_width;
  for (const auto& h : beam_search(params, ids, dim, options)) {
    std::string text = join(vocab.decode(h.tokens));
    const bool dup = std::any_of(out.entries.begin(), out.entries.end(),
                                 [&](const Generation& g) { return g.text == text; });
    if (!dup) out.entries.push_back({std::move(text), h.log_score});
  }
  return out;
}

std::vector<GenerationList> generate_all(const ModelParams& params, const Vocabulary& vocab,
                                         const std::vector<GenerationRequest>& requests,
                                         int beam_width, bool suppress_unk) {
  std::vector<GenerationList> out;
  out.reserve(requests.size());
  for (const auto& r : requests) out.push_back(generate(params, vocab, r.event, r.dimension, beam_width, suppress_unk));
  return out;
}

std::vector<GenerationList> generate_all_parallel(const ModelParams& params,
                                                  const Vocabulary& vocab,
                                                  const std::vector<GenerationRequest>& requests,
                                                  int beam_width, bool suppress_unk, int threads) {
  for (const auto& r : requests) {
    params.encoder_id(r.dimension);
    if (split_whitespace(r.event).empty()) throw DataError("cannot generate for an empty event");
  }
  std::vector<GenerationList> out(requests.size());
#pragma omp parallel for num_threads(threads) schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(requests.size()); ++i) {
    const auto& r = requests[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(i)] = generate(params, vocab, r.event, r.dimension, beam_width, suppress_unk);
  }
  (void)threads;
  return out;
}

EmbeddingTable EmbeddingTable::from_model(const ModelParams& params, const Vocabulary& vocab) {
  EmbeddingTable t(static_cast<int>(params.embedding().cols()));
  for (std::size_t i = Vocabulary::kNumReserved; i < vocab.size(); ++i) {
    t.set(vocab.token(static_cast<int>(i)), params.embedding().row(static_cast<Eigen::Index>(i)).transpose());
  }
  for (int id : {Vocabulary::kPersonX, Vocabulary::kPersonY, Vocabulary::kPersonZ, Vocabulary::kBlank}) {
    t.set(vocab.token(id), params.embedding().row(id).transpose());
  }
  return t;
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embedding file " + path.string());
  EmbeddingTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(ParseError::Kind::ColumnCount, line_no, "expected token<TAB>values");
    std::istringstream values(line.substr(tab + 1));
    std::vector<double> row;
    double x;
    while (values >> x) row.push_back(x);
    if (!values.eof()) throw ParseError(ParseError::Kind::BadValue, line_no, "non-numeric embedding value");
    if (t.dim_ == 0) t.dim_ = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != t.dim_ || row.empty()) {
      throw ParseError(ParseError::Kind::BadValue, line_no, "inconsistent embedding width");
    }
    t.vectors_[line.substr(0, tab)] = Eigen::Map<const VectorXd>(row.data(), static_cast<Eigen::Index>(row.size()));
  }
  return t;
}

void EmbeddingTable::set(const std::string& token, Eigen::VectorXd v) {
  if (dim_ == 0) dim_ = static_cast<int>(v.size());
  if (v.size() != dim_) throw DataError("embedding width mismatch for '" + token + "'");
  vectors_[token] = std::move(v);
}

Eigen::VectorXd EmbeddingTable::lookup(const std::string& token) const {
  auto it = vectors_.find(token);
  return it == vectors_.end() ? VectorXd::Zero(dim_) : it->second;
}

Eigen::VectorXd EmbeddingTable::mean(const std::string& text) const {
  VectorXd acc = VectorXd::Zero(dim_);
  const auto tokens = model_tokens(text);
  if (tokens.empty()) return acc;
  for (const auto& t : tokens) acc += lookup(t);
  return acc / static_cast<double>(tokens.size());
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

NearestNeighborIndex::NearestNeighborIndex(const AtlasGraph& train_graph, const EmbeddingTable& embeddings)
    : embeddings_(&embeddings) {
  for (const auto& [event_key, dim] : train_graph.keys()) {
    Entry e;
    for (const auto& t : train_graph.adjacent(event_key, dim)) {
      if (e.event.empty()) e.event = t.event;
      if (t.empty) continue;
      if (std::find(e.targets.begin(), e.targets.end(), t.target) == e.targets.end()) e.targets.push_back(t.target);
    }
    if (e.targets.empty()) continue;
    e.mean = embeddings.mean(e.event);
    by_dim_[dim].push_back(std::move(e));
  }
}

GenerationList NearestNeighborIndex::predict(const std::string& event_text, Dimension dim, int k) const {
  GenerationList out;
  out.event = event_text;
  out.dimension = dim;
  out.beam_width = k;
  auto it = by_dim_.find(dim);
  if (it == by_dim_.end() || k <= 0) return out;

  const VectorXd q = embeddings_->mean(event_text);
  std::vector<std::pair<double, const Entry*>> ranked;
  ranked.reserve(it->second.size());
  for (const auto& e : it->second) ranked.emplace_back(cosine(q, e.mean), &e);
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return node_key(a.second->event) < node_key(b.second->event);
  });
  for (const auto& [sim, e] : ranked) {
    for (const auto& target : e->targets) {
      if (static_cast<int>(out.entries.size()) >= k) return out;
      const bool dup = std::any_of(out.entries.begin(), out.entries.end(),
                                   [&](const Generation& g) { return g.text == target; });
      if (!dup) out.entries.push_back({target, sim});
    }
  }
  return out;
}

GenerationList nearest_neighbor_predict(const AtlasGraph& train_graph, const EmbeddingTable& embeddings,
                                        const std::string& event_text, Dimension dim, int k) {
  return NearestNeighborIndex(train_graph, embeddings).predict(event_text, dim, k);
}

void write_generations(const std::vector<GenerationList>& lists, std::ostream& out) {
  for (const auto& g : lists) {
    nlohmann::ordered_json j;
    j["event"] = g.event;
    j["dimension"] = dimension_name(g.dimension);
    j["beam_width"] = g.beam_width;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& e : g.entries) arr.push_back({{"text", e.text}, {"score", e.score}});
    j["generations"] = std::move(arr);
    out << j.dump() << '\n';
  }
}

std::vector<GenerationList> read_generations(std::istream& in) {
  std::vector<GenerationList> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    try {
      const auto j = nlohmann::json::parse(line);
      GenerationList g;
      g.event = j.at("event").get<std::string>();
      const auto d = parse_dimension(j.at("dimension").get<std::string>());
      if (!d) throw ParseError(ParseError::Kind::UnknownDimension, line_no, "unknown dimension");
      g.dimension = *d;
      g.beam_width = j.at("beam_width").get<int>();
      for (const auto& e : j.at("generations")) {
        g.entries.push_back({e.at("text").get<std::string>(), e.at("score").get<double>()});
      }
      out.push_back(std::move(g));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(ParseError::Kind::BadValue, line_no, std::string("bad generation record: ") + e.what());
    }
  }
  return out;
}

}  // namespace atlas
