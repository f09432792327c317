#include "atlas/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

#include "atlas/error.hpp"
#include "atlas/rng.hpp"
#include "atlas/text.hpp"

namespace atlas {

namespace {

using NgramCounts = std::unordered_map<std::string, std::size_t>;

NgramCounts ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts out;
  if (tokens.size() < n) return out;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t j = 1; j < n; ++j) {
      key += '\x1f';
      key += tokens[i + j];
    }
    ++out[key];
  }
  return out;
}

std::string instance_key(const std::string& event, Dimension dim) {
  return node_key(event) + '\t' + std::string(dimension_name(dim));
}

struct Instance {
  std::size_t list;
  std::span<const GraphTriple> gold;
  bool evaluable;
};

std::vector<Instance> collect_instances(const std::vector<GenerationList>& generations,
                                        const AtlasGraph& gold, std::size_t& skipped) {
  std::set<std::string> seen;
  std::vector<Instance> out;
  skipped = 0;
  for (std::size_t i = 0; i < generations.size(); ++i) {
    const auto& g = generations[i];
    if (!seen.insert(instance_key(g.event, g.dimension)).second) {
      throw DataError("duplicate generations for (" + g.event + ", " +
                      std::string(dimension_name(g.dimension)) + ")");
    }
    const auto triples = gold.adjacent(g.event, g.dimension);
    if (triples.empty()) {
      ++skipped;
      continue;
    }
    std::size_t empty = 0;
    std::size_t total = 0;
    bool any_target = false;
    for (const auto& t : triples) {
      total += t.annotation_count();
      if (t.empty) empty += t.annotation_count();
      else any_target = true;
    }
    out.push_back({i, triples, any_target && is_instance_evaluable(empty, total)});
  }
  return out;
}

EvalReport reduce(const std::vector<GenerationList>& generations, const std::vector<Instance>& instances,
                  const std::vector<double>& scores, std::size_t skipped, int k,
                  const BleuOptions& options, std::string split) {
  EvalReport report;
  report.split = std::move(split);
  report.k = k;
  report.bleu = options;
  report.skipped_no_gold = skipped;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    auto& d = report.dimensions[generations[instances[i].list].dimension];
    if (instances[i].evaluable) {
      d.bleu_sum += scores[i];
      ++d.evaluated;
    } else {
      ++d.omitted;
    }
  }
  return report;
}

}  // namespace

double bleu2(const std::vector<std::string>& candidate,
             const std::vector<std::vector<std::string>>& references, const BleuOptions& options) {
  if (references.empty()) throw DataError("bleu2 needs at least one reference");
  if (candidate.empty()) return 0.0;
  const std::size_t c = candidate.size();

  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 2; ++n) {
    const NgramCounts cand = ngrams(candidate, n);
    NgramCounts max_ref;
    for (const auto& ref : references) {
      for (const auto& [gram, count] : ngrams(ref, n)) {
        auto& m = max_ref[gram];
        m = std::max(m, count);
      }
    }
    std::size_t clipped = 0;
    for (const auto& [gram, count] : cand) {
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) clipped += std::min(count, it->second);
    }
    const double denom = static_cast<double>(std::max<std::size_t>(1, c >= n ? c - n + 1 : 0));
    double p;
    if (clipped > 0) {
      p = static_cast<double>(clipped) / denom;
    } else if (n > 1 || options.smooth_unigrams) {
      p = options.epsilon / denom;
    } else {
      return 0.0;
    }
    log_sum += 0.5 * std::log(p);
  }

  std::size_t r = references.front().size();
  for (const auto& ref : references) {
    const auto diff = [c](std::size_t len) { return len > c ? len - c : c - len; };
    if (diff(ref.size()) < diff(r) || (diff(ref.size()) == diff(r) && ref.size() < r)) r = ref.size();
  }
  const double bp = c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  return bp * std::exp(log_sum);
}

bool is_instance_evaluable(std::size_t empty, std::size_t total) {
  if (total == 0) throw DataError("an instance needs at least one annotation");
  return 3 * empty < total;
}

bool is_instance_evaluable(std::span<const InferenceTarget> annotations) {
  const auto empty = static_cast<std::size_t>(
      std::count_if(annotations.begin(), annotations.end(), [](const InferenceTarget& t) { return t.is_empty(); }));
  return is_instance_evaluable(empty, annotations.size());
}

double instance_bleu(const GenerationList& generations, std::span<const GraphTriple> gold, int k,
                     const BleuOptions& options) {
  std::vector<std::vector<std::string>> refs;
  for (const auto& t : gold) {
    if (!t.empty) refs.push_back(lower_tokens(t.target));
  }
  const std::size_t n = std::min(generations.entries.size(), static_cast<std::size_t>(std::max(k, 0)));
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += bleu2(lower_tokens(generations.entries[i].text), refs, options);
  return sum / static_cast<double>(n);
}

EvalReport avg_topk_bleu(const std::vector<GenerationList>& generations, const AtlasGraph& gold, int k,
                         const BleuOptions& options, std::string split) {
  if (k < 1) throw DataError("k must be >= 1");
  std::size_t skipped = 0;
  const auto instances = collect_instances(generations, gold, skipped);
  std::vector<double> scores(instances.size(), 0.0);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (instances[i].evaluable) scores[i] = instance_bleu(generations[instances[i].list], instances[i].gold, k, options);
  }
  return reduce(generations, instances, scores, skipped, k, options, std::move(split));
}

EvalReport avg_topk_bleu_parallel(const std::vector<GenerationList>& generations, const AtlasGraph& gold,
                                  int k, const BleuOptions& options, std::string split, int threads) {
  if (k < 1) throw DataError("k must be >= 1");
  std::size_t skipped = 0;
  const auto instances = collect_instances(generations, gold, skipped);
  std::vector<double> scores(instances.size(), 0.0);
#pragma omp parallel for num_threads(threads) schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(instances.size()); ++i) {
    const auto& inst = instances[static_cast<std::size_t>(i)];
    if (inst.evaluable) scores[static_cast<std::size_t>(i)] = instance_bleu(generations[inst.list], inst.gold, k, options);
  }
  (void)threads;
  return reduce(generations, instances, scores, skipped, k, options, std::move(split));
}

nlohmann::ordered_json EvalReport::to_json() const {
  nlohmann::ordered_json j;
  std::size_t evaluated = 0;
  std::size_t omitted = 0;
  for (Dimension d : kAllDimensions) {
    auto it = dimensions.find(d);
    if (it == dimensions.end()) continue;
    const auto& s = it->second;
    j[std::string(dimension_name(d))] = {
        {"bleu", s.percent()}, {"evaluated", s.evaluated}, {"omitted", s.omitted}, {"total", s.total()}};
    evaluated += s.evaluated;
    omitted += s.omitted;
  }
  j["meta"] = {{"split", split},
               {"k", k},
               {"max_order", 2},
               {"smoothing", "smoothing1"},
               {"epsilon", bleu.epsilon},
               {"smooth_unigrams", bleu.smooth_unigrams},
               {"instances", evaluated + omitted},
               {"evaluated", evaluated},
               {"omitted", omitted},
               {"skipped_no_gold", skipped_no_gold}};
  return j;
}

JudgmentSheet export_human_eval_sheet(const std::vector<GenerationList>& generations, std::size_t sample_size,
                                      std::uint64_t seed) {
  std::map<std::string, std::vector<const GenerationList*>> by_event;
  for (const auto& g : generations) by_event[node_key(g.event)].push_back(&g);
  if (by_event.size() < sample_size) {
    throw DataError("need " + std::to_string(sample_size) + " events with generations, found " +
                    std::to_string(by_event.size()));
  }
  std::vector<std::string> keys;
  for (const auto& [key, lists] : by_event) keys.push_back(key);
  Rng rng(seed);
  rng.shuffle(keys);
  keys.resize(sample_size);
  std::sort(keys.begin(), keys.end());

  JudgmentSheet sheet;
  for (const auto& key : keys) {
    auto lists = by_event[key];
    std::stable_sort(lists.begin(), lists.end(), [](const GenerationList* a, const GenerationList* b) {
      return dimension_index(a->dimension) < dimension_index(b->dimension);
    });
    for (const GenerationList* g : lists) {
      if (g->entries.size() < static_cast<std::size_t>(kRowsPerGroup)) {
        throw DataError("(" + g->event + ", " + std::string(dimension_name(g->dimension)) + ") has " +
                        std::to_string(g->entries.size()) + " generations, " + std::to_string(kRowsPerGroup) +
                        " needed");
      }
      for (int r = 0; r < kRowsPerGroup; ++r) {
        sheet.push_back({g->event, g->dimension, r + 1, g->entries[static_cast<std::size_t>(r)].text, {}, {}});
      }
    }
  }
  return sheet;
}

void write_judgment_sheet(const JudgmentSheet& sheet, std::ostream& out) {
  out << "event\tdimension\trank\tgeneration\tvotes_valid\tjudges_total\n";
  for (const auto& row : sheet) {
    for (const std::string* field : {&row.event, &row.generation}) {
      if (field->find_first_of("\t\n\r") != std::string::npos) {
        throw DataError("sheet field contains a tab or newline: " + *field);
      }
    }
    out << row.event << '\t' << dimension_name(row.dimension) << '\t' << row.rank << '\t' << row.generation << '\t';
    if (row.votes_valid) out << *row.votes_valid;
    out << '\t';
    if (row.judges_total) out << *row.judges_total;
    out << '\n';
  }
}

JudgmentSheet read_judgment_sheet(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  JudgmentSheet sheet;
  auto parse_int = [&](const std::string& s, const char* what) -> std::optional<int> {
    if (s.empty()) return std::nullopt;
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(s, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != s.size() || v < 0) {
      throw ParseError(ParseError::Kind::BadValue, line_no, std::string("bad ") + what + " '" + s + "'");
    }
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != "event\tdimension\trank\tgeneration\tvotes_valid\tjudges_total") {
        throw ParseError(ParseError::Kind::ColumnCount, line_no, "unexpected judgment sheet header");
      }
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 6) {
      throw ParseError(ParseError::Kind::ColumnCount, line_no,
                       "expected 6 columns, found " + std::to_string(cols.size()));
    }
    const auto dim = parse_dimension(cols[1]);
    if (!dim) throw ParseError(ParseError::Kind::UnknownDimension, line_no, "unknown dimension '" + cols[1] + "'");
    JudgmentRow row;
    row.event = cols[0];
    row.dimension = *dim;
    const auto rank = parse_int(cols[2], "rank");
    if (!rank || *rank < 1) throw ParseError(ParseError::Kind::BadValue, line_no, "rank must be >= 1");
    row.rank = *rank;
    row.generation = cols[3];
    row.votes_valid = parse_int(cols[4], "votes_valid");
    row.judges_total = parse_int(cols[5], "judges_total");
    sheet.push_back(std::move(row));
  }
  return sheet;
}

void save_judgment_sheet(const JudgmentSheet& sheet, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_judgment_sheet(sheet, out);
}

JudgmentSheet load_judgment_sheet(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_judgment_sheet(in);
  } catch (const ParseError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string_view validity_rule_name(ValidityRule r) noexcept {
  return r == ValidityRule::AnyJudge ? "any" : "majority";
}

std::optional<ValidityRule> parse_validity_rule(std::string_view name) noexcept {
  if (name == "any") return ValidityRule::AnyJudge;
  if (name == "majority") return ValidityRule::Majority;
  return std::nullopt;
}

PrecisionReport precision_at_10(const JudgmentSheet& sheet, ValidityRule rule) {
  PrecisionReport report;
  report.rule = rule;
  const bool any_votes = std::any_of(sheet.begin(), sheet.end(), [](const JudgmentRow& r) {
    return r.votes_valid.has_value() || r.judges_total.has_value();
  });
  if (!any_votes) return report;

  // Data rows start on line 2 of the TSV.
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < sheet.size(); ++i) {
    const auto& r = sheet[i];
    if (!r.votes_valid || !r.judges_total || *r.judges_total < 1 || *r.votes_valid > *r.judges_total) {
      bad.push_back(i + 2);
    }
  }
  if (!bad.empty()) {
    std::string msg = "missing or inconsistent votes on sheet lines";
    for (std::size_t i = 0; i < bad.size() && i < 20; ++i) msg += " " + std::to_string(bad[i]);
    if (bad.size() > 20) msg += " (+" + std::to_string(bad.size() - 20) + " more)";
    throw DataError(msg);
  }

  std::map<std::string, std::pair<Dimension, std::size_t>> correct;
  for (const auto& r : sheet) {
    const bool valid = rule == ValidityRule::AnyJudge ? *r.votes_valid >= 1 : 2 * *r.votes_valid > *r.judges_total;
    auto& c = correct.try_emplace(instance_key(r.event, r.dimension), r.dimension, 0).first->second;
    if (valid) ++c.second;
  }
  std::map<Dimension, double> sums;
  for (const auto& [key, c] : correct) {
    sums[c.first] += static_cast<double>(c.second) / kRowsPerGroup;
    ++report.groups[c.first];
  }
  for (const auto& [dim, sum] : sums) {
    report.precision[dim] = 100.0 * sum / static_cast<double>(report.groups[dim]);
  }
  report.has_judgments = true;
  return report;
}

nlohmann::ordered_json PrecisionReport::to_json() const {
  nlohmann::ordered_json j;
  if (has_judgments) {
    for (Dimension d : kAllDimensions) {
      auto it = precision.find(d);
      if (it == precision.end()) continue;
      j[std::string(dimension_name(d))] = {{"precision_at_10", it->second}, {"groups", groups.at(d)}};
    }
  }
  j["meta"] = {{"rule", validity_rule_name(rule)},
               {"state", has_judgments ? "judged" : "no judgments"},
               {"rows_per_group", kRowsPerGroup}};
  return j;
}

}  // namespace atlas
