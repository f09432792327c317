#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "atlas/generate.hpp"
#include "atlas/graph.hpp"

namespace atlas {

struct BleuOptions {
  // Smoothing1 numerator added to zero-count modified precisions.
  double epsilon = 0.1;
  // Smooth a zero unigram precision as well as a zero bigram precision.
  bool smooth_unigrams = true;
};

// Sentence BLEU with n-grams up to 2, weights (1/2, 1/2), clipped counts,
// closest-reference brevity penalty (ties to the shorter reference) and
// Smoothing1. An empty candidate scores 0. Throws DataError when references
// is empty.
double bleu2(const std::vector<std::string>& candidate,
             const std::vector<std::vector<std::string>>& references,
             const BleuOptions& options = {});

// False iff empty / total >= 1/3, compared as 3 * empty >= total.
bool is_instance_evaluable(std::size_t empty, std::size_t total);
bool is_instance_evaluable(std::span<const InferenceTarget> annotations);

struct DimensionScore {
  double bleu_sum = 0.0;  // sum of per-instance scores in [0, 1]
  std::size_t evaluated = 0;
  std::size_t omitted = 0;
  // Mean per-instance score as a percentage; 0 when nothing was evaluated.
  double percent() const noexcept {
    return evaluated == 0 ? 0.0 : 100.0 * bleu_sum / static_cast<double>(evaluated);
  }
  std::size_t total() const noexcept { return evaluated + omitted; }

  friend bool operator==(const DimensionScore&, const DimensionScore&) = default;
};

struct EvalReport {
  std::string split;
  int k = 10;
  BleuOptions bleu;
  std::map<Dimension, DimensionScore> dimensions;
  std::size_t skipped_no_gold = 0;  // generation lists without gold triples

  nlohmann::ordered_json to_json() const;
};

// Score of one (event, dimension): mean bleu2 of the first min(k, n)
// generations against the non-empty gold targets. 0 with no generations.
double instance_bleu(const GenerationList& generations, std::span<const GraphTriple> gold, int k,
                     const BleuOptions& options = {});

// Averages per instance, then per dimension. Throws DataError when the same
// (event, dimension) appears twice in generations.
EvalReport avg_topk_bleu(const std::vector<GenerationList>& generations, const AtlasGraph& gold,
                         int k = 10, const BleuOptions& options = {}, std::string split = "");
// OpenMP kernel: per-instance scores in parallel, reduced serially in input
// order, so the report is identical to the serial one.
EvalReport avg_topk_bleu_parallel(const std::vector<GenerationList>& generations,
                                  const AtlasGraph& gold, int k, const BleuOptions& options,
                                  std::string split, int threads);

// Human-evaluation sheet. Votes are empty until judges fill them in.
struct JudgmentRow {
  std::string event;
  Dimension dimension = Dimension::xIntent;
  int rank = 1;
  std::string generation;
  std::optional<int> votes_valid;
  std::optional<int> judges_total;

  friend bool operator==(const JudgmentRow&, const JudgmentRow&) = default;
};

using JudgmentSheet = std::vector<JudgmentRow>;

inline constexpr int kRowsPerGroup = 10;

// Samples sample_size distinct events (seeded) and writes kRowsPerGroup rows
// for every (event, dimension) they have. Throws DataError when fewer events
// are available or a list has fewer than kRowsPerGroup generations.
JudgmentSheet export_human_eval_sheet(const std::vector<GenerationList>& generations,
                                      std::size_t sample_size, std::uint64_t seed);

// TSV: event dimension rank generation votes_valid judges_total.
void write_judgment_sheet(const JudgmentSheet& sheet, std::ostream& out);
JudgmentSheet read_judgment_sheet(std::istream& in);
void save_judgment_sheet(const JudgmentSheet& sheet, const std::filesystem::path& path);
JudgmentSheet load_judgment_sheet(const std::filesystem::path& path);

enum class ValidityRule { AnyJudge, Majority };
std::string_view validity_rule_name(ValidityRule r) noexcept;  // "any" | "majority"
std::optional<ValidityRule> parse_validity_rule(std::string_view name) noexcept;

struct PrecisionReport {
  ValidityRule rule = ValidityRule::Majority;
  // False for a sheet with no votes at all; precision is then undefined.
  bool has_judgments = false;
  std::map<Dimension, double> precision;  // percent
  std::map<Dimension, std::size_t> groups;

  nlohmann::ordered_json to_json() const;
};

// Per (event, dimension) group: correct / kRowsPerGroup; averaged over groups
// and scaled to percent. Throws DataError listing rows whose votes are missing
// or inconsistent when the sheet is partially filled.
PrecisionReport precision_at_10(const JudgmentSheet& sheet,
                                ValidityRule rule = ValidityRule::Majority);

}  // namespace atlas
