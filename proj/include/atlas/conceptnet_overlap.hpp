#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "atlas/graph.hpp"

namespace atlas {

enum class RelationGroup { Wants, Effects, Needs, Intents, Reactions, Attributes };

inline constexpr std::array<RelationGroup, 6> kAllGroups = {
    RelationGroup::Wants,   RelationGroup::Effects,   RelationGroup::Needs,
    RelationGroup::Intents, RelationGroup::Reactions, RelationGroup::Attributes};

std::string_view group_name(RelationGroup g) noexcept;

struct GroupMapping {
  RelationGroup group;
  std::vector<Dimension> dimensions;
  std::vector<std::string> relations;
};

// Fixed mapping from atlas dimensions to external relation names, in
// kAllGroups order. Every dimension belongs to exactly one group.
const std::vector<GroupMapping>& dimension_relation_map();
RelationGroup group_of(Dimension d) noexcept;

// A directed, labelled edge between two concepts of an external graph.
struct ExternalEdge {
  std::string relation;
  std::string start;
  std::string end;

  friend bool operator==(const ExternalEdge&, const ExternalEdge&) = default;
};

// TSV relation<TAB>start<TAB>end; '#' lines and blank lines are skipped.
// Concepts are lowercased and whitespace-collapsed, with '_' read as a space.
std::vector<ExternalEdge> parse_external_edges(std::istream& in);
std::vector<ExternalEdge> load_external_edges(const std::filesystem::path& path);

using ConceptNormalizer = std::function<std::string(std::string_view)>;

// Drops person-variable tokens (with any suffix such as 's), lowercases,
// maps '_' to space, collapses whitespace and strips leading "to " and
// "the " repeatedly.
std::string normalize_concept(std::string_view text);

struct OverlapCount {
  std::size_t overlapping = 0;
  std::size_t total = 0;
  double percent() const noexcept {
    return total == 0 ? 0.0 : 100.0 * static_cast<double>(overlapping) / static_cast<double>(total);
  }

  friend bool operator==(const OverlapCount&, const OverlapCount&) = default;
};

// A non-empty atlas triple overlaps when some edge has a relation in its
// group's set, start == normalizer(event) and end == normalizer(target).
// Normalized strings that come out empty never match. Edge concepts are
// passed through the normalizer as well.
std::map<RelationGroup, OverlapCount> triple_overlap(const AtlasGraph& atlas,
                                                     const std::vector<ExternalEdge>& edges,
                                                     const ConceptNormalizer& normalizer = normalize_concept);
// OpenMP kernel over triples; integer counts, so results equal the serial ones.
std::map<RelationGroup, OverlapCount> triple_overlap_parallel(const AtlasGraph& atlas,
                                                              const std::vector<ExternalEdge>& edges,
                                                              const ConceptNormalizer& normalizer,
                                                              int threads);

// Base events whose normalized text equals any normalized edge concept.
OverlapCount event_coverage(const AtlasGraph& atlas, const std::vector<ExternalEdge>& edges,
                            const ConceptNormalizer& normalizer = normalize_concept);

nlohmann::ordered_json overlap_json(const std::map<RelationGroup, OverlapCount>& groups,
                                    const OverlapCount& coverage);

}  // namespace atlas
