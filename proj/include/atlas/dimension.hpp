#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace atlas {

// The nine if-then inference dimensions. "x" relations concern PersonX
// (the agent), "o" relations concern others (the theme).
enum class Dimension {
  xIntent,
  xNeed,
  xAttr,
  xEffect,
  xReact,
  xWant,
  oEffect,
  oReact,
  oWant,
};

inline constexpr std::size_t kNumDimensions = 9;

inline constexpr std::array<Dimension, kNumDimensions> kAllDimensions = {
    Dimension::xIntent, Dimension::xNeed,   Dimension::xAttr,
    Dimension::xEffect, Dimension::xReact,  Dimension::xWant,
    Dimension::oEffect, Dimension::oReact,  Dimension::oWant,
};

enum class ContentType { MentalState, Event, Persona };
enum class CausalCategory { Cause, Effect, Stative };
enum class Subject { Agent, Theme };
enum class Volition { Voluntary, Involuntary };

struct TaxonomyCoords {
  ContentType content_type;
  CausalCategory causal_category;
  Subject subject;
  Volition volition;

  friend bool operator==(const TaxonomyCoords&, const TaxonomyCoords&) = default;
};

// Fixed coordinate row of a dimension in both hierarchies of the taxonomy.
TaxonomyCoords classify_dimension(Dimension dim) noexcept;

std::string_view dimension_name(Dimension dim) noexcept;

// Case-sensitive; returns nullopt for anything that is not one of the nine names.
std::optional<Dimension> parse_dimension(std::string_view name) noexcept;

std::string_view content_type_name(ContentType t) noexcept;
std::string_view causal_category_name(CausalCategory c) noexcept;
std::string_view subject_name(Subject s) noexcept;
std::string_view volition_name(Volition v) noexcept;

inline constexpr std::size_t dimension_index(Dimension dim) noexcept {
  return static_cast<std::size_t>(dim);
}

// Order by name, which is what "lexicographic by dimension" means for
// output ordering (oEffect < oReact < oWant < xAttr < ...).
inline bool dimension_name_less(Dimension a, Dimension b) noexcept {
  return dimension_name(a) < dimension_name(b);
}

}  // namespace atlas
