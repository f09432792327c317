#include "atlas/dimension.hpp"

namespace atlas {

namespace {

using CT = ContentType;
using CC = CausalCategory;
using S = Subject;
using V = Volition;

// Indexed by Dimension. Mental-state: intent and the two reactions. Persona:
// the attribute (stative). Everything else predicts an event.
constexpr std::array<TaxonomyCoords, kNumDimensions> kCoords = {{
    /* xIntent */ {CT::MentalState, CC::Cause, S::Agent, V::Voluntary},
    /* xNeed   */ {CT::Event, CC::Cause, S::Agent, V::Voluntary},
    /* xAttr   */ {CT::Persona, CC::Stative, S::Agent, V::Involuntary},
    /* xEffect */ {CT::Event, CC::Effect, S::Agent, V::Involuntary},
    /* xReact  */ {CT::MentalState, CC::Effect, S::Agent, V::Involuntary},
    /* xWant   */ {CT::Event, CC::Effect, S::Agent, V::Voluntary},
    /* oEffect */ {CT::Event, CC::Effect, S::Theme, V::Involuntary},
    /* oReact  */ {CT::MentalState, CC::Effect, S::Theme, V::Involuntary},
    /* oWant   */ {CT::Event, CC::Effect, S::Theme, V::Voluntary},
}};

constexpr std::array<std::string_view, kNumDimensions> kNames = {
    "xIntent", "xNeed", "xAttr", "xEffect", "xReact",
    "xWant",   "oEffect", "oReact", "oWant",
};

}  // namespace

TaxonomyCoords classify_dimension(Dimension dim) noexcept {
  return kCoords[dimension_index(dim)];
}

std::string_view dimension_name(Dimension dim) noexcept {
  return kNames[dimension_index(dim)];
}

std::optional<Dimension> parse_dimension(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kNumDimensions; ++i) {
    if (kNames[i] == name) return static_cast<Dimension>(i);
  }
  return std::nullopt;
}

std::string_view content_type_name(ContentType t) noexcept {
  switch (t) {
    case ContentType::MentalState: return "MentalState";
    case ContentType::Event: return "Event";
    case ContentType::Persona: return "Persona";
  }
  return "?";
}

std::string_view causal_category_name(CausalCategory c) noexcept {
  switch (c) {
    case CausalCategory::Cause: return "Cause";
    case CausalCategory::Effect: return "Effect";
    case CausalCategory::Stative: return "Stative";
  }
  return "?";
}

std::string_view subject_name(Subject s) noexcept {
  return s == Subject::Agent ? "Agent" : "Theme";
}

std::string_view volition_name(Volition v) noexcept {
  return v == Volition::Voluntary ? "Voluntary" : "Involuntary";
}

}  // namespace atlas
