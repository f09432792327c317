#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace atlas {

// Split on ASCII whitespace; empty tokens are dropped.
std::vector<std::string> split_whitespace(std::string_view text);

std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");

std::string to_lower(std::string_view text);

// Collapse runs of whitespace to single spaces and trim both ends.
std::string collapse_whitespace(std::string_view text);

// Node identity key: whitespace-collapsed and lowercased.
inline std::string node_key(std::string_view text) {
  return to_lower(collapse_whitespace(text));
}

// Lowercased whitespace tokens; the tokenization used for BLEU and word counts.
inline std::vector<std::string> lower_tokens(std::string_view text) {
  return split_whitespace(to_lower(text));
}

bool is_person_variable(std::string_view token) noexcept;

// PersonX, PersonX's, PersonY. and similar: a person variable with a suffix.
bool starts_with_person_variable(std::string_view token) noexcept;

inline constexpr std::string_view kBlankToken = "___";
inline constexpr std::string_view kEmptyAnnotation = "none";

}  // namespace atlas
