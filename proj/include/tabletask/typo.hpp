#pragma once

#include <optional>
#include <string>

#include "tabletask/rng.hpp"

namespace tabletask {

/// Typographic error classes, each one Damerau-Levenshtein edit away from
/// the original: adjacent-key substitution, deletion, duplication
/// insertion, adjacent transposition. Class choice is uniform.
enum class TypoClass { adjacent_substitution, deletion, duplication, transposition };

/// One corrupted variant of `value`, guaranteed != value and at
/// Damerau-Levenshtein distance exactly 1. Returns nullopt when no class
/// can produce a valid corruption (e.g. too short, no alphabetic chars).
std::optional<std::string> inject_typo(const std::string& value, Rng& rng);

/// Whether the value is corruptible at all (>= 4 alphabetic characters).
bool typo_eligible(const std::string& value);

} // namespace tabletask
