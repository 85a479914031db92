#pragma once

#include <optional>
#include <string>

#include "json.hpp"

namespace tabletask {

/// The last well-formed JSON object in a text, tolerant of surrounding
/// reasoning prose (brace tracking is string-aware). nullopt when the text
/// carries no parseable object.
std::optional<nlohmann::json> extract_final_json(const std::string& text);

/// Text with its final JSON object removed (used when splicing a canonical
/// answer back onto model-written reasoning).
std::string strip_final_json(const std::string& text);

/// Match normalization for accuracy-style scoring: trim, case-fold, strip
/// thousands separators from numerics.
std::string normalize_value(const std::string& s);

/// Row ids are accepted as 2, "2", or "row-2"; normalized to the digits.
std::string normalize_row_id(const nlohmann::json& v);

} // namespace tabletask
