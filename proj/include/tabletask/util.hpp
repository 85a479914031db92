#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tabletask {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_ws(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Number of whitespace-separated tokens (used for title-length bounds).
std::size_t token_count(std::string_view s);

/// Strips grouping commas from strings shaped like "19,373,586" or
/// "-1,234.5"; returns the input unchanged when the comma pattern does
/// not match digit grouping.
std::string strip_thousands_separators(std::string_view s);

/// Parses the whole string as a number after separator stripping.
std::optional<double> parse_number(std::string_view s);

/// Damerau-Levenshtein distance with adjacent transpositions.
std::size_t damerau_levenshtein(std::string_view a, std::string_view b);

uint64_t fnv1a64(std::string_view bytes, uint64_t seed = 0xcbf29ce484222325ULL);

/// SHA-256 hex digest of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Work is indexed, so
/// callers that write results[i] get schedule-independent output.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

} // namespace tabletask
