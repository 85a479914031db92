#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tabletask/rng.hpp"

namespace tabletask {

/// Ordered original -> paraphrase pairs for a table's headers, injective
/// on the originals, paraphrase never equal to its original
/// (case-insensitive).
using HeaderParaphraseMap = std::vector<std::pair<std::string, std::string>>;

/// Deterministic header paraphraser backed by a bundled dictionary of
/// common header terms (full headers plus word-level synonyms and
/// abbreviation expansions). A model-assisted paraphraser can extend the
/// dictionary via `add`; the default keeps tests hermetic.
class HeaderParaphraser {
public:
    static const HeaderParaphraser& builtin();

    /// Loads extra entries ({"header": ["paraphrase", ...]}) on top of the
    /// built-in dictionary.
    static HeaderParaphraser load(const std::string& path);

    void add(const std::string& header, std::vector<std::string> paraphrases);

    /// All paraphrase candidates for one header, deterministic order.
    std::vector<std::string> candidates(const std::string& header) const;

    bool has_candidates(const std::string& header) const { return !candidates(header).empty(); }

    /// Paraphrases every header injectively; candidates are drawn in
    /// seeded order and never collide with another paraphrase or any
    /// original header. Throws ParaphraseFailure naming the first header
    /// that cannot be paraphrased.
    HeaderParaphraseMap paraphrase_headers(const std::vector<std::string>& headers,
                                           Rng& rng) const;

private:
    std::map<std::string, std::vector<std::string>> full_;
    std::map<std::string, std::vector<std::string>> words_;
};

} // namespace tabletask
