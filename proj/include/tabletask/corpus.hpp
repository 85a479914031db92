#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "tabletask/table.hpp"

namespace tabletask {

/// Token-count bounds on a table title (inclusive).
struct TitleBounds {
    std::size_t min_tokens = 3;
    std::size_t max_tokens = 15;

    bool admits(const std::string& title) const;
};

/// What to ingest and which tables to keep. Paths may be files,
/// directories (recursively scanned for .csv/.json/.jsonl), or globs.
struct CorpusManifest {
    SourceTag tag = SourceTag::web;
    std::vector<std::string> paths;
    std::size_t min_rows = 3;
    std::size_t max_rows = 100;
    std::size_t min_columns = 2;
    std::size_t max_columns = 20;
    TitleBounds title_bounds;

    void validate() const;

    static CorpusManifest from_json(const nlohmann::json& j);
    static CorpusManifest load(const std::string& path);
    nlohmann::json to_json() const;
};

/// Per-unit ingestion bookkeeping. Every scanned table lands in exactly
/// one of accepted / rejected_malformed / rejected_size / deduped, so the
/// four always sum to `scanned`.
struct IngestReport {
    std::size_t scanned = 0;
    std::size_t accepted = 0;
    std::size_t rejected_malformed = 0;
    std::size_t rejected_size = 0;
    std::size_t deduped = 0;
    std::size_t near_duplicate_warnings = 0;
    std::vector<std::string> messages;

    nlohmann::json to_json() const;
};

/// Deduplicated pool of same-tag tables.
class Corpus {
public:
    Corpus() = default;
    Corpus(SourceTag tag, TitleBounds bounds) : tag_(tag), title_bounds_(bounds) {}

    /// Adds a table; returns false (and keeps the corpus unchanged) when a
    /// table with the same content hash is already present.
    bool add(Table table, std::string source_path = "");

    std::size_t size() const { return tables_.size(); }
    bool empty() const { return tables_.empty(); }
    SourceTag tag() const { return tag_; }
    const TitleBounds& title_bounds() const { return title_bounds_; }

    const Table& table(std::size_t i) const { return tables_[i]; }
    const std::string& digest(std::size_t i) const { return digests_[i]; }
    const std::string& source_path(std::size_t i) const { return source_paths_[i]; }
    const std::vector<Table>& tables() const { return tables_; }

    bool contains_digest(const std::string& digest) const {
        return digest_index_.count(digest) > 0;
    }
    const Table* find_by_digest(const std::string& digest) const;

    std::vector<std::string> sorted_digests() const;

private:
    std::vector<Table> tables_;
    std::vector<std::string> digests_;
    std::vector<std::string> source_paths_;
    std::unordered_map<std::string, std::size_t> digest_index_;
    SourceTag tag_ = SourceTag::web;
    TitleBounds title_bounds_;
};

struct IngestResult {
    Corpus corpus;
    IngestReport report;
};

/// Reads every table under the manifest paths, applies the size filters,
/// deduplicates by content hash, and reports the bookkeeping. Individual
/// file parse failures are recorded and skipped. Throws NoTablesFound when
/// nothing survives.
IngestResult ingest(const CorpusManifest& manifest, unsigned jobs = 1);

/// Deterministic sample of n distinct tables; identical (corpus, n, seed)
/// give identical output order.
std::vector<Table> sample(const Corpus& corpus, std::size_t n, uint64_t seed);
std::vector<std::size_t> sample_indices(const Corpus& corpus, std::size_t n, uint64_t seed);

struct DisjointnessReport {
    std::vector<std::string> overlap; // sorted digests present in both corpora

    bool disjoint() const { return overlap.empty(); }
    nlohmann::json to_json() const;
};

/// Content-hash overlap between two corpora; symmetric. In strict mode a
/// non-empty overlap throws DisjointnessViolation.
DisjointnessReport assert_disjoint(const Corpus& a, const Corpus& b, bool strict = false);

/// Corpus index artifact: digests, tag, and source paths, plus the report.
nlohmann::json corpus_index_json(const Corpus& corpus, const IngestReport& report);

} // namespace tabletask
