#include "tabletask/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <fnmatch.h>

#include "tabletask/errors.hpp"
#include "tabletask/rng.hpp"
#include "tabletask/util.hpp"

namespace fs = std::filesystem;

namespace tabletask {

bool TitleBounds::admits(const std::string& title) const {
    std::size_t n = token_count(title);
    return n >= min_tokens && n <= max_tokens;
}

void CorpusManifest::validate() const {
    if (paths.empty()) throw ConfigError("corpus manifest has no paths");
    if (min_rows > max_rows) throw ConfigError("min_rows > max_rows");
    if (min_columns > max_columns) throw ConfigError("min_columns > max_columns");
    if (title_bounds.min_tokens > title_bounds.max_tokens)
        throw ConfigError("title bounds: min > max");
}

CorpusManifest CorpusManifest::from_json(const nlohmann::json& j) {
    CorpusManifest m;
    if (j.contains("tag")) m.tag = source_tag_from_string(j.at("tag").get<std::string>());
    if (j.contains("paths")) m.paths = j.at("paths").get<std::vector<std::string>>();
    if (j.contains("min_rows")) m.min_rows = j.at("min_rows").get<std::size_t>();
    if (j.contains("max_rows")) m.max_rows = j.at("max_rows").get<std::size_t>();
    if (j.contains("min_columns")) m.min_columns = j.at("min_columns").get<std::size_t>();
    if (j.contains("max_columns")) m.max_columns = j.at("max_columns").get<std::size_t>();
    if (j.contains("title_min_tokens"))
        m.title_bounds.min_tokens = j.at("title_min_tokens").get<std::size_t>();
    if (j.contains("title_max_tokens"))
        m.title_bounds.max_tokens = j.at("title_max_tokens").get<std::size_t>();
    m.validate();
    return m;
}

CorpusManifest CorpusManifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open corpus manifest: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("corpus manifest is not valid JSON: " + path);
    return from_json(j);
}

nlohmann::json CorpusManifest::to_json() const {
    return {{"tag", to_string(tag)},
            {"paths", paths},
            {"min_rows", min_rows},
            {"max_rows", max_rows},
            {"min_columns", min_columns},
            {"max_columns", max_columns},
            {"title_min_tokens", title_bounds.min_tokens},
            {"title_max_tokens", title_bounds.max_tokens}};
}

nlohmann::json IngestReport::to_json() const {
    return {{"scanned", scanned},
            {"accepted", accepted},
            {"rejected_malformed", rejected_malformed},
            {"rejected_size", rejected_size},
            {"deduped", deduped},
            {"near_duplicate_warnings", near_duplicate_warnings},
            {"messages", messages}};
}

bool Corpus::add(Table table, std::string source_path) {
    table.source_tag = tag_;
    std::string digest = content_hash(table);
    if (digest_index_.count(digest)) return false;
    digest_index_.emplace(digest, tables_.size());
    tables_.push_back(std::move(table));
    digests_.push_back(std::move(digest));
    source_paths_.push_back(std::move(source_path));
    return true;
}

const Table* Corpus::find_by_digest(const std::string& digest) const {
    auto it = digest_index_.find(digest);
    return it == digest_index_.end() ? nullptr : &tables_[it->second];
}

std::vector<std::string> Corpus::sorted_digests() const {
    std::vector<std::string> out = digests_;
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

bool has_table_extension(const fs::path& p) {
    std::string ext = to_lower(p.extension().string());
    return ext == ".csv" || ext == ".json" || ext == ".jsonl";
}

// Expands one manifest entry into concrete file paths.
std::vector<std::string> expand_path_entry(const std::string& entry) {
    std::vector<std::string> out;
    std::error_code ec;
    if (fs::is_directory(entry, ec)) {
        for (const auto& de : fs::recursive_directory_iterator(entry, ec)) {
            if (de.is_regular_file() && has_table_extension(de.path()))
                out.push_back(de.path().string());
        }
        return out;
    }
    if (fs::is_regular_file(entry, ec)) {
        out.push_back(entry);
        return out;
    }
    if (entry.find_first_of("*?[") != std::string::npos) {
        fs::path pattern(entry);
        fs::path dir = pattern.parent_path();
        if (dir.empty()) dir = ".";
        // Walk from the deepest wildcard-free directory.
        while (dir.string().find_first_of("*?[") != std::string::npos) dir = dir.parent_path();
        if (dir.empty()) dir = ".";
        if (!fs::is_directory(dir, ec)) return out;
        for (const auto& de : fs::recursive_directory_iterator(dir, ec)) {
            if (!de.is_regular_file()) continue;
            if (fnmatch(entry.c_str(), de.path().string().c_str(), 0) == 0)
                out.push_back(de.path().string());
        }
    }
    return out;
}

struct ParsedUnit {
    std::string path;
    bool ok = false;
    Table table;
    std::string error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MalformedTable("cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// One file may carry one table (.csv/.json) or one per line (.jsonl).
std::vector<ParsedUnit> parse_file_units(const std::string& path) {
    std::vector<ParsedUnit> units;
    std::string ext = to_lower(fs::path(path).extension().string());
    try {
        std::string text = read_file(path);
        if (ext == ".jsonl") {
            auto lines = split(text, '\n');
            std::size_t lineno = 0;
            for (const auto& line : lines) {
                ++lineno;
                if (trim(line).empty()) continue;
                ParsedUnit u;
                u.path = path + ":" + std::to_string(lineno);
                try {
                    u.table = parse(line, SerializationFormat::JSON);
                    u.ok = true;
                } catch (const Error& e) {
                    u.error = e.what();
                }
                units.push_back(std::move(u));
            }
        } else {
            ParsedUnit u;
            u.path = path;
            try {
                u.table = parse(text, ext == ".csv" ? SerializationFormat::CSV
                                                    : SerializationFormat::JSON);
                u.ok = true;
            } catch (const Error& e) {
                u.error = e.what();
            }
            units.push_back(std::move(u));
        }
    } catch (const std::exception& e) {
        ParsedUnit u;
        u.path = path;
        u.error = e.what();
        units.push_back(std::move(u));
    }
    return units;
}

// Warn (never remove) when two tables share headers and one's rows are a
// subset of the other's. Groups are capped to keep this from going
// quadratic on degenerate corpora.
std::size_t near_duplicate_scan(const Corpus& corpus, std::vector<std::string>& messages) {
    constexpr std::size_t kGroupCap = 200;
    std::unordered_map<uint64_t, std::vector<std::size_t>> by_header;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        uint64_t h = fnv1a64(join(corpus.table(i).headers, "\x1f"));
        by_header[h].push_back(i);
    }
    std::size_t warnings = 0;
    for (auto& [h, group] : by_header) {
        if (group.size() < 2 || group.size() > kGroupCap) continue;
        std::vector<std::set<uint64_t>> row_sets(group.size());
        for (std::size_t g = 0; g < group.size(); ++g) {
            for (const auto& row : corpus.table(group[g]).rows)
                row_sets[g].insert(fnv1a64(join(row, "\x1f")));
        }
        for (std::size_t a = 0; a < group.size(); ++a) {
            for (std::size_t b = 0; b < group.size(); ++b) {
                if (a == b) continue;
                if (row_sets[a].size() > row_sets[b].size()) continue;
                if (std::includes(row_sets[b].begin(), row_sets[b].end(),
                                  row_sets[a].begin(), row_sets[a].end())) {
                    ++warnings;
                    if (messages.size() < 20)
                        messages.push_back("near-duplicate: rows of " +
                                           corpus.source_path(group[a]) + " are a subset of " +
                                           corpus.source_path(group[b]));
                    break;
                }
            }
        }
    }
    return warnings;
}

} // namespace

IngestResult ingest(const CorpusManifest& manifest, unsigned jobs) {
    manifest.validate();

    std::vector<std::string> files;
    for (const auto& entry : manifest.paths) {
        auto expanded = expand_path_entry(entry);
        files.insert(files.end(), expanded.begin(), expanded.end());
    }
    std::sort(files.begin(), files.end());
    files.erase(std::unique(files.begin(), files.end()), files.end());
    if (files.empty()) throw NoTablesFound("no table files under the manifest paths");

    // Parse in parallel; merge in sorted-path order so dedup keeps the
    // first occurrence deterministically.
    std::vector<std::vector<ParsedUnit>> parsed(files.size());
    parallel_for(files.size(), jobs,
                 [&](std::size_t i) { parsed[i] = parse_file_units(files[i]); });

    IngestResult result;
    result.corpus = Corpus(manifest.tag, manifest.title_bounds);
    IngestReport& rep = result.report;
    for (auto& units : parsed) {
        for (auto& u : units) {
            ++rep.scanned;
            if (!u.ok) {
                ++rep.rejected_malformed;
                if (rep.messages.size() < 50)
                    rep.messages.push_back(u.path + ": " + u.error);
                continue;
            }
            const Table& t = u.table;
            if (t.column_count() < manifest.min_columns || t.column_count() > manifest.max_columns ||
                t.row_count() < manifest.min_rows || t.row_count() > manifest.max_rows) {
                ++rep.rejected_size;
                continue;
            }
            if (result.corpus.add(std::move(u.table), u.path)) ++rep.accepted;
            else ++rep.deduped;
        }
    }
    if (result.corpus.empty()) throw NoTablesFound("no tables survived ingestion filters");
    rep.near_duplicate_warnings = near_duplicate_scan(result.corpus, rep.messages);
    return result;
}

std::vector<std::size_t> sample_indices(const Corpus& corpus, std::size_t n, uint64_t seed) {
    if (n > corpus.size())
        throw InsufficientTables("requested " + std::to_string(n) + " tables from a corpus of " +
                                 std::to_string(corpus.size()));
    Rng rng(seed);
    return rng.sample_indices(corpus.size(), n);
}

std::vector<Table> sample(const Corpus& corpus, std::size_t n, uint64_t seed) {
    std::vector<Table> out;
    out.reserve(n);
    for (std::size_t i : sample_indices(corpus, n, seed)) out.push_back(corpus.table(i));
    return out;
}

nlohmann::json DisjointnessReport::to_json() const {
    return {{"disjoint", disjoint()}, {"overlap_count", overlap.size()}, {"overlap", overlap}};
}

DisjointnessReport assert_disjoint(const Corpus& a, const Corpus& b, bool strict) {
    const Corpus& small = a.size() <= b.size() ? a : b;
    const Corpus& large = a.size() <= b.size() ? b : a;
    DisjointnessReport report;
    for (std::size_t i = 0; i < small.size(); ++i) {
        if (large.contains_digest(small.digest(i))) report.overlap.push_back(small.digest(i));
    }
    std::sort(report.overlap.begin(), report.overlap.end());
    if (strict && !report.disjoint())
        throw DisjointnessViolation(std::to_string(report.overlap.size()) +
                                    " table(s) shared between corpora");
    return report;
}

nlohmann::json corpus_index_json(const Corpus& corpus, const IngestReport& report) {
    nlohmann::json tables = nlohmann::json::array();
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        nlohmann::json entry = {{"digest", corpus.digest(i)}, {"path", corpus.source_path(i)}};
        if (corpus.table(i).title) entry["title"] = *corpus.table(i).title;
        tables.push_back(std::move(entry));
    }
    return {{"tag", to_string(corpus.tag())},
            {"count", corpus.size()},
            {"tables", tables},
            {"report", report.to_json()}};
}

} // namespace tabletask
