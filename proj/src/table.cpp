#include "tabletask/table.hpp"

#include <algorithm>
#include <numeric>

#include "json.hpp"

#include "tabletask/errors.hpp"
#include "tabletask/util.hpp"

namespace tabletask {

const char* to_string(SourceTag tag) {
    switch (tag) {
        case SourceTag::web: return "web";
        case SourceTag::database: return "database";
        case SourceTag::spreadsheet: return "spreadsheet";
        case SourceTag::external_benchmark: return "external-benchmark";
    }
    return "web";
}

SourceTag source_tag_from_string(const std::string& s) {
    if (s == "web") return SourceTag::web;
    if (s == "database") return SourceTag::database;
    if (s == "spreadsheet") return SourceTag::spreadsheet;
    if (s == "external-benchmark") return SourceTag::external_benchmark;
    throw MalformedTable("unknown source tag '" + s + "'");
}

const char* to_string(SerializationFormat f) {
    switch (f) {
        case SerializationFormat::Markdown: return "markdown";
        case SerializationFormat::CSV: return "csv";
        case SerializationFormat::JSON: return "json";
    }
    return "markdown";
}

SerializationFormat format_from_string(const std::string& s) {
    std::string t = to_lower(s);
    if (t == "markdown" || t == "md") return SerializationFormat::Markdown;
    if (t == "csv") return SerializationFormat::CSV;
    if (t == "json") return SerializationFormat::JSON;
    throw MalformedTable("unknown serialization format '" + s + "'");
}

const char* to_string(Axis a) { return a == Axis::row ? "row" : "column"; }

std::size_t Table::column_index(const std::string& name) const {
    for (std::size_t c = 0; c < headers.size(); ++c)
        if (headers[c] == name) return c;
    throw UnknownColumn("'" + name + "' not in table headers");
}

void validate(const Table& t) {
    if (t.headers.empty()) throw MalformedTable("table has no columns");
    for (const auto& h : t.headers) {
        if (trim(h).empty()) throw MalformedTable("empty header");
        if (trim(h) != h) throw MalformedTable("header not trimmed: '" + h + "'");
    }
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        if (t.rows[r].size() != t.headers.size())
            throw MalformedTable("row " + std::to_string(r + 1) + " has " +
                                 std::to_string(t.rows[r].size()) + " cells, expected " +
                                 std::to_string(t.headers.size()));
    }
}

// ---------------------------------------------------------------------------
// Markdown

std::string markdown_cell_escape(const std::string& cell) {
    std::string out;
    out.reserve(cell.size());
    for (char c : cell) {
        switch (c) {
            case '\\': out += "\\\\"; break;
            case '|': out += "\\|"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out;
}

namespace {

std::string markdown_cell_unescape(const std::string& cell) {
    std::string out;
    out.reserve(cell.size());
    for (std::size_t i = 0; i < cell.size(); ++i) {
        if (cell[i] == '\\' && i + 1 < cell.size()) {
            char n = cell[i + 1];
            if (n == '\\') { out += '\\'; ++i; continue; }
            if (n == '|') { out += '|'; ++i; continue; }
            if (n == 'n') { out += '\n'; ++i; continue; }
            if (n == 'r') { out += '\r'; ++i; continue; }
        }
        out += cell[i];
    }
    return out;
}

// Splits a `| a | b |` line into raw (still escaped) cell texts.
std::vector<std::string> split_markdown_row(const std::string& line) {
    std::size_t b = 0, e = line.size();
    while (b < e && (line[b] == ' ' || line[b] == '\t')) ++b;
    while (e > b && (line[e - 1] == ' ' || line[e - 1] == '\t')) --e;
    if (b >= e || line[b] != '|' || line[e - 1] != '|')
        throw MalformedTable("markdown row must be delimited by '|': " + line);
    std::vector<std::string> cells;
    std::string cur;
    bool escaped = false;
    for (std::size_t i = b + 1; i < e; ++i) {
        char c = line[i];
        if (escaped) {
            cur += c;
            escaped = false;
            continue;
        }
        if (c == '\\') {
            cur += c;
            escaped = true;
            continue;
        }
        if (c == '|') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    // Content between the final '|' pair was already pushed; `cur` holds
    // whatever trailed the last pipe, which must be empty.
    if (!trim(cur).empty()) throw MalformedTable("trailing content after final '|': " + line);
    return cells;
}

bool is_markdown_rule(const std::string& line) {
    std::vector<std::string> cells;
    try {
        cells = split_markdown_row(line);
    } catch (const MalformedTable&) {
        return false;
    }
    if (cells.empty()) return false;
    for (const auto& raw : cells) {
        std::string c = trim(raw);
        if (c.empty()) return false;
        bool dash = false;
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (c[i] == '-') { dash = true; continue; }
            if (c[i] == ':' && (i == 0 || i == c.size() - 1)) continue;
            return false;
        }
        if (!dash) return false;
    }
    return true;
}

std::string serialize_markdown(const Table& t) {
    std::string out = markdown_row(t.headers);
    out += '\n';
    out += '|';
    for (std::size_t c = 0; c < t.headers.size(); ++c) out += "---|";
    for (const auto& row : t.rows) {
        out += '\n';
        out += markdown_row(row);
    }
    return out;
}

Table parse_markdown(const std::string& text) {
    std::vector<std::string> lines;
    for (auto& l : split(text, '\n')) {
        if (!trim(l).empty()) lines.push_back(l);
    }
    if (lines.size() < 2) throw MalformedTable("markdown table needs a header row and a rule row");
    Table t;
    for (const auto& raw : split_markdown_row(lines[0]))
        t.headers.push_back(trim(markdown_cell_unescape(raw)));
    if (!is_markdown_rule(lines[1]))
        throw MalformedTable("missing '---' rule row after the header");
    for (std::size_t i = 2; i < lines.size(); ++i) {
        auto raw = split_markdown_row(lines[i]);
        std::vector<std::string> row;
        row.reserve(t.headers.size());
        for (const auto& cell : raw) row.push_back(trim(markdown_cell_unescape(cell)));
        if (row.size() + 1 == t.headers.size()) {
            // One short is tolerated: a cell was dropped together with its
            // separator, so pad and let the reader align the columns.
            row.emplace_back();
        } else if (row.size() != t.headers.size()) {
            throw MalformedTable("row " + std::to_string(i - 1) + " has " +
                                 std::to_string(raw.size()) + " cells, expected " +
                                 std::to_string(t.headers.size()));
        }
        t.rows.push_back(std::move(row));
    }
    validate(t);
    return t;
}

} // namespace

std::string markdown_row(const std::vector<std::string>& cells) {
    std::string out = "|";
    for (const auto& c : cells) {
        out += ' ';
        out += markdown_cell_escape(c);
        out += " |";
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV (RFC 4180 quoting)

std::string csv_field(const std::string& cell) {
    bool needs_quotes = cell.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quotes) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

namespace {

std::string serialize_csv(const Table& t) {
    std::string out;
    auto emit = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += csv_field(cells[i]);
        }
        out += '\n';
    };
    emit(t.headers);
    for (const auto& row : t.rows) emit(row);
    return out;
}

std::vector<std::vector<std::string>> csv_records(const std::string& text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    bool cur_quoted = false;
    std::size_t i = 0;
    auto end_field = [&] {
        fields.push_back(cur_quoted ? cur : trim(cur));
        cur.clear();
        cur_quoted = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(fields));
        fields.clear();
    };
    while (i < text.size()) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cur += '"';
                    i += 2;
                    continue;
                }
                in_quotes = false;
                ++i;
                continue;
            }
            cur += c;
            ++i;
            continue;
        }
        if (c == '"' && trim(cur).empty()) {
            in_quotes = true;
            cur_quoted = true;
            cur.clear();
            ++i;
            continue;
        }
        if (c == ',') {
            end_field();
            ++i;
            continue;
        }
        if (c == '\r') {
            end_record();
            i += (i + 1 < text.size() && text[i + 1] == '\n') ? 2 : 1;
            continue;
        }
        if (c == '\n') {
            end_record();
            ++i;
            continue;
        }
        cur += c;
        ++i;
    }
    if (in_quotes) throw MalformedTable("unterminated quoted CSV field");
    if (!cur.empty() || !fields.empty()) end_record();
    return records;
}

Table parse_csv(const std::string& text) {
    auto records = csv_records(text);
    if (records.empty()) throw MalformedTable("empty CSV input");
    Table t;
    for (auto& h : records[0]) t.headers.push_back(trim(h));
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != t.headers.size())
            throw MalformedTable("CSV record " + std::to_string(r) + " has " +
                                 std::to_string(records[r].size()) + " fields, expected " +
                                 std::to_string(t.headers.size()));
        std::vector<std::string> row;
        row.reserve(records[r].size());
        for (auto& f : records[r]) row.push_back(trim(f));
        t.rows.push_back(std::move(row));
    }
    validate(t);
    return t;
}

// ---------------------------------------------------------------------------
// JSON

std::string cell_from_json(const nlohmann::json& v) {
    if (v.is_string()) return trim(v.get<std::string>());
    if (v.is_null()) return "";
    return trim(v.dump());
}

std::string serialize_json(const Table& t) {
    nlohmann::json j;
    if (t.title) j["title"] = *t.title;
    j["headers"] = t.headers;
    j["rows"] = t.rows;
    return j.dump();
}

Table parse_json_table(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("headers") || !j.contains("rows"))
        throw MalformedTable("JSON table must be an object with 'headers' and 'rows'");
    Table t;
    if (j.contains("title") && j["title"].is_string()) {
        std::string title = trim(j["title"].get<std::string>());
        if (!title.empty()) t.title = title;
    }
    if (j.contains("source_tag") && j["source_tag"].is_string())
        t.source_tag = source_tag_from_string(j["source_tag"].get<std::string>());
    if (!j["headers"].is_array() || !j["rows"].is_array())
        throw MalformedTable("'headers' and 'rows' must be arrays");
    for (const auto& h : j["headers"]) t.headers.push_back(cell_from_json(h));
    for (const auto& jr : j["rows"]) {
        if (!jr.is_array()) throw MalformedTable("each row must be an array");
        std::vector<std::string> row;
        for (const auto& v : jr) row.push_back(cell_from_json(v));
        t.rows.push_back(std::move(row));
    }
    validate(t);
    return t;
}

Table parse_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw MalformedTable("invalid JSON");
    return parse_json_table(j);
}

} // namespace

std::string serialize(const Table& t, SerializationFormat f) {
    switch (f) {
        case SerializationFormat::Markdown: return serialize_markdown(t);
        case SerializationFormat::CSV: return serialize_csv(t);
        case SerializationFormat::JSON: return serialize_json(t);
    }
    return serialize_markdown(t);
}

Table parse(const std::string& text, SerializationFormat f) {
    if (trim(text).empty()) throw MalformedTable("empty input");
    switch (f) {
        case SerializationFormat::Markdown: return parse_markdown(text);
        case SerializationFormat::CSV: return parse_csv(text);
        case SerializationFormat::JSON: return parse_json(text);
    }
    return parse_markdown(text);
}

// ---------------------------------------------------------------------------
// Elementary operations

namespace {
void check_axis_index(const Table& t, Axis axis, std::size_t i) {
    std::size_t n = axis == Axis::row ? t.row_count() : t.column_count();
    if (i < 1 || i > n)
        throw IndexOutOfRange(std::string(to_string(axis)) + " index " + std::to_string(i) +
                              " outside [1, " + std::to_string(n) + "]");
}
} // namespace

Table swap(const Table& t, Axis axis, std::size_t i, std::size_t j) {
    check_axis_index(t, axis, i);
    check_axis_index(t, axis, j);
    Table out = t;
    if (axis == Axis::row) {
        std::swap(out.rows[i - 1], out.rows[j - 1]);
    } else {
        std::swap(out.headers[i - 1], out.headers[j - 1]);
        for (auto& row : out.rows) std::swap(row[i - 1], row[j - 1]);
    }
    return out;
}

namespace {

// Stable "numeric when everything is numeric" ordering of the given keys;
// returns the permutation to apply.
std::vector<std::size_t> key_order(const std::vector<std::string>& keys) {
    bool all_numeric = !keys.empty();
    std::vector<double> nums(keys.size());
    for (std::size_t i = 0; i < keys.size() && all_numeric; ++i) {
        auto v = parse_number(keys[i]);
        if (!v) all_numeric = false;
        else nums[i] = *v;
    }
    std::vector<std::size_t> perm(keys.size());
    std::iota(perm.begin(), perm.end(), 0);
    if (all_numeric) {
        std::stable_sort(perm.begin(), perm.end(),
                         [&](std::size_t a, std::size_t b) { return nums[a] < nums[b]; });
    } else {
        std::stable_sort(perm.begin(), perm.end(),
                         [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    }
    return perm;
}

} // namespace

Table sort(const Table& t, Axis axis, const std::string& key_column) {
    Table out = t;
    if (axis == Axis::row) {
        std::size_t c = t.column_index(key_column);
        std::vector<std::string> keys;
        keys.reserve(t.row_count());
        for (const auto& row : t.rows) keys.push_back(row[c]);
        auto perm = key_order(keys);
        out.rows.clear();
        out.rows.reserve(t.row_count());
        for (std::size_t i : perm) out.rows.push_back(t.rows[i]);
    } else {
        auto perm = key_order(t.headers);
        out.headers.clear();
        for (std::size_t i : perm) out.headers.push_back(t.headers[i]);
        for (std::size_t r = 0; r < t.rows.size(); ++r) {
            out.rows[r].clear();
            for (std::size_t i : perm) out.rows[r].push_back(t.rows[r][i]);
        }
    }
    return out;
}

Table slice(const Table& t, Axis axis, const std::vector<std::size_t>& index_set) {
    if (index_set.empty()) throw EmptySelection("index set is empty");
    std::vector<std::size_t> idx = index_set;
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    for (std::size_t i : idx) check_axis_index(t, axis, i);
    Table out;
    out.title = t.title;
    out.source_tag = t.source_tag;
    if (axis == Axis::row) {
        out.headers = t.headers;
        for (std::size_t i : idx) out.rows.push_back(t.rows[i - 1]);
    } else {
        for (std::size_t i : idx) out.headers.push_back(t.headers[i - 1]);
        for (const auto& row : t.rows) {
            std::vector<std::string> r;
            r.reserve(idx.size());
            for (std::size_t i : idx) r.push_back(row[i - 1]);
            out.rows.push_back(std::move(r));
        }
    }
    return out;
}

namespace {
void check_permutation(std::size_t n, const std::vector<std::size_t>& perm) {
    if (perm.size() != n) throw IndexOutOfRange("permutation length mismatch");
    std::vector<bool> seen(n, false);
    for (std::size_t p : perm) {
        if (p >= n || seen[p]) throw IndexOutOfRange("not a permutation");
        seen[p] = true;
    }
}
} // namespace

Table permute_rows(const Table& t, const std::vector<std::size_t>& perm) {
    check_permutation(t.row_count(), perm);
    Table out = t;
    out.rows.clear();
    out.rows.reserve(t.row_count());
    for (std::size_t p : perm) out.rows.push_back(t.rows[p]);
    return out;
}

Table permute_columns(const Table& t, const std::vector<std::size_t>& perm) {
    check_permutation(t.column_count(), perm);
    Table out = t;
    out.headers.clear();
    for (std::size_t p : perm) out.headers.push_back(t.headers[p]);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        out.rows[r].clear();
        for (std::size_t p : perm) out.rows[r].push_back(t.rows[r][p]);
    }
    return out;
}

std::string content_hash(const Table& t) {
    // Canonical form: Markdown, which never carries the title.
    return sha256_hex(serialize_markdown(t));
}

} // namespace tabletask
