#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tabletask {

enum class SourceTag { web, database, spreadsheet, external_benchmark };

const char* to_string(SourceTag tag);
SourceTag source_tag_from_string(const std::string& s);

enum class SerializationFormat { Markdown, CSV, JSON };

const char* to_string(SerializationFormat f);
SerializationFormat format_from_string(const std::string& s);

/// Rectangular grid of text cells with optional title. Cells and headers
/// are stored whitespace-trimmed; headers are non-empty. Values are
/// immutable by convention: every operation returns a new table.
struct Table {
    std::optional<std::string> title;
    std::vector<std::string> headers;
    std::vector<std::vector<std::string>> rows;
    SourceTag source_tag = SourceTag::web;

    std::size_t column_count() const { return headers.size(); }
    std::size_t row_count() const { return rows.size(); }

    const std::string& cell(std::size_t row_index, std::size_t col_index) const {
        return rows[row_index][col_index];
    }

    /// Column index for a header name, or UnknownColumn.
    std::size_t column_index(const std::string& name) const;

    /// Content equality: title, headers, and cells. The source tag is
    /// provenance metadata and does not participate.
    friend bool operator==(const Table& a, const Table& b) {
        return a.title == b.title && a.headers == b.headers && a.rows == b.rows;
    }
};

/// 1-based row index plus column name, the two coordinates a model is
/// asked to report for a cell.
struct CellRef {
    std::size_t row_index = 0; // 1-based
    std::string column_name;
};

/// Throws MalformedTable unless rectangular with trimmed, non-empty headers
/// and at least one column.
void validate(const Table& t);

std::string serialize(const Table& t, SerializationFormat f);
Table parse(const std::string& text, SerializationFormat f);

enum class Axis { row, column };

const char* to_string(Axis a);

/// Swap of rows or columns, 1-based indices. Column swaps move the header
/// with its cells.
Table swap(const Table& t, Axis axis, std::size_t i, std::size_t j);

/// Stable sort. Row axis orders rows by the key column; the comparison is
/// numeric when every key cell parses as a number (grouping commas
/// stripped), byte-lexicographic otherwise. Column axis orders columns by
/// header text under the same rule, carrying cells with their header.
Table sort(const Table& t, Axis axis, const std::string& key_column = "");

/// Row or column selection, 1-based indices, original relative order kept.
Table slice(const Table& t, Axis axis, const std::vector<std::size_t>& index_set);

/// Reorders rows by `perm` (0-based positions into the original table).
Table permute_rows(const Table& t, const std::vector<std::size_t>& perm);

/// Reorders columns by `perm`, headers carried with their cells.
Table permute_columns(const Table& t, const std::vector<std::size_t>& perm);

/// Digest over the canonical Markdown serialization, title excluded.
std::string content_hash(const Table& t);

// Serialization helpers shared by the task renderers.
std::string markdown_row(const std::vector<std::string>& cells);
std::string markdown_cell_escape(const std::string& cell);
std::string csv_field(const std::string& cell);

} // namespace tabletask
