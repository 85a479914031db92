#include "tabletask/synth.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "tabletask/errors.hpp"
#include "tabletask/instructions.hpp"
#include "tabletask/typo.hpp"
#include "tabletask/util.hpp"

namespace tabletask {

const char* to_string(MvVariant v) { return v == MvVariant::with_sep ? "with_sep" : "no_sep"; }
const char* to_string(MvQuestion q) { return q == MvQuestion::column ? "column" : "row"; }

MvVariant mv_variant_from_string(const std::string& s) {
    if (s == "with_sep") return MvVariant::with_sep;
    if (s == "no_sep") return MvVariant::no_sep;
    throw ConfigError("unknown missing-value variant '" + s + "'");
}

MvQuestion mv_question_from_string(const std::string& s) {
    if (s == "column") return MvQuestion::column;
    if (s == "row") return MvQuestion::row;
    throw ConfigError("unknown missing-value question '" + s + "'");
}

namespace {

Table strip_title(const Table& t) {
    Table out = t;
    out.title.reset();
    return out;
}

TaskInstance base_instance(TaskType type, const Table& source, uint64_t seed) {
    TaskInstance inst;
    inst.type = type;
    inst.seed = seed;
    inst.source_digest = content_hash(source);
    return inst;
}

void set_canonical_instruction(TaskInstance& inst) {
    inst.instruction = canonical_instruction(inst.type, inst.slots);
}

Completion json_completion(CompletionKind kind, nlohmann::json answer, std::string schema) {
    Completion c;
    c.kind = kind;
    c.answer = std::move(answer);
    c.body = c.answer.dump();
    c.answer_schema = std::move(schema);
    return c;
}

Completion table_completion(const Table& t) {
    Completion c;
    c.kind = CompletionKind::table;
    c.body = serialize(t, SerializationFormat::Markdown);
    c.answer = {{"headers", t.headers}, {"rows", t.rows}};
    c.answer_schema = "markdown table";
    return c;
}

Completion text_completion(std::string body) {
    Completion c;
    c.kind = CompletionKind::text;
    c.body = std::move(body);
    c.answer_schema = "plain text";
    return c;
}

void require_no_empty_cells(const Table& t) {
    for (const auto& row : t.rows)
        for (const auto& cell : row)
            if (cell.empty()) throw NoEligibleCell("table already has empty cells");
    if (t.rows.empty()) throw NoEligibleCell("table has no rows");
}

bool has_empty_cell(const Table& t) {
    for (const auto& row : t.rows)
        for (const auto& cell : row)
            if (cell.empty()) return true;
    return false;
}

std::string ordinal(std::size_t n) {
    std::string s = std::to_string(n);
    if (n % 100 >= 11 && n % 100 <= 13) return s + "th";
    switch (n % 10) {
        case 1: return s + "st";
        case 2: return s + "nd";
        case 3: return s + "rd";
        default: return s + "th";
    }
}

bool header_is_unique(const Table& t, std::size_t c) {
    return std::count(t.headers.begin(), t.headers.end(), t.headers[c]) == 1;
}

// Columns are referenced by header name in instructions, falling back to a
// positional phrase when the header is duplicated.
std::string column_phrase(const Table& t, std::size_t c /*0-based*/) {
    if (header_is_unique(t, c)) return "column \"" + t.headers[c] + "\"";
    return "the " + ordinal(c + 1) + " column";
}

std::string row_phrase(std::size_t i /*1-based*/) { return "row " + std::to_string(i); }

std::string targets_phrase(const Table& t, Axis axis, const std::vector<std::size_t>& idx) {
    std::vector<std::string> parts;
    for (std::size_t i : idx) {
        if (axis == Axis::row) parts.push_back(std::to_string(i));
        else parts.push_back(column_phrase(t, i - 1));
    }
    std::string joined;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) joined += (i + 1 == parts.size()) ? " and " : ", ";
        joined += parts[i];
    }
    if (axis == Axis::row)
        return (idx.size() == 1 ? "row " : "rows ") + joined;
    return joined; // column phrases already carry the word "column"
}

Axis choose_axis(const Table& t, std::optional<Axis> fixed, Rng& rng, bool column_needs_two) {
    bool row_ok = t.row_count() >= 2;
    bool col_ok = column_needs_two ? t.column_count() >= 2 : t.column_count() >= 1;
    if (fixed) {
        bool ok = *fixed == Axis::row ? row_ok : col_ok;
        if (!ok)
            throw AxisTooSmall(std::string("axis '") + to_string(*fixed) +
                               "' has fewer than 2 elements");
        return *fixed;
    }
    if (row_ok && col_ok) return rng.chance(0.5) ? Axis::row : Axis::column;
    if (row_ok) return Axis::row;
    if (col_ok) return Axis::column;
    throw AxisTooSmall("table has neither 2 rows nor 2 columns");
}

} // namespace

// ---------------------------------------------------------------------------
// T-1 missing-value identification

TaskInstance synth_missing_value(const Table& t, MvVariant variant, MvQuestion asked,
                                 uint64_t seed) {
    validate(t);
    require_no_empty_cells(t);
    TaskInstance inst = base_instance(TaskType::MV, t, seed);
    Rng rng(seed);
    std::size_t u = rng.index(t.row_count() * t.column_count());
    std::size_t r = u / t.column_count();
    std::size_t c = u % t.column_count();

    Table input = strip_title(t);
    input.rows[r][c] = "";
    inst.input.tables = {input};
    if (variant == MvVariant::no_sep)
        inst.input.drop_separator_at = CellRef{r + 1, t.headers[c]};

    inst.slots["target"] = asked == MvQuestion::column ? "column-header" : "row-id";
    nlohmann::json answer = asked == MvQuestion::column
                                ? nlohmann::json{{"column", t.headers[c]}}
                                : nlohmann::json{{"row_id", r + 1}};
    inst.completion = json_completion(
        CompletionKind::cellref, std::move(answer),
        asked == MvQuestion::column ? R"({"column": "<column header>"})"
                                    : R"({"row_id": <1-based row number>})");
    inst.params = {{"variant", to_string(variant)},
                   {"question", to_string(asked)},
                   {"row_index", r + 1},
                   {"column_name", t.headers[c]},
                   {"removed_value", t.cell(r, c)}};
    set_canonical_instruction(inst);
    return inst;
}

// ---------------------------------------------------------------------------
// T-2 column finding

TaskInstance synth_column_finding(const Table& t, uint64_t seed) {
    validate(t);
    if (t.rows.empty()) throw NoEligibleCell("table has no rows");
    std::map<std::string, std::size_t> counts;
    for (const auto& row : t.rows)
        for (const auto& cell : row)
            if (!cell.empty()) ++counts[cell];
    std::vector<std::pair<std::size_t, std::size_t>> unique_cells; // (r, c)
    for (std::size_t r = 0; r < t.row_count(); ++r)
        for (std::size_t c = 0; c < t.column_count(); ++c) {
            const auto& v = t.cell(r, c);
            if (!v.empty() && counts[v] == 1) unique_cells.emplace_back(r, c);
        }
    if (unique_cells.empty())
        throw NoUniqueValue("no cell value occurs exactly once in the table");

    TaskInstance inst = base_instance(TaskType::CF, t, seed);
    Rng rng(seed);
    auto [r, c] = unique_cells[rng.index(unique_cells.size())];
    inst.input.tables = {strip_title(t)};
    inst.slots["value"] = t.cell(r, c);
    inst.completion = json_completion(CompletionKind::cellref,
                                      {{"column", t.headers[c]}},
                                      R"({"column": "<column header>"})");
    inst.params = {{"row_index", r + 1},
                   {"column_name", t.headers[c]},
                   {"value", t.cell(r, c)}};
    set_canonical_instruction(inst);
    return inst;
}

// ---------------------------------------------------------------------------
// T-13 table summarization

TaskInstance synth_table_summarization(const Table& t, const TitleBounds& bounds) {
    validate(t);
    if (!t.title || trim(*t.title).empty()) throw MissingTitle("table has no title");
    if (!bounds.admits(*t.title))
        throw TitleLengthOutOfBounds("title has " + std::to_string(token_count(*t.title)) +
                                     " tokens, bounds [" + std::to_string(bounds.min_tokens) +
                                     ", " + std::to_string(bounds.max_tokens) + "]");
    TaskInstance inst = base_instance(TaskType::TS, t, 0);
    inst.input.tables = {strip_title(t)};
    inst.completion = text_completion(*t.title);
    inst.params = {{"title", *t.title}};
    set_canonical_instruction(inst);
    return inst;
}

// ---------------------------------------------------------------------------
// T-14 / T-15 column and row augmentation

TaskInstance synth_column_augmentation(const Table& t, std::size_t k, uint64_t seed) {
    validate(t);
    if (k < 1 || k >= t.column_count())
        throw InvalidK("k=" + std::to_string(k) + " outside [1, " +
                       std::to_string(t.column_count() ? t.column_count() - 1 : 0) + "]");
    Table base = strip_title(t);
    std::vector<std::size_t> first_k(k);
    for (std::size_t i = 0; i < k; ++i) first_k[i] = i + 1;
    TaskInstance inst = base_instance(TaskType::CA, t, seed);
    inst.input.tables = {slice(base, Axis::column, first_k)};
    inst.completion = table_completion(slice(base, Axis::column, {k + 1}));
    inst.params = {{"k", k}};
    set_canonical_instruction(inst);
    return inst;
}

TaskInstance synth_row_augmentation(const Table& t, std::size_t k, uint64_t seed) {
    validate(t);
    if (k < 1 || k >= t.row_count())
        throw InvalidK("k=" + std::to_string(k) + " outside [1, " +
                       std::to_string(t.row_count() ? t.row_count() - 1 : 0) + "]");
    Table base = strip_title(t);
    std::vector<std::size_t> first_k(k);
    for (std::size_t i = 0; i < k; ++i) first_k[i] = i + 1;
    TaskInstance inst = base_instance(TaskType::RA, t, seed);
    inst.input.tables = {slice(base, Axis::row, first_k)};
    inst.completion = table_completion(slice(base, Axis::row, {k + 1}));
    inst.params = {{"k", k}};
    set_canonical_instruction(inst);
    return inst;
}

// ---------------------------------------------------------------------------
// T-16 / T-17 / T-18 swap, filter, sort

TaskInstance synth_swap(const Table& t, std::optional<Axis> axis, uint64_t seed) {
    validate(t);
    TaskInstance inst = base_instance(TaskType::RCSW, t, seed);
    Rng rng(seed);
    Axis a = choose_axis(t, axis, rng, true);
    std::size_t n = a == Axis::row ? t.row_count() : t.column_count();
    if (n < 2) throw AxisTooSmall("need at least 2 elements to swap");
    std::size_t i = rng.index(n) + 1;
    std::size_t j = rng.index(n - 1) + 1;
    if (j >= i) ++j;
    if (i > j) std::swap(i, j);

    Table input = strip_title(t);
    inst.input.tables = {input};
    inst.completion = table_completion(swap(input, a, i, j));
    inst.slots["axis"] = to_string(a);
    inst.slots["first"] = a == Axis::row ? row_phrase(i) : column_phrase(input, i - 1);
    inst.slots["second"] = a == Axis::row ? row_phrase(j) : column_phrase(input, j - 1);
    inst.params = {{"axis", to_string(a)}, {"i", i}, {"j", j}};
    set_canonical_instruction(inst);
    return inst;
}

TaskInstance synth_filter(const Table& t, std::optional<Axis> axis, uint64_t seed) {
    validate(t);
    TaskInstance inst = base_instance(TaskType::RCF, t, seed);
    Rng rng(seed);
    Axis a = choose_axis(t, axis, rng, true);
    std::size_t n = a == Axis::row ? t.row_count() : t.column_count();
    if (n < 2) throw AxisTooSmall("need at least 2 elements to filter");
    std::size_t s = static_cast<std::size_t>(rng.between(1, n - 1));
    auto picked = rng.sample_indices(n, s);
    std::vector<std::size_t> indices;
    for (std::size_t p : picked) indices.push_back(p + 1);
    std::sort(indices.begin(), indices.end());

    Table input = strip_title(t);
    inst.input.tables = {input};
    inst.completion = table_completion(slice(input, a, indices));
    inst.slots["axis"] = to_string(a);
    inst.slots["targets"] = targets_phrase(input, a, indices);
    inst.params = {{"axis", to_string(a)}, {"indices", indices}};
    set_canonical_instruction(inst);
    return inst;
}

TaskInstance synth_sort(const Table& t, std::optional<Axis> axis, uint64_t seed) {
    validate(t);
    TaskInstance inst = base_instance(TaskType::RCS, t, seed);
    Rng rng(seed);
    Axis a = choose_axis(t, axis, rng, true);
    Table input = strip_title(t);
    inst.input.tables = {input};
    if (a == Axis::row) {
        if (t.row_count() < 2) throw AxisTooSmall("need at least 2 rows to sort");
        // Pick among first occurrences so the named column is the one the
        // comparator actually uses when headers repeat.
        std::vector<std::size_t> candidates;
        for (std::size_t c = 0; c < t.column_count(); ++c)
            if (t.column_index(t.headers[c]) == c) candidates.push_back(c);
        std::size_t c = candidates[rng.index(candidates.size())];
        const std::string& key = t.headers[c];
        inst.completion = table_completion(sort(input, Axis::row, key));
        inst.slots["key"] = "the rows by the values in column \"" + key + "\"";
        inst.params = {{"axis", "row"}, {"key_column", key}};
    } else {
        if (t.column_count() < 2) throw AxisTooSmall("need at least 2 columns to sort");
        inst.completion = table_completion(sort(input, Axis::column));
        inst.slots["key"] = "the columns by their header names";
        inst.params = {{"axis", "column"}, {"key_column", ""}};
    }
    inst.slots["axis"] = to_string(a);
    set_canonical_instruction(inst);
    return inst;
}

// ---------------------------------------------------------------------------
// T-11 head-value matching

TaskInstance synth_head_value_matching(const Table& t, uint64_t seed) {
    validate(t);
    if (t.rows.empty()) throw NoEligibleCell("table has no rows");
    TaskInstance inst = base_instance(TaskType::HVM, t, seed);
    Rng rng(seed);
    std::vector<std::string> shuffled = t.headers;
    rng.shuffle(shuffled);

    Table input = strip_title(t);
    inst.input.tables = {input};
    inst.input.headerless = true;
    std::vector<std::string> quoted;
    for (const auto& h : shuffled) quoted.push_back("\"" + h + "\"");
    inst.slots["headers"] = join(quoted, ", ");
    inst.completion = table_completion(input);
    inst.params = {{"shuffled_headers", shuffled}};
    set_canonical_instruction(inst);
    return inst;
}

// ---------------------------------------------------------------------------
// T-5 row-to-row transformation

TaskInstance synth_row_to_row_transform(const Table& t, const ProgramLibrary& library,
                                        uint64_t seed) {
    validate(t);
    if (t.row_count() < 2)
        throw NoApplicableProgram("need at least 2 rows to demonstrate a transformation");
    TaskInstance inst = base_instance(TaskType::R2R, t, seed);
    Rng rng(seed);
    ProgramApplication app = library.find_application(t, rng);
    auto derived = library.materialize(t, app);
    if (!derived) throw NoApplicableProgram("program stopped being total during materialization");
    std::string out_header = library.output_header(t, app);

    Table augmented = strip_title(t);
    augmented.headers.push_back(out_header);
    for (std::size_t r = 0; r < augmented.rows.size(); ++r)
        augmented.rows[r].push_back((*derived)[r]);

    std::size_t blank_row = rng.index(t.row_count());
    std::string v = (*derived)[blank_row];
    augmented.rows[blank_row].back() = "";

    inst.input.tables = {augmented};
    inst.completion = json_completion(CompletionKind::value, {{"value", v}},
                                      R"({"value": "<missing value>"})");
    inst.params = {{"program", app.to_json()},
                   {"row_index", blank_row + 1},
                   {"output_column", out_header},
                   {"value", v}};
    set_canonical_instruction(inst);
    return inst;
}

// ---------------------------------------------------------------------------
// T-7 schema matching

TaskInstance synth_schema_matching(const Table& t, std::size_t k,
                                   const HeaderParaphraser& paraphraser, uint64_t seed) {
    validate(t);
    TaskInstance inst = base_instance(TaskType::SM, t, seed);
    Rng rng(seed);
    if (k == 0) {
        std::size_t kmax = t.row_count() / 2;
        if (kmax < 1) throw TooFewRows("need at least 2 rows for schema matching");
        k = static_cast<std::size_t>(rng.between(1, kmax));
    }
    if (t.row_count() < 2 * k)
        throw TooFewRows("need at least " + std::to_string(2 * k) + " rows, have " +
                         std::to_string(t.row_count()));

    HeaderParaphraseMap mapping = paraphraser.paraphrase_headers(t.headers, rng);

    Table base = strip_title(t);
    std::vector<std::size_t> first(k), second(k);
    for (std::size_t i = 0; i < k; ++i) {
        first[i] = i + 1;
        second[i] = k + i + 1;
    }
    Table t1 = slice(base, Axis::row, first);
    Table t2 = slice(base, Axis::row, second);
    for (std::size_t c = 0; c < t2.headers.size(); ++c) t2.headers[c] = mapping[c].second;

    std::vector<std::size_t> perm1(t1.column_count()), perm2(t2.column_count());
    for (std::size_t i = 0; i < perm1.size(); ++i) perm1[i] = i;
    for (std::size_t i = 0; i < perm2.size(); ++i) perm2[i] = i;
    rng.shuffle(perm1);
    rng.shuffle(perm2);
    t1 = permute_columns(t1, perm1);
    t2 = permute_columns(t2, perm2);

    inst.input.tables = {t1, t2};
    nlohmann::json m = nlohmann::json::object();
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& [orig, para] : mapping) {
        m[orig] = para;
        pairs.push_back({orig, para});
    }
    inst.completion = json_completion(
        CompletionKind::mapping, {{"mapping", m}},
        R"({"mapping": {"<table 1 header>": "<table 2 header>", ...}})");
    inst.params = {{"k", k}, {"pairs", pairs}};
    set_canonical_instruction(inst);
    return inst;
}

// ---------------------------------------------------------------------------
// T-8 data imputation

TaskInstance synth_data_imputation(const Table& t, uint64_t seed) {
    validate(t);
    require_no_empty_cells(t);
    TaskInstance inst = base_instance(TaskType::DI, t, seed);
    Rng rng(seed);
    std::size_t u = rng.index(t.row_count() * t.column_count());
    std::size_t r = u / t.column_count();
    std::size_t c = u % t.column_count();
    std::string v = t.cell(r, c);

    Table input = strip_title(t);
    input.rows[r][c] = "";
    inst.input.tables = {input};
    inst.completion = json_completion(CompletionKind::value, {{"value", v}},
                                      R"({"value": "<missing value>"})");
    inst.params = {{"row_index", r + 1},
                   {"column_name", t.headers[c]},
                   {"removed_value", v}};
    set_canonical_instruction(inst);
    return inst;
}

// ---------------------------------------------------------------------------
// T-9 error detection

namespace {
bool value_in_table(const Table& t, const std::string& v) {
    for (const auto& row : t.rows)
        for (const auto& cell : row)
            if (cell == v) return true;
    return false;
}
} // namespace

TaskInstance synth_error_detection(const Table& t, uint64_t seed) {
    validate(t);
    std::vector<std::pair<std::size_t, std::size_t>> eligible_cells;
    for (std::size_t r = 0; r < t.row_count(); ++r)
        for (std::size_t c = 0; c < t.column_count(); ++c)
            if (typo_eligible(t.cell(r, c))) eligible_cells.emplace_back(r, c);
    if (eligible_cells.empty())
        throw NoEligibleCell("no cell with enough alphabetic characters to corrupt");

    TaskInstance inst = base_instance(TaskType::ED, t, seed);
    Rng rng(seed);
    rng.shuffle(eligible_cells);
    for (auto [r, c] : eligible_cells) {
        const std::string& v = t.cell(r, c);
        for (int attempt = 0; attempt < 16; ++attempt) {
            auto corrupted = inject_typo(v, rng);
            if (!corrupted || value_in_table(t, *corrupted)) continue;
            Table input = strip_title(t);
            input.rows[r][c] = *corrupted;
            inst.input.tables = {input};
            inst.completion =
                json_completion(CompletionKind::value, {{"erroneous_cell", *corrupted}},
                                R"({"erroneous_cell": "<cell value>"})");
            inst.params = {{"row_index", r + 1},
                           {"column_name", t.headers[c]},
                           {"corrupted", *corrupted},
                           {"correction", v}};
            set_canonical_instruction(inst);
            return inst;
        }
    }
    throw NoEligibleCell("could not inject a typo distinct from every existing cell");
}

// ---------------------------------------------------------------------------
// T-10 list extraction

std::string list_form(const Table& t, bool include_headers) {
    std::vector<std::string> lines;
    if (include_headers) lines.push_back(join(t.headers, " "));
    for (const auto& row : t.rows) lines.push_back(join(row, " "));
    return join(lines, "\n");
}

namespace {
bool resegmentable(const Table& t, bool include_headers) {
    auto line_ok = [&](const std::vector<std::string>& cells) {
        auto tokens = split_ws(join(cells, " "));
        return tokens == cells;
    };
    if (include_headers && !line_ok(t.headers)) return false;
    for (const auto& row : t.rows)
        if (!line_ok(row)) return false;
    return true;
}
} // namespace

TaskInstance synth_list_extraction(const Table& t, uint64_t seed, bool include_headers) {
    validate(t);
    if (t.rows.empty()) throw NoEligibleCell("table has no rows");
    TaskInstance inst = base_instance(TaskType::LE, t, seed);
    Table base = strip_title(t);
    inst.input.list_text = list_form(base, include_headers);
    bool ambiguous = !resegmentable(base, include_headers);
    inst.completion = table_completion(base);
    inst.slots["num_cols"] = std::to_string(t.column_count());
    inst.params = {{"include_headers", include_headers},
                   {"ambiguous", ambiguous},
                   {"num_cols", t.column_count()}};
    set_canonical_instruction(inst);
    return inst;
}

// ---------------------------------------------------------------------------
// Dispatch, eligibility, verification

TaskInstance synthesize(TaskType type, const Table& t, uint64_t seed, const SynthContext& ctx,
                        const nlohmann::json& fixed_params) {
    // Knob choices draw from a separate stream so they replay identically
    // whether sampled here or pinned by fixed_params.
    Rng knobs(seed ^ 0x5bd1e995u);
    switch (type) {
        case TaskType::MV: {
            MvVariant variant =
                fixed_params.contains("variant")
                    ? mv_variant_from_string(fixed_params["variant"].get<std::string>())
                    : (knobs.chance(0.5) ? MvVariant::with_sep : MvVariant::no_sep);
            MvQuestion asked =
                fixed_params.contains("question")
                    ? mv_question_from_string(fixed_params["question"].get<std::string>())
                    : (knobs.chance(0.5) ? MvQuestion::column : MvQuestion::row);
            return synth_missing_value(t, variant, asked, seed);
        }
        case TaskType::CF: return synth_column_finding(t, seed);
        case TaskType::TS: return synth_table_summarization(t, ctx.title_bounds);
        case TaskType::CA: {
            if (t.column_count() < 2) throw InvalidK("need at least 2 columns");
            std::size_t k = fixed_params.contains("k")
                                ? fixed_params["k"].get<std::size_t>()
                                : static_cast<std::size_t>(knobs.between(1, t.column_count() - 1));
            k = std::min(k, t.column_count() - 1);
            return synth_column_augmentation(t, k, seed);
        }
        case TaskType::RA: {
            if (t.row_count() < 2) throw InvalidK("need at least 2 rows");
            std::size_t k = fixed_params.contains("k")
                                ? fixed_params["k"].get<std::size_t>()
                                : static_cast<std::size_t>(knobs.between(1, t.row_count() - 1));
            k = std::min(k, t.row_count() - 1);
            return synth_row_augmentation(t, k, seed);
        }
        case TaskType::RCSW:
        case TaskType::RCF:
        case TaskType::RCS: {
            std::optional<Axis> axis;
            if (fixed_params.contains("axis"))
                axis = fixed_params["axis"] == "row" ? Axis::row : Axis::column;
            if (type == TaskType::RCSW) return synth_swap(t, axis, seed);
            if (type == TaskType::RCF) return synth_filter(t, axis, seed);
            return synth_sort(t, axis, seed);
        }
        case TaskType::HVM: return synth_head_value_matching(t, seed);
        case TaskType::R2R: return synth_row_to_row_transform(t, *ctx.programs, seed);
        case TaskType::SM: {
            std::size_t k = fixed_params.value("k", std::size_t{0});
            if (k * 2 > t.row_count()) k = 0;
            return synth_schema_matching(t, k, *ctx.paraphraser, seed);
        }
        case TaskType::DI: return synth_data_imputation(t, seed);
        case TaskType::ED: return synth_error_detection(t, seed);
        case TaskType::LE: return synth_list_extraction(t, seed, ctx.le_include_headers);
        case TaskType::TQA:
        case TaskType::CTA:
        case TaskType::EM:
        case TaskType::NS:
            throw ConfigError(std::string(to_string(type)) +
                              " instances come from benchmark manifests, not synthesis");
    }
    throw ConfigError("unhandled task type");
}

bool eligible(TaskType type, const Table& t, const SynthContext& ctx) {
    if (t.headers.empty() || t.rows.empty()) return false;
    std::size_t rows = t.row_count(), cols = t.column_count();
    switch (type) {
        case TaskType::MV:
        case TaskType::DI: return !has_empty_cell(t);
        case TaskType::CF: {
            std::map<std::string, std::size_t> counts;
            for (const auto& row : t.rows)
                for (const auto& cell : row)
                    if (!cell.empty()) ++counts[cell];
            for (const auto& [v, n] : counts)
                if (n == 1) return true;
            return false;
        }
        case TaskType::TS: return t.title && ctx.title_bounds.admits(*t.title);
        case TaskType::CA: return cols >= 2;
        case TaskType::RA: return rows >= 2;
        case TaskType::RCSW:
        case TaskType::RCF:
        case TaskType::RCS: return rows >= 2 || cols >= 2;
        case TaskType::HVM: return cols >= 2;
        case TaskType::R2R: {
            if (rows < 2) return false;
            Rng probe(fnv1a64(content_hash(t)));
            try {
                ctx.programs->find_application(t, probe);
                return true;
            } catch (const NoApplicableProgram&) {
                return false;
            }
        }
        case TaskType::SM: {
            if (rows < 2) return false;
            Rng probe(fnv1a64(content_hash(t)));
            try {
                ctx.paraphraser->paraphrase_headers(t.headers, probe);
                return true;
            } catch (const ParaphraseFailure&) {
                return false;
            }
        }
        case TaskType::ED:
            for (const auto& row : t.rows)
                for (const auto& cell : row)
                    if (typo_eligible(cell)) return true;
            return false;
        case TaskType::LE: return true;
        case TaskType::TQA:
        case TaskType::CTA:
        case TaskType::EM:
        case TaskType::NS: return false;
    }
    return false;
}

namespace {

std::vector<std::pair<std::size_t, std::size_t>> blank_cells(const Table& t) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t r = 0; r < t.row_count(); ++r)
        for (std::size_t c = 0; c < t.column_count(); ++c)
            if (t.cell(r, c).empty()) out.emplace_back(r, c);
    return out;
}

bool single_blank_matches(const TaskInstance& inst) {
    const Table& input = inst.input.tables.at(0);
    auto blanks = blank_cells(input);
    if (blanks.size() != 1) return false;
    auto [r, c] = blanks[0];
    if (r + 1 != inst.params.at("row_index").get<std::size_t>()) return false;
    return input.headers[c] == inst.params.at("column_name").get<std::string>();
}

std::vector<std::vector<std::string>> columns_of(const Table& t) {
    std::vector<std::vector<std::string>> cols(t.column_count());
    for (std::size_t c = 0; c < t.column_count(); ++c)
        for (const auto& row : t.rows) cols[c].push_back(row[c]);
    return cols;
}

bool verify_impl(const TaskInstance& inst, const Table* source) {
    const auto& params = inst.params;
    switch (inst.type) {
        case TaskType::MV: {
            if (!single_blank_matches(inst)) return false;
            if (params.at("question") == "column")
                return inst.completion.answer.at("column") == params.at("column_name");
            return inst.completion.answer.at("row_id") == params.at("row_index");
        }
        case TaskType::CF: {
            const Table& input = inst.input.tables.at(0);
            const std::string v = params.at("value").get<std::string>();
            std::size_t count = 0;
            std::string col;
            for (std::size_t r = 0; r < input.row_count(); ++r)
                for (std::size_t c = 0; c < input.column_count(); ++c)
                    if (input.cell(r, c) == v) {
                        ++count;
                        col = input.headers[c];
                    }
            return count == 1 && inst.completion.answer.at("column") == col;
        }
        case TaskType::TS:
            return !inst.completion.body.empty() &&
                   inst.completion.body == params.at("title").get<std::string>();
        case TaskType::CA: {
            const Table& input = inst.input.tables.at(0);
            Table comp = parse(inst.completion.body, SerializationFormat::Markdown);
            if (comp.column_count() != 1 || comp.row_count() != input.row_count()) return false;
            if (!source) return true;
            std::size_t k = params.at("k").get<std::size_t>();
            std::vector<std::size_t> first_k(k);
            for (std::size_t i = 0; i < k; ++i) first_k[i] = i + 1;
            return input == slice(strip_title(*source), Axis::column, first_k) &&
                   comp == slice(strip_title(*source), Axis::column, {k + 1});
        }
        case TaskType::RA: {
            const Table& input = inst.input.tables.at(0);
            Table comp = parse(inst.completion.body, SerializationFormat::Markdown);
            if (comp.row_count() != 1 || comp.headers != input.headers) return false;
            if (!source) return true;
            std::size_t k = params.at("k").get<std::size_t>();
            std::vector<std::size_t> first_k(k);
            for (std::size_t i = 0; i < k; ++i) first_k[i] = i + 1;
            return input == slice(strip_title(*source), Axis::row, first_k) &&
                   comp == slice(strip_title(*source), Axis::row, {k + 1});
        }
        case TaskType::RCSW: {
            const Table& input = inst.input.tables.at(0);
            Table comp = parse(inst.completion.body, SerializationFormat::Markdown);
            Axis a = params.at("axis") == "row" ? Axis::row : Axis::column;
            return swap(comp, a, params.at("i").get<std::size_t>(),
                        params.at("j").get<std::size_t>()) == input;
        }
        case TaskType::RCF: {
            const Table& input = inst.input.tables.at(0);
            Table comp = parse(inst.completion.body, SerializationFormat::Markdown);
            Axis a = params.at("axis") == "row" ? Axis::row : Axis::column;
            auto indices = params.at("indices").get<std::vector<std::size_t>>();
            return slice(input, a, indices) == comp;
        }
        case TaskType::RCS: {
            const Table& input = inst.input.tables.at(0);
            Table comp = parse(inst.completion.body, SerializationFormat::Markdown);
            Axis a = params.at("axis") == "row" ? Axis::row : Axis::column;
            return sort(input, a, params.at("key_column").get<std::string>()) == comp;
        }
        case TaskType::HVM: {
            const Table& input = inst.input.tables.at(0);
            Table comp = parse(inst.completion.body, SerializationFormat::Markdown);
            auto shuffled = params.at("shuffled_headers").get<std::vector<std::string>>();
            auto sorted_a = comp.headers;
            auto sorted_b = shuffled;
            std::sort(sorted_a.begin(), sorted_a.end());
            std::sort(sorted_b.begin(), sorted_b.end());
            if (sorted_a != sorted_b) return false;
            // Column contents must agree as a multiset: a header-only task
            // never edits cells, and column order may have been permuted.
            auto cols_in = columns_of(input);
            auto cols_out = columns_of(comp);
            std::sort(cols_in.begin(), cols_in.end());
            std::sort(cols_out.begin(), cols_out.end());
            return cols_in == cols_out;
        }
        case TaskType::R2R: {
            const Table& input = inst.input.tables.at(0);
            ProgramApplication app = ProgramApplication::from_json(params.at("program"));
            std::size_t out_col = input.column_index(params.at("output_column").get<std::string>());
            auto blanks = blank_cells(input);
            if (blanks.size() != 1 || blanks[0].second != out_col) return false;
            std::size_t blank_row = blanks[0].first;
            if (blank_row + 1 != params.at("row_index").get<std::size_t>()) return false;
            const ProgramLibrary& lib = ProgramLibrary::builtin();
            for (std::size_t r = 0; r < input.row_count(); ++r) {
                auto expected = lib.apply_row(input.rows[r], app);
                if (!expected) return false;
                if (r == blank_row) {
                    if (*expected != inst.completion.answer.at("value").get<std::string>())
                        return false;
                } else if (*expected != input.cell(r, out_col)) {
                    return false;
                }
            }
            return true;
        }
        case TaskType::SM: {
            const Table& t1 = inst.input.tables.at(0);
            const Table& t2 = inst.input.tables.at(1);
            const auto& m = inst.completion.answer.at("mapping");
            if (m.size() != t1.column_count()) return false;
            std::set<std::string> values;
            for (const auto& h : t1.headers) {
                if (!m.contains(h)) return false;
                std::string para = m.at(h).get<std::string>();
                if (iequals(para, h)) return false;
                if (!values.insert(to_lower(para)).second) return false; // injectivity
            }
            auto t2_sorted = t2.headers;
            std::vector<std::string> mapped;
            for (const auto& h : t1.headers) mapped.push_back(m.at(h).get<std::string>());
            std::sort(t2_sorted.begin(), t2_sorted.end());
            std::sort(mapped.begin(), mapped.end());
            return t2_sorted == mapped;
        }
        case TaskType::DI: {
            if (!single_blank_matches(inst)) return false;
            const std::string v = inst.completion.answer.at("value").get<std::string>();
            return !v.empty() && v == params.at("removed_value").get<std::string>();
        }
        case TaskType::ED: {
            const Table& input = inst.input.tables.at(0);
            std::string corrupted = params.at("corrupted").get<std::string>();
            std::string correction = params.at("correction").get<std::string>();
            if (inst.completion.answer.at("erroneous_cell") != corrupted) return false;
            if (corrupted == correction) return false;
            if (damerau_levenshtein(corrupted, correction) != 1) return false;
            std::size_t r = params.at("row_index").get<std::size_t>() - 1;
            std::size_t c = input.column_index(params.at("column_name").get<std::string>());
            if (input.cell(r, c) != corrupted) return false;
            // The corruption must be unique in the table.
            std::size_t occurrences = 0;
            for (const auto& row : input.rows)
                for (const auto& cell : row)
                    if (cell == corrupted) ++occurrences;
            return occurrences == 1;
        }
        case TaskType::LE: {
            Table comp = parse(inst.completion.body, SerializationFormat::Markdown);
            if (!inst.input.list_text) return false;
            auto lines = split(*inst.input.list_text, '\n');
            bool include_headers = params.at("include_headers").get<bool>();
            std::size_t expected_lines = comp.row_count() + (include_headers ? 1 : 0);
            if (lines.size() != expected_lines) return false;
            if (params.at("ambiguous").get<bool>())
                return comp.column_count() == params.at("num_cols").get<std::size_t>();
            std::size_t li = 0;
            if (include_headers && split_ws(lines[li++]) != comp.headers) return false;
            for (const auto& row : comp.rows)
                if (split_ws(lines[li++]) != row) return false;
            return true;
        }
        case TaskType::EM: {
            std::string m = inst.completion.answer.at("match").get<std::string>();
            return m == "yes" || m == "no";
        }
        case TaskType::TQA: return inst.completion.answer.contains("answer");
        case TaskType::CTA: return inst.completion.answer.at("types").is_array();
        case TaskType::NS: return !inst.completion.body.empty();
    }
    return false;
}

} // namespace

bool verify(const TaskInstance& instance, const Table* source) {
    try {
        return verify_impl(instance, source);
    } catch (const std::exception&) {
        return false;
    }
}

// ---------------------------------------------------------------------------
// Benchmark manifests

namespace {

Table benchmark_table(const nlohmann::json& j) {
    Table t = parse(j.dump(), SerializationFormat::JSON);
    t.source_tag = SourceTag::external_benchmark;
    return t;
}

TaskInstance benchmark_instance(TaskType type, const nlohmann::json& rec, std::size_t line,
                                const std::string& path) {
    auto fail = [&](const std::string& why) {
        throw ManifestSchemaError("record at line " + std::to_string(line) + " of " + path +
                                  ": " + why);
    };
    if (!rec.is_object()) fail("not a JSON object");
    if (!rec.contains("task_type")) fail("missing 'task_type'");
    if (task_type_from_string(rec.at("task_type").get<std::string>()) != type)
        fail("task_type does not match the requested type");
    if (!rec.contains("tables") || !rec["tables"].is_array() || rec["tables"].empty())
        fail("missing non-empty 'tables' array");
    if (!rec.contains("gold")) fail("missing 'gold'");

    TaskInstance inst;
    inst.type = type;
    std::vector<Table> tables;
    try {
        for (const auto& tj : rec["tables"]) tables.push_back(benchmark_table(tj));
    } catch (const MalformedTable& e) {
        fail(e.what());
    }
    inst.input.tables = tables;
    inst.source_digest = content_hash(tables[0]);
    inst.seed = fnv1a64(path + ":" + std::to_string(line));

    const auto& gold = rec["gold"];
    auto gold_text = [&]() -> std::string {
        return gold.is_string() ? gold.get<std::string>() : gold.dump();
    };
    switch (type) {
        case TaskType::EM: {
            if (tables.size() != 2) fail("entity matching needs exactly 2 tables");
            std::string g = to_lower(trim(gold_text()));
            if (g != "yes" && g != "no") fail("gold must be 'yes' or 'no'");
            inst.completion = json_completion(CompletionKind::json_answer, {{"match", g}},
                                              R"({"match": "yes"} or {"match": "no"})");
            break;
        }
        case TaskType::TQA: {
            if (!rec.contains("question")) fail("missing 'question'");
            inst.slots["question"] = rec["question"].get<std::string>();
            inst.completion = json_completion(CompletionKind::json_answer,
                                              {{"answer", gold_text()}},
                                              R"({"answer": "<answer>"})");
            break;
        }
        case TaskType::CTA: {
            if (!rec.contains("column")) fail("missing 'column'");
            if (!gold.is_array()) fail("gold must be a list of types");
            inst.slots["column"] = rec["column"].get<std::string>();
            std::vector<std::string> choices;
            if (rec.contains("choices")) choices = rec["choices"].get<std::vector<std::string>>();
            inst.slots["choices"] = join(choices, ", ");
            inst.completion = json_completion(CompletionKind::json_answer,
                                              {{"types", gold}},
                                              R"({"types": ["<type>", ...]})");
            break;
        }
        case TaskType::NS: {
            if (!rec.contains("question")) fail("missing 'question'");
            inst.slots["question"] = rec["question"].get<std::string>();
            inst.completion = text_completion(gold_text());
            break;
        }
        default: fail("unsupported benchmark task type");
    }
    if (rec.contains("context") && rec["context"].is_string())
        inst.params["context"] = rec["context"];
    set_canonical_instruction(inst);
    return inst;
}

} // namespace

std::vector<TaskInstance> load_benchmark(const std::string& manifest_path, TaskType task_type) {
    if (task_type != TaskType::TQA && task_type != TaskType::CTA && task_type != TaskType::EM &&
        task_type != TaskType::NS)
        throw ConfigError(std::string("no benchmark loader for task type ") +
                          to_string(task_type));
    std::ifstream in(manifest_path);
    if (!in) throw ManifestSchemaError("cannot open manifest: " + manifest_path);
    std::vector<TaskInstance> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
        if (rec.is_discarded())
            throw ManifestSchemaError("record at line " + std::to_string(lineno) + " of " +
                                      manifest_path + ": invalid JSON");
        out.push_back(benchmark_instance(task_type, rec, lineno, manifest_path));
    }
    if (out.empty()) throw ManifestSchemaError("manifest has no records: " + manifest_path);
    return out;
}

// ---------------------------------------------------------------------------

std::string answer_note(const TaskInstance& instance) {
    switch (instance.type) {
        case TaskType::MV:
            return instance.params.value("question", "column") == std::string("column")
                       ? "Return your final answer as a JSON object in the format "
                         R"({"column": "<column header>"}.)"
                       : "Return your final answer as a JSON object in the format "
                         R"({"row_id": <1-based row number>}.)";
        case TaskType::CF:
            return "Return your final answer as a JSON object in the format "
                   R"({"column": "<column header>"}.)";
        case TaskType::TQA:
            return "Return your final answer as a JSON object in the format "
                   R"({"answer": "<answer>"}.)";
        case TaskType::CTA:
            return "Return your final answer as a JSON object in the format "
                   R"({"types": ["<type>", ...]}.)";
        case TaskType::R2R:
        case TaskType::DI:
            return "Return your final answer as a JSON object in the format "
                   R"({"value": "<missing value>"}.)";
        case TaskType::EM:
            return "Explain your reasoning if needed, then return your final answer as "
                   R"({"match": "yes"} or {"match": "no"}.)";
        case TaskType::SM:
            return "Return your final answer as a JSON object in the format "
                   R"({"mapping": {"<table 1 header>": "<table 2 header>", ...}}.)";
        case TaskType::ED:
            return "Return your final answer as a JSON object in the format "
                   R"({"erroneous_cell": "<cell value>"}.)";
        case TaskType::NS: return "Respond with the SQL query only.";
        case TaskType::TS: return "Respond with the title text only.";
        case TaskType::CA:
            return "Return the new column as a Markdown table (its header and one cell per row).";
        case TaskType::RA:
            return "Return the new row as a Markdown table (header row included).";
        case TaskType::LE:
        case TaskType::HVM:
        case TaskType::RCSW:
        case TaskType::RCF:
        case TaskType::RCS: return "Return the resulting table in Markdown format.";
    }
    return "";
}

} // namespace tabletask
