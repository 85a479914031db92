#include "tabletask/augment.hpp"

#include <algorithm>

#include "tabletask/answers.hpp"
#include "tabletask/errors.hpp"
#include "tabletask/rng.hpp"
#include "tabletask/util.hpp"

namespace tabletask {

const char* to_string(TableOp op) {
    switch (op) {
        case TableOp::column_permutation: return "column-permutation";
        case TableOp::row_permutation: return "row-permutation";
        case TableOp::column_sampling: return "column-sampling";
        case TableOp::row_sampling: return "row-sampling";
    }
    return "column-permutation";
}

TableOp table_op_from_string(const std::string& s) {
    if (s == "column-permutation") return TableOp::column_permutation;
    if (s == "row-permutation") return TableOp::row_permutation;
    if (s == "column-sampling") return TableOp::column_sampling;
    if (s == "row-sampling") return TableOp::row_sampling;
    throw ConfigError("unknown table op '" + s + "'");
}

const char* to_string(CompletionMode m) {
    switch (m) {
        case CompletionMode::off: return "off";
        case CompletionMode::cot_ground_truth: return "cot-ground-truth";
        case CompletionMode::cot_model_assisted: return "cot-model-assisted";
    }
    return "off";
}

const char* to_string(InstructionMode m) {
    switch (m) {
        case InstructionMode::off: return "off";
        case InstructionMode::pool: return "pool";
        case InstructionMode::model_assisted: return "model-assisted";
    }
    return "off";
}

CompletionMode completion_mode_from_string(const std::string& s) {
    if (s == "off") return CompletionMode::off;
    if (s == "cot-ground-truth") return CompletionMode::cot_ground_truth;
    if (s == "cot-model-assisted") return CompletionMode::cot_model_assisted;
    throw ConfigError("unknown completion mode '" + s + "'");
}

InstructionMode instruction_mode_from_string(const std::string& s) {
    if (s == "off") return InstructionMode::off;
    if (s == "pool") return InstructionMode::pool;
    if (s == "model-assisted") return InstructionMode::model_assisted;
    throw ConfigError("unknown instruction mode '" + s + "'");
}

AugmentationPlan AugmentationPlan::from_json(const nlohmann::json& j) {
    AugmentationPlan p;
    if (j.contains("instruction"))
        p.instruction = instruction_mode_from_string(j["instruction"].get<std::string>());
    if (j.contains("table"))
        for (const auto& op : j["table"])
            p.table_ops.push_back(table_op_from_string(op.get<std::string>()));
    if (j.contains("completion"))
        p.completion = completion_mode_from_string(j["completion"].get<std::string>());
    p.template_mix_ratio = j.value("template_mix_ratio", p.template_mix_ratio);
    if (p.template_mix_ratio < 0.0 || p.template_mix_ratio > 1.0)
        throw ConfigError("template_mix_ratio outside [0, 1]");
    return p;
}

nlohmann::json AugmentationPlan::to_json() const {
    nlohmann::json ops = nlohmann::json::array();
    for (TableOp op : table_ops) ops.push_back(to_string(op));
    return {{"instruction", to_string(instruction)},
            {"table", ops},
            {"completion", to_string(completion)},
            {"template_mix_ratio", template_mix_ratio}};
}

// ---------------------------------------------------------------------------
// Completion-safety table

AugSafety augmentation_safety(const TaskInstance& inst, TableOp op) {
    using S = AugSafety;
    const bool cp = op == TableOp::column_permutation;
    const bool rp = op == TableOp::row_permutation;
    const bool cs = op == TableOp::column_sampling;

    switch (inst.type) {
        case TaskType::MV: {
            bool no_sep = inst.params.value("variant", "with_sep") == std::string("no_sep");
            bool asks_row = inst.params.value("question", "column") == std::string("row");
            if (no_sep) return S::resynthesize;
            if (cp) return S::safe;
            if (rp) return asks_row ? S::resynthesize : S::safe;
            if (cs) return S::conditional;
            return asks_row ? S::resynthesize : S::conditional; // row-sampling
        }
        case TaskType::CF: return cp || rp ? S::safe : S::conditional;
        case TaskType::DI:
        case TaskType::ED: return cp || rp ? S::safe : S::conditional;
        case TaskType::R2R:
            if (rp) return S::safe;
            if (cp || cs) return S::resynthesize;
            return S::conditional; // row-sampling keeps the program valid on kept rows
        case TaskType::SM:
            if (rp || op == TableOp::row_sampling) return S::safe;
            return S::resynthesize;
        case TaskType::TS: return S::safe;
        case TaskType::HVM: return cp ? S::safe : S::resynthesize;
        case TaskType::LE:
        case TaskType::CA:
        case TaskType::RA:
        case TaskType::RCSW:
        case TaskType::RCF:
        case TaskType::RCS: return S::resynthesize;
        case TaskType::EM:
        case TaskType::TQA:
        case TaskType::CTA:
        case TaskType::NS: return cp || rp ? S::safe : S::reject;
    }
    return S::resynthesize;
}

// ---------------------------------------------------------------------------
// Instruction level

TaskInstance augment_instruction(const TaskInstance& t, const InstructionPool& pool,
                                 uint64_t seed) {
    const auto& templates = pool.for_type(t.type);
    Rng rng(seed);
    TaskInstance out = t;
    out.instruction = fill_template(templates[rng.index(templates.size())], t.slots);
    return out;
}

TaskInstance augment_instruction_model(const TaskInstance& t, ModelClient& client) {
    CompletionRequest req;
    req.model = client.model_id();
    req.prompt = "Paraphrase the following task instruction. Keep its meaning and every "
                 "quoted name or number intact, and reply with the paraphrased instruction "
                 "only.\n\nInstruction: " +
                 t.instruction + "\n\nParaphrase:";
    TaskInstance out = t;
    CompletionResponse resp = client.complete(req);
    std::string text = trim(resp.text);
    if (resp.finish != FinishReason::error && !text.empty()) out.instruction = text;
    return out;
}

// ---------------------------------------------------------------------------
// Table level

namespace {

std::vector<std::size_t> identity_perm(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    return p;
}

// Applies the op to one table; fills `row_map` (old 0-based row -> new
// 0-based row, SIZE_MAX when dropped) so callers can remap coordinates.
Table apply_op(const Table& t, TableOp op, Rng& rng, std::vector<std::size_t>* row_map) {
    if (row_map) {
        row_map->assign(t.row_count(), SIZE_MAX);
        for (std::size_t i = 0; i < t.row_count(); ++i) (*row_map)[i] = i;
    }
    switch (op) {
        case TableOp::column_permutation: {
            auto perm = identity_perm(t.column_count());
            rng.shuffle(perm);
            return permute_columns(t, perm);
        }
        case TableOp::row_permutation: {
            auto perm = identity_perm(t.row_count());
            rng.shuffle(perm);
            if (row_map)
                for (std::size_t newpos = 0; newpos < perm.size(); ++newpos)
                    (*row_map)[perm[newpos]] = newpos;
            return permute_rows(t, perm);
        }
        case TableOp::column_sampling: {
            std::size_t n = t.column_count();
            if (n < 2) return t;
            // Keep at least half so sampled tables stay usable.
            std::size_t keep = static_cast<std::size_t>(rng.between((n + 1) / 2, n - 1));
            auto idx = rng.sample_indices(n, keep);
            std::sort(idx.begin(), idx.end());
            std::vector<std::size_t> one_based;
            for (std::size_t i : idx) one_based.push_back(i + 1);
            return slice(t, Axis::column, one_based);
        }
        case TableOp::row_sampling: {
            std::size_t n = t.row_count();
            if (n < 2) return t;
            std::size_t keep = static_cast<std::size_t>(rng.between((n + 1) / 2, n - 1));
            auto idx = rng.sample_indices(n, keep);
            std::sort(idx.begin(), idx.end());
            if (row_map) {
                row_map->assign(n, SIZE_MAX);
                for (std::size_t newpos = 0; newpos < idx.size(); ++newpos)
                    (*row_map)[idx[newpos]] = newpos;
            }
            std::vector<std::size_t> one_based;
            for (std::size_t i : idx) one_based.push_back(i + 1);
            return slice(t, Axis::row, one_based);
        }
    }
    return t;
}

// Remaps the 1-based row_index parameter after a row op; false when the
// referenced row was dropped.
bool remap_row_index(TaskInstance& inst, const std::vector<std::size_t>& row_map) {
    if (!inst.params.contains("row_index")) return true;
    std::size_t old_row = inst.params["row_index"].get<std::size_t>() - 1;
    if (old_row >= row_map.size() || row_map[old_row] == SIZE_MAX) return false;
    inst.params["row_index"] = row_map[old_row] + 1;
    return true;
}

TaskInstance resynthesize(const TaskInstance& t, TableOp op, uint64_t seed,
                          const AugmentContext& ctx) {
    if (!ctx.allow_resynthesis)
        throw UnsafeAugmentation(std::string(to_string(op)) + " would invalidate the " +
                                 to_string(t.type) + " completion and re-synthesis is disabled");
    if (!ctx.lookup_source)
        throw UnsafeAugmentation("re-synthesis requires a source-table lookup");
    const Table* source = ctx.lookup_source(t.source_digest);
    if (!source)
        throw UnsafeAugmentation("source table " + t.source_digest + " not found for re-synthesis");
    Rng rng(seed ^ 0x9e3779b9u);
    Table transformed = apply_op(*source, op, rng, nullptr);
    TaskInstance fresh = synthesize(t.type, transformed, t.seed, ctx.synth, t.params);
    fresh.params["augmentation"] = {{"op", to_string(op)}, {"mode", "resynthesized"}};
    return fresh;
}

} // namespace

TaskInstance augment_table(const TaskInstance& t, TableOp op, uint64_t seed,
                           const AugmentContext& ctx) {
    AugSafety safety = augmentation_safety(t, op);
    if (safety == AugSafety::reject)
        throw UnsafeAugmentation(std::string(to_string(op)) + " cannot be applied to " +
                                 to_string(t.type) + " (benchmark data, no re-synthesis)");
    if (safety == AugSafety::resynthesize) return resynthesize(t, op, seed, ctx);

    TaskInstance out = t;
    Rng rng(seed);
    bool coords_ok = true;
    for (std::size_t i = 0; i < out.input.tables.size(); ++i) {
        Rng table_rng(rng.next());
        std::vector<std::size_t> row_map;
        out.input.tables[i] = apply_op(out.input.tables[i], op, table_rng, &row_map);
        if (i == 0) coords_ok = remap_row_index(out, row_map);
    }
    out.params["augmentation"] = {{"op", to_string(op)}, {"mode", "in-place"}};

    if (coords_ok && verify(out)) return out;
    if (safety == AugSafety::safe && !coords_ok)
        throw UnsafeAugmentation("row coordinate lost under a safe op"); // should not happen
    // Conditional op invalidated the completion; fall back to re-synthesis.
    return resynthesize(t, op, seed, ctx);
}

// ---------------------------------------------------------------------------
// Completion level

namespace {

std::string em_reasoning(const std::string& gold) {
    if (gold == "yes")
        return "Comparing the two records field by field, the corresponding values agree, "
               "so they describe the same real-world entity.";
    return "Comparing the two records field by field, the corresponding values disagree, "
           "so they describe different real-world entities.";
}

TaskInstance ground_truth_cot(const TaskInstance& t) {
    TaskInstance out = t;
    std::string reasoning;
    if (t.type == TaskType::ED) {
        std::string corrupted = t.params.at("corrupted").get<std::string>();
        std::string correction = t.params.at("correction").get<std::string>();
        std::string column = t.params.at("column_name").get<std::string>();
        reasoning = "Reading the table column by column, the value \"" + corrupted +
                    "\" in column \"" + column +
                    "\" does not match the spelling of its intended word. \"" + corrupted +
                    "\" should be \"" + correction + "\".";
    } else if (t.type == TaskType::EM) {
        reasoning = em_reasoning(t.completion.answer.at("match").get<std::string>());
    } else {
        throw ConfigError("cot-ground-truth is only defined for ED and EM instances");
    }
    out.completion.body = reasoning + "\nThe final answer is:\n" + t.completion.body;
    return out;
}

TaskInstance model_cot(const TaskInstance& t, ModelClient& client, uint64_t /*seed*/) {
    if (t.completion.kind == CompletionKind::text || t.completion.kind == CompletionKind::table)
        throw ConfigError("cot-model-assisted needs a JSON-answer completion");
    CompletionRequest req;
    req.model = client.model_id();
    req.prompt = "You are given a table task together with its correct final answer. Write "
                 "brief step-by-step reasoning that leads to that answer, then restate the "
                 "final answer as a JSON object on the last line.\n\nTask:\n" +
                 t.instruction + "\n\n" + render_input_payload(t, SerializationFormat::Markdown) +
                 "\n\nCorrect final answer: " + t.completion.body + "\n\nReasoning:";
    CompletionResponse resp = client.complete(req);
    if (resp.finish == FinishReason::error)
        throw GoldMismatch("model call failed: " + resp.error);
    auto final_json = extract_final_json(resp.text);
    if (!final_json || *final_json != t.completion.answer)
        throw GoldMismatch("model's final answer differs from gold");
    TaskInstance out = t;
    std::string reasoning = trim(strip_final_json(resp.text));
    // Keep the machine-parseable tail byte-identical to the gold body.
    out.completion.body =
        reasoning.empty() ? t.completion.body : reasoning + "\n" + t.completion.body;
    return out;
}

} // namespace

TaskInstance augment_completion(const TaskInstance& t, CompletionMode mode, ModelClient* client,
                                uint64_t seed) {
    switch (mode) {
        case CompletionMode::off: return t;
        case CompletionMode::cot_ground_truth: return ground_truth_cot(t);
        case CompletionMode::cot_model_assisted:
            if (!client) throw ModelUnavailable("cot-model-assisted needs a model client");
            return model_cot(t, *client, seed);
    }
    return t;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string render_headerless(const Table& t, SerializationFormat f) {
    switch (f) {
        case SerializationFormat::Markdown: {
            std::vector<std::string> lines;
            for (const auto& row : t.rows) lines.push_back(markdown_row(row));
            return join(lines, "\n");
        }
        case SerializationFormat::CSV: {
            std::string out;
            for (const auto& row : t.rows) {
                std::vector<std::string> fields;
                for (const auto& c : row) fields.push_back(csv_field(c));
                out += join(fields, ",") + "\n";
            }
            return out;
        }
        case SerializationFormat::JSON: {
            nlohmann::json j = {{"rows", t.rows}};
            return j.dump();
        }
    }
    return "";
}

std::string render_dropped_separator(const Table& t, const CellRef& at, SerializationFormat f) {
    std::size_t r = at.row_index - 1;
    std::size_t c = t.column_index(at.column_name);
    auto row_without = [&](const std::vector<std::string>& row) {
        std::vector<std::string> cells;
        for (std::size_t i = 0; i < row.size(); ++i)
            if (i != c) cells.push_back(row[i]);
        return cells;
    };
    switch (f) {
        case SerializationFormat::Markdown: {
            std::vector<std::string> lines;
            lines.push_back(markdown_row(t.headers));
            std::string rule = "|";
            for (std::size_t i = 0; i < t.headers.size(); ++i) rule += "---|";
            lines.push_back(rule);
            for (std::size_t i = 0; i < t.rows.size(); ++i)
                lines.push_back(markdown_row(i == r ? row_without(t.rows[i]) : t.rows[i]));
            return join(lines, "\n");
        }
        case SerializationFormat::CSV: {
            auto emit = [](const std::vector<std::string>& cells) {
                std::vector<std::string> fields;
                for (const auto& cell : cells) fields.push_back(csv_field(cell));
                return join(fields, ",");
            };
            std::vector<std::string> lines;
            lines.push_back(emit(t.headers));
            for (std::size_t i = 0; i < t.rows.size(); ++i)
                lines.push_back(emit(i == r ? row_without(t.rows[i]) : t.rows[i]));
            return join(lines, "\n") + "\n";
        }
        case SerializationFormat::JSON: {
            nlohmann::json rows = nlohmann::json::array();
            for (std::size_t i = 0; i < t.rows.size(); ++i)
                rows.push_back(i == r ? row_without(t.rows[i]) : t.rows[i]);
            nlohmann::json j = {{"headers", t.headers}, {"rows", rows}};
            return j.dump();
        }
    }
    return "";
}

} // namespace

std::string render_input_payload(const TaskInstance& t, SerializationFormat format) {
    if (t.input.list_text) return *t.input.list_text;
    if (t.input.tables.size() == 2) {
        const char* label = t.type == TaskType::EM ? "Entity" : "Table";
        return std::string(label) + " 1:\n" + serialize(t.input.tables[0], format) + "\n\n" +
               label + " 2:\n" + serialize(t.input.tables[1], format);
    }
    if (t.input.tables.empty()) return "";
    const Table& table = t.input.tables[0];
    if (t.input.headerless) return render_headerless(table, format);
    if (t.input.drop_separator_at)
        return render_dropped_separator(table, *t.input.drop_separator_at, format);
    return serialize(table, format);
}

PromptRecord render_template(const TaskInstance& t, TemplateKind kind,
                             const std::vector<TaskInstance>& example_bank, uint64_t seed,
                             SerializationFormat format) {
    PromptRecord rec;
    rec.task_type = t.type;
    rec.template_kind = kind.name();
    rec.format = format;
    rec.source_digest = t.source_digest;
    rec.seed = t.seed;
    rec.answer = t.completion.answer;
    rec.answer_schema = t.completion.answer_schema;
    rec.completion = t.completion.body;

    std::string prompt = t.instruction;
    std::string note = answer_note(t);
    if (!note.empty()) prompt += "\n" + note;
    prompt += "\n";

    if (kind.few_shot) {
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < example_bank.size(); ++i) {
            if (example_bank[i].type != t.type) continue;
            if (example_bank[i].source_digest == t.source_digest) continue;
            candidates.push_back(i);
        }
        if (candidates.size() < kind.k)
            throw InsufficientExamples("need " + std::to_string(kind.k) + " examples for " +
                                       std::string(to_string(t.type)) + ", bank has " +
                                       std::to_string(candidates.size()));
        Rng rng(seed);
        rng.shuffle(candidates);
        candidates.resize(kind.k);
        nlohmann::json example_digests = nlohmann::json::array();
        prompt += "\nHere are some examples.\n";
        for (std::size_t i : candidates) {
            const TaskInstance& ex = example_bank[i];
            prompt += "\nInput:\n" + render_input_payload(ex, format) + "\n\nOutput:\n" +
                      ex.completion.body + "\n";
            example_digests.push_back(ex.source_digest);
        }
        prompt += "\nNow complete the following.\n";
        rec.meta["example_digests"] = example_digests;
    }

    prompt += "\nInput:\n" + render_input_payload(t, format) + "\n\nOutput:\n";
    rec.prompt = prompt;
    if (t.params.contains("augmentation")) rec.meta["augmentation"] = t.params["augmentation"];
    if (t.params.contains("ambiguous")) rec.meta["ambiguous"] = t.params["ambiguous"];
    return rec;
}

} // namespace tabletask
