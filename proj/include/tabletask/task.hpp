#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "tabletask/table.hpp"

namespace tabletask {

/// The eighteen task types. Enumerator order is the canonical task
/// numbering and also the stable emission order of built datasets.
enum class TaskType {
    MV,   // missing-value identification
    CF,   // column finding
    TQA,  // table question answering
    CTA,  // column type annotation
    R2R,  // row-to-row transformation
    EM,   // entity matching
    SM,   // schema matching
    DI,   // data imputation
    ED,   // error detection
    LE,   // list extraction
    HVM,  // header-value matching
    NS,   // natural language to SQL
    TS,   // table summarization
    CA,   // column augmentation
    RA,   // row augmentation
    RCSW, // row/column swapping
    RCF,  // row/column filtering
    RCS,  // row/column sorting
};

constexpr std::size_t kTaskTypeCount = 18;

const char* to_string(TaskType t);
TaskType task_type_from_string(const std::string& s);
std::vector<TaskType> all_task_types();

/// Train/test role flags.
bool is_train_task(TaskType t);
bool is_test_task(TaskType t);

/// Task types whose instances are synthesized from corpus tables (as
/// opposed to loaded from benchmark manifests).
bool is_synthesized_task(TaskType t);

enum class CompletionKind { text, table, cellref, value, mapping, json_answer };

const char* to_string(CompletionKind k);
CompletionKind completion_kind_from_string(const std::string& s);

/// Expected completion. `body` is the full text a model is trained to
/// emit. For cellref/value/mapping/json_answer kinds the body ends with
/// exactly one JSON object and `answer` holds that object; tables in
/// completions are always Markdown.
struct Completion {
    CompletionKind kind = CompletionKind::text;
    std::string body;
    nlohmann::json answer;
    std::string answer_schema;

    nlohmann::json to_json() const;
    static Completion from_json(const nlohmann::json& j);
};

/// Task input. Most tasks carry one table; schema matching and entity
/// matching carry two; list extraction carries pre-rendered line text.
/// `headerless` asks the renderer to omit the header row (head-value
/// matching); `drop_separator_at` asks the Markdown/CSV/JSON renderers to
/// delete that cell together with its separator (missing-value variant b).
struct InputPayload {
    std::vector<Table> tables;
    std::optional<std::string> list_text;
    bool headerless = false;
    std::optional<CellRef> drop_separator_at;

    nlohmann::json to_json() const;
    static InputPayload from_json(const nlohmann::json& j);
};

/// One synthesized or benchmark-loaded task instance: the instruction, the
/// input payload, the programmatically correct completion, and enough
/// parameters to re-fill instruction templates and re-check the ground
/// truth after augmentation.
struct TaskInstance {
    TaskType type = TaskType::TS;
    std::string instruction;
    InputPayload input;
    Completion completion;
    std::string source_digest;
    uint64_t seed = 0;

    /// Template placeholder values, keyed by slot name.
    std::map<std::string, std::string> slots;

    /// Task-specific parameters consumed by oracles and re-synthesis
    /// (blanked cell, swap indices, index sets, program id, ...).
    nlohmann::json params = nlohmann::json::object();

    nlohmann::json to_json() const;
    static TaskInstance from_json(const nlohmann::json& j);
};

} // namespace tabletask
