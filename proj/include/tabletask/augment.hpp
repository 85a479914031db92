#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tabletask/instructions.hpp"
#include "tabletask/model_client.hpp"
#include "tabletask/synth.hpp"
#include "tabletask/task.hpp"

namespace tabletask {

enum class TableOp { column_permutation, row_permutation, column_sampling, row_sampling };

const char* to_string(TableOp op);
TableOp table_op_from_string(const std::string& s);

/// How a table-level op relates to a task type's stored completion:
///  - safe: completion provably survives (coordinates tracked by name/remap);
///  - conditional: survives iff the ground-truth re-check passes, else
///    re-synthesis;
///  - resynthesize: invalidates the completion, regenerate from the
///    transformed source table with the same seed;
///  - reject: benchmark-backed instance that cannot be re-synthesized.
enum class AugSafety { safe, conditional, resynthesize, reject };

/// The completion-safety table. Explicit data, not inference.
AugSafety augmentation_safety(const TaskInstance& instance, TableOp op);

enum class CompletionMode { off, cot_ground_truth, cot_model_assisted };
enum class InstructionMode { off, pool, model_assisted };

const char* to_string(CompletionMode m);
const char* to_string(InstructionMode m);
CompletionMode completion_mode_from_string(const std::string& s);
InstructionMode instruction_mode_from_string(const std::string& s);

/// The four augmentation levels applied after synthesis.
struct AugmentationPlan {
    InstructionMode instruction = InstructionMode::pool;
    std::vector<TableOp> table_ops; // empty = table level off
    CompletionMode completion = CompletionMode::off;
    double template_mix_ratio = 0.5; // zero-shot fraction

    static AugmentationPlan from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct AugmentContext {
    SynthContext synth;
    /// Resolves a source digest back to its corpus table for re-synthesis.
    std::function<const Table*(const std::string& digest)> lookup_source;
    bool allow_resynthesis = true;
};

/// Replaces the instruction with a uniformly sampled filled template from
/// the pool; input payload and completion are untouched.
TaskInstance augment_instruction(const TaskInstance& t, const InstructionPool& pool,
                                 uint64_t seed);

/// Model-assisted instruction paraphrase (falls back to the original text
/// when the model returns nothing usable).
TaskInstance augment_instruction_model(const TaskInstance& t, ModelClient& client);

/// Applies a table-level op. Safe ops keep the completion (coordinates
/// remapped); conditional ops keep it only when the oracle re-check
/// passes; everything else re-synthesizes on the transformed source table.
/// Throws UnsafeAugmentation when the completion would go stale and
/// re-synthesis is unavailable.
TaskInstance augment_table(const TaskInstance& t, TableOp op, uint64_t seed,
                           const AugmentContext& ctx);

/// Completion-level augmentation. Ground-truth mode rewrites ED/EM
/// completions from a template embedding the known fact; model-assisted
/// mode asks the model for reasoning steps and keeps the gold final answer
/// verbatim, throwing GoldMismatch when the model disagrees with gold.
TaskInstance augment_completion(const TaskInstance& t, CompletionMode mode, ModelClient* client,
                                uint64_t seed);

// ---------------------------------------------------------------------------
// Prompt rendering

struct TemplateKind {
    bool few_shot = false;
    std::size_t k = 2;

    std::string name() const { return few_shot ? "few_shot:" + std::to_string(k) : "zero_shot"; }
};

struct PromptRecord {
    std::string prompt;
    std::string completion;
    TaskType task_type = TaskType::TS;
    std::string template_kind;
    SerializationFormat format = SerializationFormat::Markdown;
    std::string source_digest;
    uint64_t seed = 0;
    nlohmann::json answer;
    std::string answer_schema;
    nlohmann::json meta = nlohmann::json::object();
};

/// The serialized task input as it appears in prompts (handles two-table
/// payloads, headerless rendering, list text, and the dropped-separator
/// missing-value variant).
std::string render_input_payload(const TaskInstance& t, SerializationFormat format);

/// Renders the full prompt. Few-shot templates draw k same-task examples
/// from the bank, none sharing the instance's source digest.
PromptRecord render_template(const TaskInstance& t, TemplateKind kind,
                             const std::vector<TaskInstance>& example_bank, uint64_t seed,
                             SerializationFormat format = SerializationFormat::Markdown);

} // namespace tabletask
