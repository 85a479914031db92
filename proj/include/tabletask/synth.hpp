#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tabletask/corpus.hpp"
#include "tabletask/paraphrase.hpp"
#include "tabletask/programs.hpp"
#include "tabletask/task.hpp"

namespace tabletask {

enum class MvVariant { with_sep, no_sep };
enum class MvQuestion { column, row };

const char* to_string(MvVariant v);
const char* to_string(MvQuestion q);
MvVariant mv_variant_from_string(const std::string& s);
MvQuestion mv_question_from_string(const std::string& s);

/// Shared knobs and collaborators for the synthesizers.
struct SynthContext {
    const ProgramLibrary* programs = &ProgramLibrary::builtin();
    const HeaderParaphraser* paraphraser = &HeaderParaphraser::builtin();
    TitleBounds title_bounds;
    bool le_include_headers = true;
};

// One synthesizer per task type; each is a pure function of
// (table, parameters, seed) and produces a programmatically correct
// completion.

TaskInstance synth_missing_value(const Table& t, MvVariant variant, MvQuestion asked,
                                 uint64_t seed);
TaskInstance synth_column_finding(const Table& t, uint64_t seed);
TaskInstance synth_table_summarization(const Table& t, const TitleBounds& bounds = {});
TaskInstance synth_column_augmentation(const Table& t, std::size_t k, uint64_t seed);
TaskInstance synth_row_augmentation(const Table& t, std::size_t k, uint64_t seed);
TaskInstance synth_swap(const Table& t, std::optional<Axis> axis, uint64_t seed);
TaskInstance synth_filter(const Table& t, std::optional<Axis> axis, uint64_t seed);
TaskInstance synth_sort(const Table& t, std::optional<Axis> axis, uint64_t seed);
TaskInstance synth_head_value_matching(const Table& t, uint64_t seed);
TaskInstance synth_row_to_row_transform(const Table& t, const ProgramLibrary& library,
                                        uint64_t seed);
TaskInstance synth_schema_matching(const Table& t, std::size_t k,
                                   const HeaderParaphraser& paraphraser, uint64_t seed);
TaskInstance synth_data_imputation(const Table& t, uint64_t seed);
TaskInstance synth_error_detection(const Table& t, uint64_t seed);
TaskInstance synth_list_extraction(const Table& t, uint64_t seed, bool include_headers = true);

/// The unsegmented list form of a table: one line per row, cells joined by
/// single spaces.
std::string list_form(const Table& t, bool include_headers);

/// Dispatch by task type. `fixed_params` replays externally chosen knobs
/// (mv variant/question, k, axis) — used by re-synthesis so the same seed
/// reproduces the same choices on a transformed table.
TaskInstance synthesize(TaskType type, const Table& t, uint64_t seed, const SynthContext& ctx,
                        const nlohmann::json& fixed_params = nlohmann::json::object());

/// Cheap deterministic precondition check used by task assignment.
bool eligible(TaskType type, const Table& t, const SynthContext& ctx);

/// Re-checks the stored completion against the instance's own payload and
/// parameters (the per-task ground-truth oracle). `source` sharpens the
/// check for tasks whose truth references the originating table.
bool verify(const TaskInstance& instance, const Table* source = nullptr);

/// Loads benchmark-backed task instances (TQA, CTA, EM, NS) from a JSONL
/// manifest; schema errors cite the offending line.
std::vector<TaskInstance> load_benchmark(const std::string& manifest_path, TaskType task_type);

/// Answer-format note appended to rendered prompts, and the instruction
/// wording helpers shared with re-synthesis.
std::string answer_note(const TaskInstance& instance);

} // namespace tabletask
