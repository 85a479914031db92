#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tabletask/augment.hpp"
#include "tabletask/corpus.hpp"
#include "tabletask/model_client.hpp"
#include "tabletask/synth.hpp"

namespace tabletask {

enum class Metric { Accuracy, F1Binary, F1Set, Recall };

const char* to_string(Metric m);

/// Metric per task type: MV -> F1 (asked component as a singleton label
/// set), CF -> Acc, TQA -> Acc, CTA -> F1, R2R -> Acc, EM -> F1 (binary),
/// SM -> Recall, DI -> Acc, ED -> F1. Train-only types have no metric.
Metric metric_for(TaskType t);

/// Extracts the final well-formed JSON object from a model completion and
/// checks it has the fields the task's answer shape requires. nullopt
/// means unparsable (recorded, scored wrong, never excluded).
std::optional<nlohmann::json> parse_answer(const std::string& completion_text, TaskType t);

/// Pure scoring over (gold, predictions); order-independent.
double score(const std::vector<TaskInstance>& instances,
             const std::vector<std::optional<nlohmann::json>>& answers, TaskType t);

struct VariantResult {
    std::string template_kind;
    std::string format;
    double value = 0.0;
    std::size_t n = 0;
    std::size_t unparsable = 0;
    std::size_t provider_errors = 0;
};

struct DatasetResult {
    std::string name;
    TaskType type = TaskType::CF;
    Metric metric = Metric::Accuracy;
    double value = 0.0; // pooled over all variants
    std::size_t n = 0;
    std::size_t unparsable = 0;
    std::size_t provider_errors = 0;
    std::vector<VariantResult> variants;
};

struct EvalReport {
    nlohmann::json settings = nlohmann::json::object();
    std::vector<DatasetResult> datasets;

    nlohmann::json to_json() const;
    static EvalReport from_json(const nlohmann::json& j);
    static EvalReport load(const std::string& path);
    std::string to_text() const;
};

/// A synthesized probe set: N instances of a test-side task drawn from a
/// corpus (the T-1/T-2 protocol, also usable for any synthesizable task).
struct ProbeSpec {
    TaskType type = TaskType::CF;
    const Corpus* corpus = nullptr;
    std::size_t n = 1000;
    nlohmann::json task_params = nlohmann::json::object(); // {"variant": ..., "question": ...}
    std::string name; // defaults to "probe:<type>[:params]"
};

struct BenchmarkSpec {
    TaskType type = TaskType::EM;
    std::string manifest_path;
    std::optional<std::size_t> limit;
    std::string name; // defaults to "benchmark:<type>"
};

struct EvalOptions {
    std::vector<TemplateKind> templates{TemplateKind{}};
    std::vector<SerializationFormat> formats{SerializationFormat::Markdown};
    uint64_t seed = 0;
    double temperature = 0.0;
    int max_tokens = 1024;
    /// Embeds gold/index markers into prompts so scripted mocks can act as
    /// oracles; leave off against real providers.
    bool embed_markers = false;
    unsigned jobs = 1;
    std::size_t few_shot_k = 2;
    SynthContext synth;
};

/// Renders every instance under every requested (template, format)
/// variant, collects completions through the client, parses, scores and
/// assembles the per-variant breakdown plus a settings snapshot.
EvalReport run_eval(const ProbeSpec& source, ModelClient& client, const EvalOptions& options);
EvalReport run_eval(const BenchmarkSpec& source, ModelClient& client, const EvalOptions& options);

/// Scores a pre-built instance list as one dataset.
DatasetResult eval_dataset(const std::vector<TaskInstance>& instances,
                           const std::vector<TaskInstance>& example_bank, const std::string& name,
                           ModelClient& client, const EvalOptions& options);

/// Per-dataset deltas and win/tie/loss counts; reports must cover the same
/// datasets and variant axes.
nlohmann::json compare_reports(const EvalReport& baseline, const EvalReport& candidate);

} // namespace tabletask
