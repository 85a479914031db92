#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tabletask/augment.hpp"
#include "tabletask/corpus.hpp"
#include "tabletask/model_client.hpp"
#include "tabletask/synth.hpp"

namespace tabletask {

/// Full build recipe. File-based corpora are referenced through their
/// manifests; the library-level entry point below also accepts in-memory
/// corpora directly.
struct BuildConfig {
    uint64_t seed = 0;
    std::map<TaskType, std::size_t> counts;
    AugmentationPlan plan;
    SerializationFormat format = SerializationFormat::Markdown;
    std::size_t few_shot_k = 2;
    std::size_t max_prompt_chars = 30000;
    unsigned retry_budget = 5;
    bool le_include_headers = true;

    std::optional<CorpusManifest> train_manifest;
    std::optional<CorpusManifest> example_manifest;
    std::optional<CorpusManifest> test_manifest;
    std::map<TaskType, std::string> benchmark_manifests;

    std::string output_dir = ".";

    void validate() const;
    static BuildConfig from_json(const nlohmann::json& j);
    static BuildConfig load(const std::string& path);
    nlohmann::json to_json() const;
};

/// Per-task bookkeeping; emitted + dropped reconcile to requested.
struct TaskTally {
    std::size_t requested = 0;
    std::size_t emitted = 0;
    std::size_t zero_shot = 0;
    std::size_t few_shot = 0;
    std::size_t resynthesized = 0;
    std::size_t augmentation_skips = 0;
    std::size_t replacement_draws = 0;
    std::map<std::string, std::size_t> dropped; // error code -> count

    std::size_t dropped_total() const;
    nlohmann::json to_json() const;
};

struct DatasetManifest {
    uint64_t seed = 0;
    double template_mix_ratio = 0.5;
    std::map<std::string, TaskTally> per_task;
    std::size_t total_emitted = 0;
    std::string dataset_digest;
    std::string meta_digest;

    nlohmann::json to_json() const;
};

struct BuildInputs {
    const Corpus* train = nullptr;
    const Corpus* examples = nullptr; // defaults to train
    const Corpus* test = nullptr;     // disjointness check only
};

struct BuildResult {
    std::string dataset_jsonl; // {"prompt", "completion"} per line
    std::string meta_jsonl;    // sidecar metadata per line
    DatasetManifest manifest;
};

/// Deterministic table -> task-type assignment: every table claimed at most
/// once; task types claim in order of scarcest eligibility first. Throws
/// InsufficientCorpus naming the starved task type.
struct Assignment {
    std::map<TaskType, std::vector<std::size_t>> primaries;
    std::map<TaskType, std::vector<std::size_t>> spares;
};
Assignment assign_tasks(const Corpus& corpus, const std::map<TaskType, std::size_t>& counts,
                        const SynthContext& ctx, uint64_t seed);

/// Runs the whole pipeline: assign, synthesize, augment, render, emit.
/// Byte-identical output for identical (config, inputs, seed), independent
/// of `jobs`.
BuildResult build(const BuildConfig& config, const BuildInputs& inputs,
                  const InstructionPool& pool, ModelClient* model = nullptr, unsigned jobs = 1);

/// Convenience wrapper that ingests the config's manifests and writes
/// dataset.jsonl, dataset.meta.jsonl, and manifest.json under output_dir.
DatasetManifest build_to_files(const BuildConfig& config, const InstructionPool& pool,
                               ModelClient* model = nullptr, unsigned jobs = 1);

} // namespace tabletask
