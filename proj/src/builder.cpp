#include "tabletask/builder.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "tabletask/errors.hpp"
#include "tabletask/rng.hpp"
#include "tabletask/util.hpp"

namespace fs = std::filesystem;

namespace tabletask {

void BuildConfig::validate() const {
    if (plan.template_mix_ratio < 0.0 || plan.template_mix_ratio > 1.0)
        throw ConfigError("template mix ratio outside [0, 1]");
    if (few_shot_k < 1) throw ConfigError("few_shot_k must be >= 1");
    for (const auto& [type, n] : counts) {
        if (n == 0) continue;
        if (!is_train_task(type))
            throw ConfigError(std::string("task type ") + to_string(type) +
                              " is test-only and cannot appear in a training build");
        if (!is_synthesized_task(type) && !benchmark_manifests.count(type))
            throw ConfigError(std::string("task type ") + to_string(type) +
                              " needs a benchmark manifest");
    }
}

BuildConfig BuildConfig::from_json(const nlohmann::json& j) {
    BuildConfig c;
    if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
    if (j.contains("counts"))
        for (auto it = j["counts"].begin(); it != j["counts"].end(); ++it)
            c.counts[task_type_from_string(it.key())] = it.value().get<std::size_t>();
    if (j.contains("augmentation")) c.plan = AugmentationPlan::from_json(j["augmentation"]);
    if (j.contains("template_mix_ratio"))
        c.plan.template_mix_ratio = j["template_mix_ratio"].get<double>();
    if (j.contains("format")) c.format = format_from_string(j["format"].get<std::string>());
    c.few_shot_k = j.value("few_shot_k", c.few_shot_k);
    c.max_prompt_chars = j.value("max_prompt_chars", c.max_prompt_chars);
    c.retry_budget = j.value("retry_budget", c.retry_budget);
    c.le_include_headers = j.value("le_include_headers", c.le_include_headers);
    if (j.contains("train_corpus")) c.train_manifest = CorpusManifest::from_json(j["train_corpus"]);
    if (j.contains("example_corpus"))
        c.example_manifest = CorpusManifest::from_json(j["example_corpus"]);
    if (j.contains("test_corpus")) c.test_manifest = CorpusManifest::from_json(j["test_corpus"]);
    if (j.contains("benchmarks"))
        for (auto it = j["benchmarks"].begin(); it != j["benchmarks"].end(); ++it)
            c.benchmark_manifests[task_type_from_string(it.key())] =
                it.value().get<std::string>();
    c.output_dir = j.value("output_dir", c.output_dir);
    c.validate();
    return c;
}

BuildConfig BuildConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open build config: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("build config is not valid JSON: " + path);
    return from_json(j);
}

nlohmann::json BuildConfig::to_json() const {
    nlohmann::json counts_json = nlohmann::json::object();
    for (const auto& [type, n] : counts) counts_json[to_string(type)] = n;
    nlohmann::json j = {{"seed", seed},
                        {"counts", counts_json},
                        {"augmentation", plan.to_json()},
                        {"format", to_string(format)},
                        {"few_shot_k", few_shot_k},
                        {"max_prompt_chars", max_prompt_chars},
                        {"retry_budget", retry_budget},
                        {"le_include_headers", le_include_headers},
                        {"output_dir", output_dir}};
    if (train_manifest) j["train_corpus"] = train_manifest->to_json();
    if (example_manifest) j["example_corpus"] = example_manifest->to_json();
    if (test_manifest) j["test_corpus"] = test_manifest->to_json();
    nlohmann::json bm = nlohmann::json::object();
    for (const auto& [type, path] : benchmark_manifests) bm[to_string(type)] = path;
    if (!bm.empty()) j["benchmarks"] = bm;
    return j;
}

std::size_t TaskTally::dropped_total() const {
    std::size_t n = 0;
    for (const auto& [code, count] : dropped) n += count;
    return n;
}

nlohmann::json TaskTally::to_json() const {
    return {{"requested", requested},
            {"emitted", emitted},
            {"zero_shot", zero_shot},
            {"few_shot", few_shot},
            {"resynthesized", resynthesized},
            {"augmentation_skips", augmentation_skips},
            {"replacement_draws", replacement_draws},
            {"dropped", dropped}};
}

nlohmann::json DatasetManifest::to_json() const {
    nlohmann::json per = nlohmann::json::object();
    for (const auto& [name, tally] : per_task) per[name] = tally.to_json();
    return {{"seed", seed},
            {"template_mix_ratio", template_mix_ratio},
            {"per_task", per},
            {"total_emitted", total_emitted},
            {"dataset_digest", dataset_digest},
            {"meta_digest", meta_digest}};
}

// ---------------------------------------------------------------------------
// Assignment

Assignment assign_tasks(const Corpus& corpus, const std::map<TaskType, std::size_t>& counts,
                        const SynthContext& ctx, uint64_t seed) {
    // Eligible table sets per type, computed once.
    std::map<TaskType, std::vector<std::size_t>> eligible_sets;
    for (const auto& [type, n] : counts) {
        if (n == 0 || !is_synthesized_task(type)) continue;
        std::vector<std::size_t> set;
        for (std::size_t i = 0; i < corpus.size(); ++i)
            if (eligible(type, corpus.table(i), ctx)) set.push_back(i);
        eligible_sets[type] = std::move(set);
    }

    // Scarcest eligibility claims first so abundant types cannot starve
    // picky ones (titled tables for TS, transformable tables for R2R, ...).
    std::vector<TaskType> order;
    for (const auto& [type, set] : eligible_sets) order.push_back(type);
    std::stable_sort(order.begin(), order.end(), [&](TaskType a, TaskType b) {
        return eligible_sets[a].size() < eligible_sets[b].size();
    });

    Assignment out;
    std::vector<bool> claimed(corpus.size(), false);
    Rng rng(seed);
    for (TaskType type : order) {
        std::vector<std::size_t> pool;
        for (std::size_t i : eligible_sets[type])
            if (!claimed[i]) pool.push_back(i);
        std::size_t need = counts.at(type);
        if (pool.size() < need)
            throw InsufficientCorpus(std::string(to_string(type)) + ": need " +
                                     std::to_string(need) + " eligible tables, " +
                                     std::to_string(pool.size()) + " available");
        rng.shuffle(pool);
        std::vector<std::size_t> primary(pool.begin(),
                                         pool.begin() + static_cast<std::ptrdiff_t>(need));
        for (std::size_t i : primary) claimed[i] = true;
        out.primaries[type] = std::move(primary);
    }
    // Leftover eligible tables become replacement candidates, still subject
    // to the global one-table-one-task rule at draw time.
    for (TaskType type : order) {
        std::vector<std::size_t> spare;
        for (std::size_t i : eligible_sets[type])
            if (!claimed[i]) spare.push_back(i);
        rng.shuffle(spare);
        out.spares[type] = std::move(spare);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Build

namespace {

struct Slot {
    TaskType type;
    std::size_t index = 0;          // instance index within the type
    std::size_t table_index = 0;    // corpus table (synthesized types)
    std::size_t bench_index = 0;    // benchmark record (benchmark types)
    TemplateKind kind;
    bool ok = false;
    std::string drop_reason;
    PromptRecord record;
};

struct BuildState {
    const BuildConfig* config;
    const Corpus* train;
    const Corpus* examples;
    const InstructionPool* pool;
    ModelClient* model;
    SynthContext synth_ctx;
    AugmentContext aug_ctx;
    std::map<TaskType, std::vector<TaskInstance>> benchmark_instances;
    std::map<TaskType, std::vector<TaskInstance>> example_banks;
};

uint64_t slot_seed(const BuildState& st, const std::string& digest, TaskType type) {
    return derive_seed(st.config->seed, digest, to_string(type));
}

TaskInstance synthesize_slot(const BuildState& st, const Slot& slot, std::size_t table_index) {
    if (is_synthesized_task(slot.type)) {
        const Table& t = st.train->table(table_index);
        uint64_t seed = slot_seed(st, st.train->digest(table_index), slot.type);
        return synthesize(slot.type, t, seed, st.synth_ctx);
    }
    return st.benchmark_instances.at(slot.type).at(slot.bench_index);
}

TaskInstance apply_augmentations(const BuildState& st, TaskInstance inst, bool* resynth,
                                 bool* aug_skip) {
    const AugmentationPlan& plan = st.config->plan;
    Rng rng(derive_seed(inst.seed, inst.source_digest, "augment"));

    if (!plan.table_ops.empty()) {
        TableOp op = plan.table_ops[rng.index(plan.table_ops.size())];
        uint64_t op_seed = rng.next();
        try {
            TaskInstance augmented = augment_table(inst, op, op_seed, st.aug_ctx);
            if (augmented.params.contains("augmentation") &&
                augmented.params["augmentation"].value("mode", "") == "resynthesized")
                *resynth = true;
            inst = std::move(augmented);
        } catch (const Error&) {
            // The op cannot apply here (axis too small after sampling,
            // benchmark task, ...). Keep the unaugmented instance.
            *aug_skip = true;
        }
    }

    if (plan.instruction == InstructionMode::pool) {
        inst = augment_instruction(inst, *st.pool, rng.next());
    } else if (plan.instruction == InstructionMode::model_assisted) {
        if (!st.model) throw ModelUnavailable("model-assisted instruction augmentation");
        inst = augment_instruction_model(inst, *st.model);
    }

    if (plan.completion != CompletionMode::off &&
        (inst.type == TaskType::ED || inst.type == TaskType::EM)) {
        CompletionMode mode = plan.completion;
        // Ground-truth reasoning is only constructible for ED (the known
        // correction); EM goes through the model when one is configured.
        if (mode == CompletionMode::cot_model_assisted && inst.type == TaskType::ED)
            mode = CompletionMode::cot_ground_truth;
        if (mode == CompletionMode::cot_ground_truth || st.model)
            inst = augment_completion(inst, mode, st.model, rng.next());
    }
    return inst;
}

PromptRecord render_slot(const BuildState& st, const TaskInstance& inst, const Slot& slot) {
    const auto& bank = st.example_banks.at(slot.type);
    PromptRecord rec = render_template(inst, slot.kind, bank,
                                       derive_seed(inst.seed, inst.source_digest, "render"),
                                       st.config->format);
    if (rec.prompt.size() > st.config->max_prompt_chars)
        throw Error("PromptTooLong", std::to_string(rec.prompt.size()) + " chars over the " +
                                         std::to_string(st.config->max_prompt_chars) + " cap");
    return rec;
}

// Example banks are synthesized from the example pool; bank entries only
// need to exist, they are never emitted.
std::map<TaskType, std::vector<TaskInstance>> make_example_banks(const BuildState& st,
                                                                 unsigned jobs) {
    std::map<TaskType, std::vector<TaskInstance>> banks;
    std::size_t bank_target = std::max<std::size_t>(st.config->few_shot_k * 2, 4);
    for (const auto& [type, n] : st.config->counts) {
        if (n == 0) continue;
        std::vector<TaskInstance>& bank = banks[type];
        if (!is_synthesized_task(type)) {
            const auto& loaded = st.benchmark_instances.at(type);
            // Records beyond the requested count serve as examples; when the
            // manifest is tight, fall back to the selected ones (the digest
            // filter at render time keeps self-references out).
            for (std::size_t i = n; i < loaded.size() && bank.size() < bank_target; ++i)
                bank.push_back(loaded[i]);
            for (std::size_t i = 0; i < loaded.size() && bank.size() < bank_target; ++i)
                bank.push_back(loaded[i]);
            continue;
        }
        std::vector<std::size_t> eligible_idx;
        for (std::size_t i = 0; i < st.examples->size(); ++i)
            if (eligible(type, st.examples->table(i), st.synth_ctx)) eligible_idx.push_back(i);
        Rng rng(derive_seed(st.config->seed, "example-bank", to_string(type)));
        rng.shuffle(eligible_idx);
        std::vector<TaskInstance> built(std::min(bank_target * 2, eligible_idx.size()));
        parallel_for(built.size(), jobs, [&](std::size_t i) {
            std::size_t ti = eligible_idx[i];
            uint64_t seed =
                derive_seed(st.config->seed, st.examples->digest(ti),
                            std::string(to_string(type)) + ":example");
            try {
                built[i] = synthesize(type, st.examples->table(ti), seed, st.synth_ctx);
                built[i].params["bank_ok"] = true;
            } catch (const Error&) {
                built[i].params["bank_ok"] = false;
            }
        });
        for (auto& inst : built) {
            if (bank.size() >= bank_target) break;
            if (inst.params.value("bank_ok", false)) {
                inst.params.erase("bank_ok");
                bank.push_back(std::move(inst));
            }
        }
    }
    return banks;
}

} // namespace

BuildResult build(const BuildConfig& config, const BuildInputs& inputs,
                  const InstructionPool& pool, ModelClient* model, unsigned jobs) {
    config.validate();
    if (!inputs.train) throw ConfigError("build needs a train corpus");

    BuildState st;
    st.config = &config;
    st.train = inputs.train;
    st.examples = inputs.examples ? inputs.examples : inputs.train;
    st.pool = &pool;
    st.model = model;
    st.synth_ctx.title_bounds = inputs.train->title_bounds();
    st.synth_ctx.le_include_headers = config.le_include_headers;
    st.aug_ctx.synth = st.synth_ctx;
    st.aug_ctx.lookup_source = [train = st.train,
                                examples = st.examples](const std::string& digest) {
        if (const Table* t = train->find_by_digest(digest)) return t;
        return examples->find_by_digest(digest);
    };

    if (inputs.test) assert_disjoint(*inputs.train, *inputs.test, /*strict=*/true);

    // Benchmark-backed types load up front.
    for (const auto& [type, n] : config.counts) {
        if (n == 0 || is_synthesized_task(type)) continue;
        auto loaded = load_benchmark(config.benchmark_manifests.at(type), type);
        if (loaded.size() < n)
            throw InsufficientCorpus(std::string(to_string(type)) + ": manifest has " +
                                     std::to_string(loaded.size()) + " records, need " +
                                     std::to_string(n));
        Rng rng(derive_seed(config.seed, "benchmark", to_string(type)));
        rng.shuffle(loaded);
        st.benchmark_instances[type] = std::move(loaded);
    }

    std::map<TaskType, std::size_t> synth_counts;
    for (const auto& [type, n] : config.counts)
        if (n > 0 && is_synthesized_task(type)) synth_counts[type] = n;
    Assignment assignment = assign_tasks(*inputs.train, synth_counts, st.synth_ctx, config.seed);

    st.example_banks = make_example_banks(st, jobs);

    // Lay out slots in stable (task type, instance index) order and assign
    // template kinds per type: exactly round(ratio * n) zero-shot, shuffled.
    std::vector<Slot> slots;
    for (const auto& [type, n] : config.counts) {
        if (n == 0) continue;
        std::vector<TemplateKind> kinds(n);
        auto n_zero = static_cast<std::size_t>(
            std::llround(config.plan.template_mix_ratio * static_cast<double>(n)));
        for (std::size_t i = 0; i < n; ++i) {
            kinds[i].few_shot = i >= n_zero;
            kinds[i].k = config.few_shot_k;
        }
        Rng rng(derive_seed(config.seed, "template-mix", to_string(type)));
        rng.shuffle(kinds);
        for (std::size_t i = 0; i < n; ++i) {
            Slot s;
            s.type = type;
            s.index = i;
            s.kind = kinds[i];
            if (is_synthesized_task(type)) s.table_index = assignment.primaries[type][i];
            else s.bench_index = i;
            slots.push_back(std::move(s));
        }
    }

    DatasetManifest manifest;
    manifest.seed = config.seed;
    manifest.template_mix_ratio = config.plan.template_mix_ratio;
    for (const auto& [type, n] : config.counts)
        if (n > 0) manifest.per_task[to_string(type)].requested = n;

    // Parallel synthesis/augmentation/render; each slot is pure given its
    // derived seed, so scheduling cannot change bytes.
    std::vector<bool> resynth_flags(slots.size(), false), skip_flags(slots.size(), false);
    parallel_for(slots.size(), jobs, [&](std::size_t i) {
        Slot& slot = slots[i];
        try {
            TaskInstance inst = synthesize_slot(st, slot, slot.table_index);
            bool resynth = false, skip = false;
            inst = apply_augmentations(st, std::move(inst), &resynth, &skip);
            resynth_flags[i] = resynth;
            skip_flags[i] = skip;
            slot.record = render_slot(st, inst, slot);
            slot.ok = true;
        } catch (const Error& e) {
            slot.drop_reason = e.code();
        }
    });

    // Serial replacement pass for failed synthesized slots, in slot order;
    // replacement draws claim tables globally, so determinism holds.
    std::map<TaskType, std::size_t> spare_cursor;
    std::set<std::size_t> spare_claimed;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        Slot& slot = slots[i];
        if (slot.ok || !is_synthesized_task(slot.type)) continue;
        if (slot.drop_reason == "GoldMismatch") continue; // dropped, not replaced
        auto& tally = manifest.per_task[to_string(slot.type)];
        auto& spares = assignment.spares[slot.type];
        auto& cursor = spare_cursor[slot.type];
        for (unsigned attempt = 0; attempt < config.retry_budget && !slot.ok; ++attempt) {
            while (cursor < spares.size() && spare_claimed.count(spares[cursor])) ++cursor;
            if (cursor >= spares.size()) break;
            std::size_t table_index = spares[cursor++];
            spare_claimed.insert(table_index);
            ++tally.replacement_draws;
            try {
                TaskInstance inst = synthesize_slot(st, slot, table_index);
                bool resynth = false, skip = false;
                inst = apply_augmentations(st, std::move(inst), &resynth, &skip);
                resynth_flags[i] = resynth;
                skip_flags[i] = skip;
                slot.record = render_slot(st, inst, slot);
                slot.ok = true;
                slot.table_index = table_index;
            } catch (const Error& e) {
                slot.drop_reason = e.code();
            }
        }
    }

    // Emission, already ordered by (task type, instance index).
    std::string dataset, meta;
    std::size_t emitted_index = 0;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        const Slot& slot = slots[i];
        auto& tally = manifest.per_task[to_string(slot.type)];
        if (!slot.ok) {
            ++tally.dropped[slot.drop_reason.empty() ? "unknown" : slot.drop_reason];
            continue;
        }
        if (resynth_flags[i]) ++tally.resynthesized;
        if (skip_flags[i]) ++tally.augmentation_skips;
        ++tally.emitted;
        if (slot.kind.few_shot) ++tally.few_shot;
        else ++tally.zero_shot;

        const PromptRecord& rec = slot.record;
        nlohmann::json line = {{"prompt", rec.prompt}, {"completion", rec.completion}};
        dataset += line.dump() + "\n";
        nlohmann::json m = {{"index", emitted_index},
                            {"task_type", to_string(rec.task_type)},
                            {"template", rec.template_kind},
                            {"format", to_string(rec.format)},
                            {"seed", rec.seed},
                            {"source_digest", rec.source_digest},
                            {"answer_schema", rec.answer_schema}};
        for (auto it = rec.meta.begin(); it != rec.meta.end(); ++it) m[it.key()] = it.value();
        meta += m.dump() + "\n";
        ++emitted_index;
    }

    manifest.total_emitted = emitted_index;
    manifest.dataset_digest = sha256_hex(dataset);
    manifest.meta_digest = sha256_hex(meta);

    BuildResult result;
    result.dataset_jsonl = std::move(dataset);
    result.meta_jsonl = std::move(meta);
    result.manifest = std::move(manifest);
    return result;
}

DatasetManifest build_to_files(const BuildConfig& config, const InstructionPool& pool,
                               ModelClient* model, unsigned jobs) {
    if (!config.train_manifest) throw ConfigError("build config has no train corpus manifest");
    IngestResult train = ingest(*config.train_manifest, jobs);
    std::optional<IngestResult> examples, test;
    if (config.example_manifest) examples = ingest(*config.example_manifest, jobs);
    if (config.test_manifest) test = ingest(*config.test_manifest, jobs);

    BuildInputs inputs;
    inputs.train = &train.corpus;
    inputs.examples = examples ? &examples->corpus : nullptr;
    inputs.test = test ? &test->corpus : nullptr;

    BuildResult result = build(config, inputs, pool, model, jobs);

    fs::create_directories(config.output_dir);
    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream out(fs::path(config.output_dir) / name, std::ios::binary);
        if (!out) throw ConfigError("cannot write " + name + " under " + config.output_dir);
        out << content;
    };
    write("dataset.jsonl", result.dataset_jsonl);
    write("dataset.meta.jsonl", result.meta_jsonl);
    write("manifest.json", result.manifest.to_json().dump(2) + "\n");
    return result.manifest;
}

} // namespace tabletask
