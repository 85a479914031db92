// tabletask — synthesize instruction-tuning data from real tables and
// evaluate model completions on table tasks.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "tabletask/builder.hpp"
#include "tabletask/corpus.hpp"
#include "tabletask/errors.hpp"
#include "tabletask/eval.hpp"
#include "tabletask/model_client.hpp"
#include "tabletask/synth.hpp"

namespace fs = std::filesystem;
using namespace tabletask;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUser = 2;

std::string task_name(const std::string& s) {
    std::string out;
    for (char c : s) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    if (auto dir = fs::path(path).parent_path(); !dir.empty()) fs::create_directories(dir);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << content;
}

// Every command leaves a deterministic settings snapshot next to its
// primary output so runs are self-describing and reproducible.
void write_settings(const std::string& next_to, const nlohmann::json& settings) {
    write_file(next_to + ".settings.json", settings.dump(2) + "\n");
}

std::vector<SerializationFormat> parse_formats(const std::string& csv) {
    std::vector<SerializationFormat> out;
    for (const auto& part : split(csv, ','))
        if (!trim(part).empty()) out.push_back(format_from_string(trim(part)));
    if (out.empty()) out.push_back(SerializationFormat::Markdown);
    return out;
}

std::vector<TemplateKind> parse_templates(const std::string& spec, std::size_t k) {
    if (spec == "zero") return {TemplateKind{false, k}};
    if (spec == "few") return {TemplateKind{true, k}};
    if (spec == "both") return {TemplateKind{false, k}, TemplateKind{true, k}};
    throw ConfigError("--template must be zero, few, or both");
}

struct ProviderArgs {
    std::string config_path;
    bool have() const { return !config_path.empty(); }

    std::unique_ptr<ModelClient> make(bool& is_mock) const {
        ProviderConfig cfg = ProviderConfig::load(config_path);
        is_mock = cfg.provider == "mock";
        return make_client(cfg);
    }
};

int cmd_ingest(const std::string& manifest_path, const std::string& out_path, unsigned jobs) {
    CorpusManifest manifest = CorpusManifest::load(manifest_path);
    IngestResult result = ingest(manifest, jobs);
    nlohmann::json index = corpus_index_json(result.corpus, result.report);
    write_file(out_path, index.dump(2) + "\n");
    write_settings(out_path,
                   {{"command", "ingest"}, {"manifest", manifest.to_json()}, {"jobs", jobs}});
    std::cout << result.report.to_json().dump(2) << "\n";
    std::cerr << "wrote " << out_path << " (" << result.corpus.size() << " tables)\n";
    return kExitOk;
}

int cmd_synth(const std::string& task, const std::string& table_path, uint64_t seed,
              const nlohmann::json& knobs, const std::string& format) {
    TaskType type = task_type_from_string(task);
    std::string text;
    {
        std::ifstream in(table_path, std::ios::binary);
        if (!in) throw ConfigError("cannot open table file: " + table_path);
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    std::string ext = to_lower(fs::path(table_path).extension().string());
    Table t = parse(text, ext == ".csv" ? SerializationFormat::CSV : SerializationFormat::JSON);
    SynthContext ctx;
    TaskInstance inst = synthesize(type, t, seed, ctx, knobs);
    PromptRecord rec =
        render_template(inst, TemplateKind{false, 2}, {}, seed, format_from_string(format));
    nlohmann::json out = inst.to_json();
    out["rendered_prompt"] = rec.prompt;
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_build(const std::string& config_path, std::optional<uint64_t> seed_override,
              const std::string& out_dir_override, const std::string& format_override,
              unsigned jobs, const std::string& provider_path, const std::string& pool_path) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open build config: " + config_path);
    nlohmann::json raw = nlohmann::json::parse(in, nullptr, false);
    if (raw.is_discarded()) throw ConfigError("build config is not valid JSON: " + config_path);
    if (!raw.contains("seed") && !seed_override)
        throw ConfigError("a seed is required: set \"seed\" in the config or pass --seed");
    if (seed_override) raw["seed"] = *seed_override;
    if (!out_dir_override.empty()) raw["output_dir"] = out_dir_override;
    if (!format_override.empty()) raw["format"] = format_override;
    BuildConfig config = BuildConfig::from_json(raw);

    InstructionPool pool =
        pool_path.empty() ? InstructionPool::builtin() : InstructionPool::load(pool_path);
    std::unique_ptr<ModelClient> client;
    if (!provider_path.empty()) {
        bool is_mock = false;
        client = ProviderArgs{provider_path}.make(is_mock);
    }

    DatasetManifest manifest = build_to_files(config, pool, client.get(), jobs);
    write_settings((fs::path(config.output_dir) / "dataset.jsonl").string(),
                   {{"command", "build"},
                    {"config", config.to_json()},
                    {"jobs", jobs},
                    {"instruction_pool", pool_path.empty() ? "builtin" : pool_path}});
    std::cout << manifest.to_json().dump(2) << "\n";
    return kExitOk;
}

int run_probe_or_eval(const ProbeSpec* probe, const BenchmarkSpec* bench,
                      const ProviderArgs& provider, const EvalOptions& base_options,
                      const std::string& out_path, const std::string& probe_out) {
    EvalOptions options = base_options;
    if (!provider.have()) {
        // No provider: emit the rendered probe dataset instead of a report.
        if (!probe) throw ConfigError("benchmark evaluation needs --provider");
        SynthContext ctx = options.synth;
        ctx.title_bounds = probe->corpus->title_bounds();
        std::vector<std::size_t> eligible_idx;
        for (std::size_t i = 0; i < probe->corpus->size(); ++i)
            if (eligible(probe->type, probe->corpus->table(i), ctx)) eligible_idx.push_back(i);
        if (eligible_idx.size() < probe->n)
            throw InsufficientTables("corpus has " + std::to_string(eligible_idx.size()) +
                                     " eligible tables, need " + std::to_string(probe->n));
        Rng rng(options.seed);
        rng.shuffle(eligible_idx);
        std::string lines;
        for (std::size_t i = 0; i < probe->n; ++i) {
            std::size_t ti = eligible_idx[i];
            uint64_t seed =
                derive_seed(options.seed, probe->corpus->digest(ti), to_string(probe->type));
            TaskInstance inst =
                synthesize(probe->type, probe->corpus->table(ti), seed, ctx, probe->task_params);
            PromptRecord rec =
                render_template(inst, options.templates.front(), {}, seed, options.formats.front());
            nlohmann::json line = {{"prompt", rec.prompt},
                                   {"completion", rec.completion},
                                   {"task_type", to_string(rec.task_type)},
                                   {"source_digest", rec.source_digest},
                                   {"seed", rec.seed}};
            lines += line.dump() + "\n";
        }
        std::string path = probe_out.empty() ? "probe.jsonl" : probe_out;
        write_file(path, lines);
        write_settings(path, {{"command", "probe"},
                              {"task", to_string(probe->type)},
                              {"n", probe->n},
                              {"seed", options.seed},
                              {"params", probe->task_params}});
        std::cerr << "wrote " << path << " (" << probe->n << " instances)\n";
        return kExitOk;
    }

    bool is_mock = false;
    auto client = provider.make(is_mock);
    if (is_mock) options.embed_markers = true;
    EvalReport report =
        probe ? run_eval(*probe, *client, options) : run_eval(*bench, *client, options);
    std::cout << report.to_text();
    if (!out_path.empty()) {
        write_file(out_path, report.to_json().dump(2) + "\n");
        write_settings(out_path,
                       {{"command", probe ? "probe" : "eval"}, {"settings", report.settings}});
        std::cerr << "wrote " << out_path << "\n";
    }
    return kExitOk;
}

bool is_user_error(const Error& e) {
    static const std::set<std::string> codes = {
        "ConfigError",        "NoTablesFound",       "InsufficientCorpus",
        "InsufficientTables", "ManifestSchemaError", "DisjointnessViolation",
        "MalformedTable",     "MissingTitle",        "UnknownColumn",
        "Auth",
    };
    return codes.count(e.code()) > 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tabletask: synthesize table-task training data and evaluate table-task "
                 "completions"};
    app.require_subcommand(1);

    unsigned jobs = 1;
    app.add_option("--jobs", jobs, "worker threads")->capture_default_str();

    auto* ingest_cmd = app.add_subcommand("ingest", "ingest table files into a tagged corpus");
    std::string ingest_manifest, ingest_out = "corpus.index.json";
    ingest_cmd->add_option("--manifest", ingest_manifest, "corpus manifest JSON")->required();
    ingest_cmd->add_option("--out", ingest_out, "corpus index output path");

    auto* synth_cmd = app.add_subcommand("synth", "synthesize one instance for debugging");
    std::string synth_task, synth_table, synth_variant, synth_question, synth_axis;
    std::string synth_format = "markdown";
    uint64_t synth_seed = 0;
    std::size_t synth_k = 0;
    synth_cmd->add_option("--task", synth_task, "task type (e.g. TS, DI, RCSW)")->required();
    synth_cmd->add_option("--table", synth_table, "table file (.csv or .json)")->required();
    synth_cmd->add_option("--seed", synth_seed, "seed")->required();
    synth_cmd->add_option("--variant", synth_variant, "missing-value variant (with_sep|no_sep)");
    synth_cmd->add_option("--question", synth_question, "missing-value question (column|row)");
    synth_cmd->add_option("--axis", synth_axis, "axis for swap/filter/sort (row|column)");
    synth_cmd->add_option("--k", synth_k, "k for column/row augmentation and schema matching");
    synth_cmd->add_option("--format", synth_format, "payload serialization format");

    auto* build_cmd = app.add_subcommand("build", "build a fine-tuning dataset");
    std::string build_config, build_out_dir, build_provider, build_pool, build_format;
    std::optional<uint64_t> build_seed;
    build_cmd->add_option("--config", build_config, "build config JSON")->required();
    build_cmd->add_option("--seed", build_seed, "seed override (required if absent from config)");
    build_cmd->add_option("--out-dir", build_out_dir, "output directory override");
    build_cmd->add_option("--format", build_format, "prompt serialization format override");
    build_cmd->add_option("--provider", build_provider,
                          "provider config for model-assisted augmentation");
    build_cmd->add_option("--instruction-pool", build_pool, "instruction pool JSON overlay");

    auto* probe_cmd = app.add_subcommand("probe", "synthesize (and optionally run) a probe set");
    std::string probe_task = "cf", probe_corpus, probe_variant, probe_question;
    std::string probe_provider, probe_template = "zero", probe_formats = "markdown";
    std::string probe_report_out, probe_dataset_out;
    std::size_t probe_n = 1000, probe_k = 2;
    uint64_t probe_seed = 0;
    probe_cmd->add_option("--task", probe_task, "probe task type (mv, cf, di, ...)")
        ->capture_default_str();
    probe_cmd->add_option("--corpus", probe_corpus, "corpus manifest JSON")->required();
    probe_cmd->add_option("--n", probe_n, "instances")->capture_default_str();
    probe_cmd->add_option("--seed", probe_seed, "seed")->required();
    probe_cmd->add_option("--variant", probe_variant, "missing-value variant (with_sep|no_sep)");
    probe_cmd->add_option("--question", probe_question, "missing-value question (column|row)");
    probe_cmd->add_option("--provider", probe_provider, "provider config (omit to emit JSONL)");
    probe_cmd->add_option("--template", probe_template, "zero|few|both")->capture_default_str();
    probe_cmd->add_option("--format", probe_formats, "comma list: markdown,csv,json")
        ->capture_default_str();
    probe_cmd->add_option("--few-shot-k", probe_k, "examples per few-shot prompt")
        ->capture_default_str();
    probe_cmd->add_option("--out", probe_report_out, "eval report output path");
    probe_cmd->add_option("--dataset-out", probe_dataset_out, "probe dataset output path");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a provider on a benchmark manifest");
    std::string eval_task, eval_manifest, eval_provider, eval_template = "zero";
    std::string eval_formats = "markdown", eval_out;
    std::optional<std::size_t> eval_limit;
    std::size_t eval_k = 2;
    uint64_t eval_seed = 0;
    eval_cmd->add_option("--task", eval_task, "task type (em, tqa, cta, ns)")->required();
    eval_cmd->add_option("--benchmark", eval_manifest, "benchmark manifest JSONL")->required();
    eval_cmd->add_option("--provider", eval_provider, "provider config JSON")->required();
    eval_cmd->add_option("--seed", eval_seed, "seed")->capture_default_str();
    eval_cmd->add_option("--template", eval_template, "zero|few|both")->capture_default_str();
    eval_cmd->add_option("--format", eval_formats, "comma list: markdown,csv,json")
        ->capture_default_str();
    eval_cmd->add_option("--few-shot-k", eval_k, "examples per few-shot prompt")
        ->capture_default_str();
    eval_cmd->add_option("--limit", eval_limit, "evaluate only the first N records");
    eval_cmd->add_option("--out", eval_out, "eval report output path");

    auto* compare_cmd = app.add_subcommand("compare", "diff two eval reports");
    std::string cmp_baseline, cmp_candidate, cmp_out;
    compare_cmd->add_option("--baseline", cmp_baseline, "baseline report JSON")->required();
    compare_cmd->add_option("--candidate", cmp_candidate, "candidate report JSON")->required();
    compare_cmd->add_option("--out", cmp_out, "diff output path");

    auto* report_cmd = app.add_subcommand("report", "render a saved eval report as text");
    std::string report_in;
    report_cmd->add_option("--in", report_in, "report JSON path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUser;
    }

    try {
        if (*ingest_cmd) return cmd_ingest(ingest_manifest, ingest_out, jobs);

        if (*synth_cmd) {
            nlohmann::json knobs = nlohmann::json::object();
            if (!synth_variant.empty()) knobs["variant"] = synth_variant;
            if (!synth_question.empty()) knobs["question"] = synth_question;
            if (!synth_axis.empty()) knobs["axis"] = synth_axis;
            if (synth_k > 0) knobs["k"] = synth_k;
            return cmd_synth(task_name(synth_task), synth_table, synth_seed, knobs, synth_format);
        }

        if (*build_cmd)
            return cmd_build(build_config, build_seed, build_out_dir, build_format, jobs,
                             build_provider, build_pool);

        if (*probe_cmd) {
            CorpusManifest manifest = CorpusManifest::load(probe_corpus);
            IngestResult ingested = ingest(manifest, jobs);
            ProbeSpec spec;
            spec.type = task_type_from_string(task_name(probe_task));
            spec.corpus = &ingested.corpus;
            spec.n = probe_n;
            if (!probe_variant.empty()) spec.task_params["variant"] = probe_variant;
            if (!probe_question.empty()) spec.task_params["question"] = probe_question;
            EvalOptions options;
            options.seed = probe_seed;
            options.jobs = jobs;
            options.few_shot_k = probe_k;
            options.templates = parse_templates(probe_template, probe_k);
            options.formats = parse_formats(probe_formats);
            return run_probe_or_eval(&spec, nullptr, ProviderArgs{probe_provider}, options,
                                     probe_report_out, probe_dataset_out);
        }

        if (*eval_cmd) {
            BenchmarkSpec spec;
            spec.type = task_type_from_string(task_name(eval_task));
            spec.manifest_path = eval_manifest;
            spec.limit = eval_limit;
            EvalOptions options;
            options.seed = eval_seed;
            options.jobs = jobs;
            options.few_shot_k = eval_k;
            options.templates = parse_templates(eval_template, eval_k);
            options.formats = parse_formats(eval_formats);
            return run_probe_or_eval(nullptr, &spec, ProviderArgs{eval_provider}, options,
                                     eval_out, "");
        }

        if (*compare_cmd) {
            EvalReport baseline = EvalReport::load(cmp_baseline);
            EvalReport candidate = EvalReport::load(cmp_candidate);
            nlohmann::json diff = compare_reports(baseline, candidate);
            std::cout << diff.dump(2) << "\n";
            if (!cmp_out.empty()) {
                write_file(cmp_out, diff.dump(2) + "\n");
                write_settings(cmp_out, {{"command", "compare"},
                                         {"baseline", cmp_baseline},
                                         {"candidate", cmp_candidate}});
            }
            return kExitOk;
        }

        if (*report_cmd) {
            std::cout << EvalReport::load(report_in).to_text();
            return kExitOk;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_user_error(e) ? kExitUser : kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUser;
}
