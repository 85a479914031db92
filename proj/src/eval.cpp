#include "tabletask/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "tabletask/answers.hpp"
#include "tabletask/errors.hpp"
#include "tabletask/rng.hpp"
#include "tabletask/util.hpp"

namespace tabletask {

const char* to_string(Metric m) {
    switch (m) {
        case Metric::Accuracy: return "accuracy";
        case Metric::F1Binary: return "f1";
        case Metric::F1Set: return "f1";
        case Metric::Recall: return "recall";
    }
    return "accuracy";
}

Metric metric_for(TaskType t) {
    switch (t) {
        case TaskType::MV: return Metric::F1Set;
        case TaskType::CF: return Metric::Accuracy;
        case TaskType::TQA: return Metric::Accuracy;
        case TaskType::CTA: return Metric::F1Set;
        case TaskType::R2R: return Metric::Accuracy;
        case TaskType::EM: return Metric::F1Binary;
        case TaskType::SM: return Metric::Recall;
        case TaskType::DI: return Metric::Accuracy;
        case TaskType::ED: return Metric::F1Set;
        default:
            throw ConfigError(std::string("no evaluation metric for task type ") + to_string(t));
    }
}

// ---------------------------------------------------------------------------
// Answer parsing

std::optional<nlohmann::json> parse_answer(const std::string& completion_text, TaskType t) {
    auto j = extract_final_json(completion_text);
    if (!j) return std::nullopt;
    auto need = [&](const char* field) -> bool { return j->contains(field); };
    switch (t) {
        case TaskType::MV:
            if (!need("column") && !need("row_id") && !need("row")) return std::nullopt;
            return j;
        case TaskType::CF:
            if (!need("column")) return std::nullopt;
            return j;
        case TaskType::TQA:
            if (!need("answer")) return std::nullopt;
            return j;
        case TaskType::CTA:
            if (!need("types")) return std::nullopt;
            return j;
        case TaskType::R2R:
        case TaskType::DI:
            if (!need("value")) return std::nullopt;
            return j;
        case TaskType::EM:
            if (!need("match")) return std::nullopt;
            return j;
        case TaskType::SM:
            if (!need("mapping") || !(*j)["mapping"].is_object()) return std::nullopt;
            return j;
        case TaskType::ED:
            if (!need("erroneous_cell")) return std::nullopt;
            return j;
        default: return j;
    }
}

// ---------------------------------------------------------------------------
// Scoring

namespace {

std::string json_as_string(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

std::set<std::string> answer_set(const nlohmann::json& j, TaskType t) {
    std::set<std::string> out;
    if (t == TaskType::MV) {
        if (j.contains("column")) out.insert(normalize_value(json_as_string(j.at("column"))));
        else if (j.contains("row_id")) out.insert(normalize_row_id(j.at("row_id")));
        else if (j.contains("row")) out.insert(normalize_row_id(j.at("row")));
        return out;
    }
    if (t == TaskType::CTA) {
        const auto& types = j.at("types");
        if (types.is_array())
            for (const auto& v : types) out.insert(normalize_value(json_as_string(v)));
        else out.insert(normalize_value(json_as_string(types)));
        return out;
    }
    if (t == TaskType::ED) {
        const auto& v = j.at("erroneous_cell");
        if (v.is_array())
            for (const auto& e : v) out.insert(normalize_value(json_as_string(e)));
        else out.insert(normalize_value(json_as_string(v)));
        return out;
    }
    return out;
}

struct ScoreAccumulator {
    Metric metric = Metric::Accuracy;
    std::size_t n = 0;
    std::size_t unparsable = 0;
    std::size_t correct = 0;
    std::size_t tp = 0, fp = 0, fn = 0;
    std::size_t set_tp = 0, set_pred = 0, set_gold = 0;
    std::size_t pairs_recovered = 0, pairs_gold = 0;

    void add(TaskType type, const TaskInstance& inst,
             const std::optional<nlohmann::json>& answer) {
        ++n;
        if (!answer) ++unparsable;
        const nlohmann::json& gold = inst.completion.answer;
        switch (metric) {
            case Metric::Accuracy: {
                const char* field = type == TaskType::CF ? "column"
                                    : type == TaskType::TQA ? "answer"
                                                            : "value";
                if (answer && answer->contains(field) &&
                    normalize_value(json_as_string(answer->at(field))) ==
                        normalize_value(json_as_string(gold.at(field))))
                    ++correct;
                break;
            }
            case Metric::F1Binary: {
                bool gold_yes = gold.at("match").get<std::string>() == "yes";
                std::string pred = answer && answer->contains("match")
                                       ? normalize_value(json_as_string(answer->at("match")))
                                       : "";
                bool pred_yes;
                if (pred == "yes") pred_yes = true;
                else if (pred == "no") pred_yes = false;
                else pred_yes = !gold_yes; // unparsable scores as the wrong class
                if (pred_yes && gold_yes) ++tp;
                else if (pred_yes && !gold_yes) ++fp;
                else if (!pred_yes && gold_yes) ++fn;
                break;
            }
            case Metric::F1Set: {
                std::set<std::string> gold_set = answer_set(gold, type);
                std::set<std::string> pred_set =
                    answer ? answer_set(*answer, type) : std::set<std::string>{};
                set_gold += gold_set.size();
                set_pred += pred_set.size();
                for (const auto& v : pred_set)
                    if (gold_set.count(v)) ++set_tp;
                break;
            }
            case Metric::Recall: {
                const auto& gold_map = gold.at("mapping");
                pairs_gold += gold_map.size();
                if (!answer || !answer->contains("mapping")) break;
                const auto& pred_map = answer->at("mapping");
                if (!pred_map.is_object()) break;
                // A pair counts when both endpoints match after trim and
                // case-fold.
                std::map<std::string, std::string> pred_norm;
                for (auto it = pred_map.begin(); it != pred_map.end(); ++it)
                    pred_norm[to_lower(trim(it.key()))] =
                        to_lower(trim(json_as_string(it.value())));
                for (auto it = gold_map.begin(); it != gold_map.end(); ++it) {
                    auto found = pred_norm.find(to_lower(trim(it.key())));
                    if (found != pred_norm.end() &&
                        found->second == to_lower(trim(json_as_string(it.value()))))
                        ++pairs_recovered;
                }
                break;
            }
        }
    }

    double value() const {
        switch (metric) {
            case Metric::Accuracy: return n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0;
            case Metric::F1Binary: {
                if (tp + fp == 0 && tp + fn == 0) return 1.0; // nothing to find, nothing claimed
                double p = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
                double r = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
                return p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
            }
            case Metric::F1Set: {
                if (set_pred == 0 && set_gold == 0) return 1.0;
                double p = set_pred ? static_cast<double>(set_tp) / static_cast<double>(set_pred) : 0.0;
                double r = set_gold ? static_cast<double>(set_tp) / static_cast<double>(set_gold) : 0.0;
                return p + r > 0 ? 2.0 * p * r / (p + r) : 0.0;
            }
            case Metric::Recall:
                return pairs_gold ? static_cast<double>(pairs_recovered) /
                                        static_cast<double>(pairs_gold)
                                  : 1.0;
        }
        return 0.0;
    }
};

} // namespace

double score(const std::vector<TaskInstance>& instances,
             const std::vector<std::optional<nlohmann::json>>& answers, TaskType t) {
    if (instances.size() != answers.size())
        throw LengthMismatch(std::to_string(instances.size()) + " instances vs " +
                             std::to_string(answers.size()) + " answers");
    ScoreAccumulator acc;
    acc.metric = metric_for(t);
    for (std::size_t i = 0; i < instances.size(); ++i) acc.add(t, instances[i], answers[i]);
    return acc.value();
}

// ---------------------------------------------------------------------------
// Report plumbing

namespace {

nlohmann::json variant_json(const VariantResult& v) {
    return {{"template", v.template_kind}, {"format", v.format},   {"value", v.value},
            {"n", v.n},                    {"unparsable", v.unparsable},
            {"provider_errors", v.provider_errors}};
}

VariantResult variant_from_json(const nlohmann::json& j) {
    VariantResult v;
    v.template_kind = j.at("template").get<std::string>();
    v.format = j.at("format").get<std::string>();
    v.value = j.at("value").get<double>();
    v.n = j.at("n").get<std::size_t>();
    v.unparsable = j.value("unparsable", std::size_t{0});
    v.provider_errors = j.value("provider_errors", std::size_t{0});
    return v;
}

} // namespace

nlohmann::json EvalReport::to_json() const {
    nlohmann::json ds = nlohmann::json::array();
    for (const auto& d : datasets) {
        nlohmann::json variants = nlohmann::json::array();
        for (const auto& v : d.variants) variants.push_back(variant_json(v));
        ds.push_back({{"name", d.name},
                      {"task_type", to_string(d.type)},
                      {"metric", to_string(d.metric)},
                      {"value", d.value},
                      {"n", d.n},
                      {"unparsable", d.unparsable},
                      {"provider_errors", d.provider_errors},
                      {"variants", variants}});
    }
    return {{"settings", settings}, {"datasets", ds}};
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
    EvalReport r;
    r.settings = j.value("settings", nlohmann::json::object());
    for (const auto& d : j.at("datasets")) {
        DatasetResult dr;
        dr.name = d.at("name").get<std::string>();
        dr.type = task_type_from_string(d.at("task_type").get<std::string>());
        dr.metric = metric_for(dr.type);
        dr.value = d.at("value").get<double>();
        dr.n = d.at("n").get<std::size_t>();
        dr.unparsable = d.value("unparsable", std::size_t{0});
        dr.provider_errors = d.value("provider_errors", std::size_t{0});
        for (const auto& v : d.at("variants")) dr.variants.push_back(variant_from_json(v));
        r.datasets.push_back(std::move(dr));
    }
    return r;
}

EvalReport EvalReport::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open report: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("report is not valid JSON: " + path);
    return from_json(j);
}

std::string EvalReport::to_text() const {
    std::ostringstream out;
    out << "dataset                         metric    value    n      unparsable\n";
    out << "------------------------------  --------  -------  -----  ----------\n";
    char buf[160];
    for (const auto& d : datasets) {
        std::snprintf(buf, sizeof(buf), "%-30s  %-8s  %7.3f  %5zu  %10zu\n", d.name.c_str(),
                      to_string(d.metric), d.value, d.n, d.unparsable);
        out << buf;
        for (const auto& v : d.variants) {
            std::snprintf(buf, sizeof(buf), "  %-20s %-8s %7.3f  %5zu  %10zu\n",
                          v.template_kind.c_str(), v.format.c_str(), v.value, v.n, v.unparsable);
            out << buf;
        }
    }
    return out.str();
}

// ---------------------------------------------------------------------------
// Harness

namespace {

struct VariantOutcome {
    VariantResult result;
    ScoreAccumulator acc;
};

DatasetResult run_variants(const std::vector<TaskInstance>& instances,
                           const std::vector<TaskInstance>& bank, const std::string& name,
                           ModelClient& client, const EvalOptions& options) {
    if (instances.empty()) throw InsufficientTables("no instances for dataset " + name);
    TaskType type = instances[0].type;

    DatasetResult out;
    out.name = name;
    out.type = type;
    out.metric = metric_for(type);

    ScoreAccumulator pooled;
    pooled.metric = out.metric;

    for (const auto& kind : options.templates) {
        for (const auto& format : options.formats) {
            std::vector<CompletionRequest> reqs(instances.size());
            std::vector<std::optional<nlohmann::json>> answers(instances.size());
            parallel_for(instances.size(), options.jobs, [&](std::size_t i) {
                PromptRecord rec =
                    render_template(instances[i], kind, bank,
                                    derive_seed(options.seed, instances[i].source_digest,
                                                "render:" + kind.name()),
                                    format);
                CompletionRequest req;
                req.model = client.model_id();
                req.temperature = options.temperature;
                req.max_tokens = options.max_tokens;
                req.prompt = options.embed_markers
                                 ? embed_eval_marker(rec.prompt, rec.completion, i)
                                 : rec.prompt;
                reqs[i] = std::move(req);
            });
            auto responses = client.batch_complete(reqs);

            VariantOutcome vo;
            vo.acc.metric = out.metric;
            vo.result.template_kind = kind.name();
            vo.result.format = to_string(format);
            for (std::size_t i = 0; i < instances.size(); ++i) {
                if (responses[i].finish == FinishReason::error) ++vo.result.provider_errors;
                answers[i] = parse_answer(responses[i].text, type);
                vo.acc.add(type, instances[i], answers[i]);
                pooled.add(type, instances[i], answers[i]);
            }
            vo.result.value = vo.acc.value();
            vo.result.n = vo.acc.n;
            vo.result.unparsable = vo.acc.unparsable;
            out.variants.push_back(vo.result);
            out.provider_errors += vo.result.provider_errors;
        }
    }
    out.value = pooled.value();
    out.n = pooled.n;
    out.unparsable = pooled.unparsable;
    return out;
}

nlohmann::json settings_snapshot(ModelClient& client, const EvalOptions& options) {
    nlohmann::json templates = nlohmann::json::array();
    for (const auto& t : options.templates) templates.push_back(t.name());
    nlohmann::json formats = nlohmann::json::array();
    for (const auto& f : options.formats) formats.push_back(to_string(f));
    return {{"model", client.model_id()},
            {"temperature", options.temperature},
            {"max_tokens", options.max_tokens},
            {"templates", templates},
            {"formats", formats},
            {"seed", options.seed},
            {"markers", options.embed_markers}};
}

std::size_t bank_target(const EvalOptions& options) {
    std::size_t k = 0;
    for (const auto& t : options.templates)
        if (t.few_shot) k = std::max(k, t.k);
    return k ? std::max<std::size_t>(2 * k, 4) : 0;
}

} // namespace

DatasetResult eval_dataset(const std::vector<TaskInstance>& instances,
                           const std::vector<TaskInstance>& example_bank, const std::string& name,
                           ModelClient& client, const EvalOptions& options) {
    return run_variants(instances, example_bank, name, client, options);
}

EvalReport run_eval(const ProbeSpec& source, ModelClient& client, const EvalOptions& options) {
    if (!source.corpus) throw ConfigError("probe needs a corpus");
    if (!is_test_task(source.type))
        throw ConfigError(std::string(to_string(source.type)) +
                          " is train-only and cannot be used as a probe");
    if (!is_synthesized_task(source.type))
        throw ConfigError(std::string(to_string(source.type)) +
                          " probes come from benchmark manifests");

    SynthContext ctx = options.synth;
    ctx.title_bounds = source.corpus->title_bounds();

    std::vector<std::size_t> eligible_idx;
    for (std::size_t i = 0; i < source.corpus->size(); ++i)
        if (eligible(source.type, source.corpus->table(i), ctx)) eligible_idx.push_back(i);

    std::size_t bank_need = bank_target(options);
    if (eligible_idx.size() < source.n + bank_need)
        throw InsufficientTables("probe needs " + std::to_string(source.n + bank_need) +
                                 " eligible tables, corpus has " +
                                 std::to_string(eligible_idx.size()));
    Rng rng(options.seed);
    rng.shuffle(eligible_idx);

    auto synth_at = [&](std::size_t pos) {
        std::size_t ti = eligible_idx[pos];
        uint64_t seed =
            derive_seed(options.seed, source.corpus->digest(ti), to_string(source.type));
        return synthesize(source.type, source.corpus->table(ti), seed, ctx, source.task_params);
    };

    std::vector<TaskInstance> instances(source.n);
    parallel_for(source.n, options.jobs, [&](std::size_t i) { instances[i] = synth_at(i); });
    std::vector<TaskInstance> bank(bank_need);
    parallel_for(bank_need, options.jobs,
                 [&](std::size_t i) { bank[i] = synth_at(source.n + i); });

    std::string name = source.name;
    if (name.empty()) {
        name = std::string("probe:") + to_string(source.type);
        for (auto it = source.task_params.begin(); it != source.task_params.end(); ++it)
            if (it.value().is_string()) name += ":" + it.value().get<std::string>();
    }

    EvalReport report;
    report.settings = settings_snapshot(client, options);
    report.settings["source"] = name;
    report.datasets.push_back(run_variants(instances, bank, name, client, options));
    return report;
}

EvalReport run_eval(const BenchmarkSpec& source, ModelClient& client,
                    const EvalOptions& options) {
    auto instances = load_benchmark(source.manifest_path, source.type);
    std::size_t bank_need = bank_target(options);
    std::vector<TaskInstance> bank;
    if (source.limit && *source.limit < instances.size()) {
        bank.assign(instances.begin() + static_cast<std::ptrdiff_t>(*source.limit),
                    instances.end());
        instances.resize(*source.limit);
    }
    if (bank.size() < bank_need)
        bank.insert(bank.end(), instances.begin(),
                    instances.begin() +
                        static_cast<std::ptrdiff_t>(std::min(instances.size(), bank_need)));

    std::string name =
        source.name.empty() ? std::string("benchmark:") + to_string(source.type) : source.name;
    EvalReport report;
    report.settings = settings_snapshot(client, options);
    report.settings["source"] = name;
    report.settings["manifest"] = source.manifest_path;
    report.datasets.push_back(run_variants(instances, bank, name, client, options));
    return report;
}

// ---------------------------------------------------------------------------
// Report comparison

nlohmann::json compare_reports(const EvalReport& baseline, const EvalReport& candidate) {
    auto names = [](const EvalReport& r) {
        std::set<std::string> out;
        for (const auto& d : r.datasets) out.insert(d.name);
        return out;
    };
    if (names(baseline) != names(candidate))
        throw AxisMismatch("reports cover different datasets");

    auto variant_axes = [](const DatasetResult& d) {
        std::set<std::string> out;
        for (const auto& v : d.variants) out.insert(v.template_kind + "/" + v.format);
        return out;
    };

    nlohmann::json rows = nlohmann::json::array();
    std::size_t wins = 0, ties = 0, losses = 0;
    for (const auto& b : baseline.datasets) {
        const DatasetResult* c = nullptr;
        for (const auto& d : candidate.datasets)
            if (d.name == b.name) c = &d;
        if (variant_axes(b) != variant_axes(*c))
            throw AxisMismatch("dataset " + b.name + " has different variant axes");
        double delta = c->value - b.value;
        constexpr double eps = 1e-12;
        if (delta > eps) ++wins;
        else if (delta < -eps) ++losses;
        else ++ties;
        rows.push_back({{"name", b.name},
                        {"metric", to_string(b.metric)},
                        {"baseline", b.value},
                        {"candidate", c->value},
                        {"delta", delta}});
    }
    return {{"datasets", rows}, {"wins", wins}, {"ties", ties}, {"losses", losses}};
}

} // namespace tabletask
