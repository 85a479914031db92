#include "doctest.h"

#include <algorithm>

#include "tabletask/errors.hpp"
#include "tabletask/eval.hpp"

#include "test_support.hpp"

using namespace tabletask;
using namespace tabletask::testing;

namespace {

TaskInstance em_gold(const std::string& match) {
    TaskInstance t;
    t.type = TaskType::EM;
    t.completion.kind = CompletionKind::json_answer;
    t.completion.answer = {{"match", match}};
    t.completion.body = t.completion.answer.dump();
    return t;
}

TaskInstance value_gold(TaskType type, const std::string& field, const nlohmann::json& v) {
    TaskInstance t;
    t.type = type;
    t.completion.kind = CompletionKind::json_answer;
    t.completion.answer = {{field, v}};
    t.completion.body = t.completion.answer.dump();
    return t;
}

std::optional<nlohmann::json> ans(const nlohmann::json& j) { return j; }

} // namespace

TEST_CASE("parse_answer extracts the final JSON block, tolerating reasoning") {
    auto a = parse_answer("The value 93 appears under music.\n{\"column\": \"music\"}",
                          TaskType::CF);
    REQUIRE(a.has_value());
    CHECK((*a)["column"] == "music");

    auto b = parse_answer("Thinking... {\"match\": \"yes\"} wait, no.\n{\"match\": \"no\"}",
                          TaskType::EM);
    REQUIRE(b.has_value());
    CHECK((*b)["match"] == "no"); // last JSON wins

    CHECK(!parse_answer("no json here at all", TaskType::CF).has_value());
    CHECK(!parse_answer("{\"wrong_field\": 1}", TaskType::CF).has_value());
    CHECK(!parse_answer("{\"mapping\": 3}", TaskType::SM).has_value());

    // braces inside strings do not confuse the extractor
    auto c = parse_answer("{\"value\": \"curly } brace\"}", TaskType::DI);
    REQUIRE(c.has_value());
    CHECK((*c)["value"] == "curly } brace");
}

TEST_CASE("binary F1 fixture: P=0.8, R=1.0 gives 0.888888889") {
    std::vector<TaskInstance> gold;
    std::vector<std::optional<nlohmann::json>> preds;
    for (int i = 0; i < 8; ++i) {
        gold.push_back(em_gold("yes"));
        preds.push_back(ans({{"match", "yes"}}));
    }
    for (int i = 0; i < 2; ++i) {
        gold.push_back(em_gold("no"));
        preds.push_back(ans({{"match", "yes"}}));
    }
    double f1 = score(gold, preds, TaskType::EM);
    CHECK(f1 == doctest::Approx(0.888888889).epsilon(1e-9));

    // all correct -> 1.0
    std::vector<std::optional<nlohmann::json>> perfect;
    for (const auto& g : gold) perfect.push_back(ans(g.completion.answer));
    CHECK(score(gold, perfect, TaskType::EM) == doctest::Approx(1.0));
}

TEST_CASE("accuracy fixture: 7 of 10 exact matches scores 0.7") {
    std::vector<TaskInstance> gold;
    std::vector<std::optional<nlohmann::json>> preds;
    for (int i = 0; i < 10; ++i) {
        gold.push_back(value_gold(TaskType::DI, "value", "v" + std::to_string(i)));
        if (i < 7) preds.push_back(ans({{"value", "v" + std::to_string(i)}}));
        else preds.push_back(ans({{"value", "wrong"}}));
    }
    CHECK(score(gold, preds, TaskType::DI) == doctest::Approx(0.7));
}

TEST_CASE("accuracy normalization: trim, case-fold, thousands separators") {
    std::vector<TaskInstance> gold = {value_gold(TaskType::DI, "value", "19,373,586"),
                                      value_gold(TaskType::DI, "value", "Asia")};
    std::vector<std::optional<nlohmann::json>> preds = {ans({{"value", "19373586"}}),
                                                        ans({{"value", "  asia "}})};
    CHECK(score(gold, preds, TaskType::DI) == doctest::Approx(1.0));
}

TEST_CASE("unparsable answers count in the denominator") {
    std::vector<TaskInstance> gold;
    std::vector<std::optional<nlohmann::json>> preds;
    for (int i = 0; i < 10; ++i) {
        gold.push_back(value_gold(TaskType::CF, "column", "music"));
        if (i < 3) preds.push_back(std::nullopt);
        else preds.push_back(ans({{"column", "music"}}));
    }
    CHECK(score(gold, preds, TaskType::CF) == doctest::Approx(0.7));
}

TEST_CASE("set F1 for CTA multi-type answers") {
    std::vector<TaskInstance> gold = {
        value_gold(TaskType::CTA, "types", nlohmann::json::array({"city", "location"})),
        value_gold(TaskType::CTA, "types", nlohmann::json::array({"person"}))};
    std::vector<std::optional<nlohmann::json>> preds = {
        ans({{"types", {"city"}}}),
        ans({{"types", {"person"}}})};
    // tp=2, pred=2, gold=3 -> P=1, R=2/3, F1=0.8
    CHECK(score(gold, preds, TaskType::CTA) == doctest::Approx(0.8));
}

TEST_CASE("MV scored as singleton-set F1 over the asked component") {
    std::vector<TaskInstance> gold = {value_gold(TaskType::MV, "row_id", 2),
                                      value_gold(TaskType::MV, "column", "Continent")};
    std::vector<std::optional<nlohmann::json>> preds = {ans({{"row_id", "row-2"}}),
                                                        ans({{"column", "continent"}})};
    CHECK(score(gold, preds, TaskType::MV) == doctest::Approx(1.0));
}

TEST_CASE("SM recall counts recovered gold pairs") {
    TaskInstance sm;
    sm.type = TaskType::SM;
    sm.completion.answer = {{"mapping", {{"company names", "enterprises"},
                                         {"emp-id", "employee identifier"}}}};
    sm.completion.body = sm.completion.answer.dump();
    std::vector<TaskInstance> gold = {sm};
    std::vector<std::optional<nlohmann::json>> preds = {
        ans({{"mapping", {{"company names", "enterprises"}, {"emp-id", "wrong"}}}})};
    CHECK(score(gold, preds, TaskType::SM) == doctest::Approx(0.5));
}

TEST_CASE("scoring is permutation invariant") {
    Rng rng(3);
    std::vector<TaskInstance> gold;
    std::vector<std::optional<nlohmann::json>> preds;
    for (int i = 0; i < 20; ++i) {
        gold.push_back(em_gold(i % 3 ? "yes" : "no"));
        preds.push_back(i % 2 ? ans({{"match", "yes"}}) : ans({{"match", "no"}}));
    }
    double base = score(gold, preds, TaskType::EM);
    std::vector<std::size_t> perm(gold.size());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::vector<TaskInstance> g2;
    std::vector<std::optional<nlohmann::json>> p2;
    for (std::size_t i : perm) {
        g2.push_back(gold[i]);
        p2.push_back(preds[i]);
    }
    CHECK(score(g2, p2, TaskType::EM) == doctest::Approx(base));

    CHECK_THROWS_AS(score(gold, {}, TaskType::EM), LengthMismatch);
}

TEST_CASE("perfect-oracle mock reports 1.0 on a CF probe") {
    Rng rng(50);
    Corpus corpus = make_corpus(60, rng);
    ProbeSpec spec;
    spec.type = TaskType::CF;
    spec.corpus = &corpus;
    spec.n = 40;
    auto client = ScriptedMockClient::echo_gold();
    EvalOptions options;
    options.seed = 5;
    options.embed_markers = true;
    EvalReport report = run_eval(spec, *client, options);
    REQUIRE(report.datasets.size() == 1);
    CHECK(report.datasets[0].value == doctest::Approx(1.0));
    CHECK(report.datasets[0].n == 40);
    CHECK(report.datasets[0].unparsable == 0);
}

TEST_CASE("fixed-accuracy mock lands exactly on the configured fraction") {
    Rng rng(51);
    Corpus corpus = make_corpus(120, rng);
    ProbeSpec spec;
    spec.type = TaskType::CF;
    spec.corpus = &corpus;
    spec.n = 100;
    ProviderConfig cfg;
    cfg.provider = "mock";
    cfg.mock_mode = "fraction_correct";
    cfg.correct_fraction = 0.46;
    ScriptedMockClient client(cfg);
    EvalOptions options;
    options.seed = 6;
    options.embed_markers = true;
    EvalReport report = run_eval(spec, client, options);
    CHECK(report.datasets[0].value == doctest::Approx(0.46).epsilon(1e-12));
}

TEST_CASE("the probe scoring punishes a scripted wrong answer") {
    // A mock that answers the student-table probe with "art" instead of
    // "music" scores zero on that instance.
    std::vector<TaskInstance> instances = {value_gold(TaskType::CF, "column", "music")};
    std::vector<std::optional<nlohmann::json>> preds = {ans({{"column", "art"}})};
    CHECK(score(instances, preds, TaskType::CF) == doctest::Approx(0.0));
}

TEST_CASE("format axis: identical metrics under a format-insensitive mock") {
    Rng rng(52);
    Corpus corpus = make_corpus(50, rng);
    ProbeSpec spec;
    spec.type = TaskType::DI;
    spec.corpus = &corpus;
    spec.n = 20;
    auto client = ScriptedMockClient::echo_gold();
    EvalOptions options;
    options.seed = 8;
    options.embed_markers = true;
    options.formats = {SerializationFormat::Markdown, SerializationFormat::CSV,
                       SerializationFormat::JSON};
    EvalReport report = run_eval(spec, *client, options);
    REQUIRE(report.datasets[0].variants.size() == 3);
    for (const auto& v : report.datasets[0].variants) {
        CHECK(v.value == doctest::Approx(report.datasets[0].variants[0].value));
        CHECK(v.n == 20);
    }
}

TEST_CASE("few-shot and zero-shot variants are reported separately") {
    Rng rng(53);
    Corpus corpus = make_corpus(60, rng);
    ProbeSpec spec;
    spec.type = TaskType::DI;
    spec.corpus = &corpus;
    spec.n = 10;
    auto client = ScriptedMockClient::echo_gold();
    EvalOptions options;
    options.seed = 9;
    options.embed_markers = true;
    options.templates = {TemplateKind{false, 2}, TemplateKind{true, 2}};
    EvalReport report = run_eval(spec, *client, options);
    REQUIRE(report.datasets[0].variants.size() == 2);
    CHECK(report.datasets[0].variants[0].template_kind == "zero_shot");
    CHECK(report.datasets[0].variants[1].template_kind == "few_shot:2");
    CHECK(report.datasets[0].n == 20); // pooled across variants
}

TEST_CASE("provider errors are scored wrong and counted") {
    std::vector<TaskInstance> instances;
    for (int i = 0; i < 4; ++i) {
        TaskInstance di = value_gold(TaskType::DI, "value", "v");
        di.type = TaskType::DI;
        Table t = student_table();
        di.input.tables = {t};
        di.source_digest = content_hash(t) + std::to_string(i);
        di.instruction = "Fill the blank.";
        instances.push_back(di);
    }
    ProviderConfig cfg;
    cfg.provider = "mock";
    cfg.mock_mode = "script";
    cfg.max_attempts = 1;
    cfg.script = {{{"text", "{\"value\": \"v\"}"}},
                  {{"error", "Transport"}},
                  {{"text", "{\"value\": \"v\"}"}},
                  {{"text", "{\"value\": \"v\"}"}}};
    cfg.concurrency = 1;
    ScriptedMockClient client(cfg);
    EvalOptions options;
    options.jobs = 1;
    DatasetResult result = eval_dataset(instances, {}, "scripted", client, options);
    CHECK(result.provider_errors == 1);
    CHECK(result.unparsable == 1);
    CHECK(result.value == doctest::Approx(0.75));
}

TEST_CASE("probe rejects train-only task types") {
    Rng rng(54);
    Corpus corpus = make_corpus(10, rng);
    ProbeSpec spec;
    spec.type = TaskType::TS;
    spec.corpus = &corpus;
    spec.n = 2;
    auto client = ScriptedMockClient::echo_gold();
    EvalOptions options;
    CHECK_THROWS_AS(run_eval(spec, *client, options), ConfigError);
}

TEST_CASE("report json round-trips and comparisons line up") {
    Rng rng(55);
    Corpus corpus = make_corpus(40, rng);
    ProbeSpec spec;
    spec.type = TaskType::CF;
    spec.corpus = &corpus;
    spec.n = 10;
    auto client = ScriptedMockClient::echo_gold();
    EvalOptions options;
    options.seed = 10;
    options.embed_markers = true;
    EvalReport a = run_eval(spec, *client, options);
    EvalReport b = EvalReport::from_json(a.to_json());
    CHECK(b.to_json() == a.to_json());

    auto diff = compare_reports(a, b);
    CHECK(diff["wins"] == 0);
    CHECK(diff["losses"] == 0);
    CHECK(diff["ties"] == 1);
    CHECK(diff["datasets"][0]["delta"] == doctest::Approx(0.0));

    EvalReport c = b;
    c.datasets[0].value += 0.1;
    auto diff2 = compare_reports(a, c);
    CHECK(diff2["wins"] == 1);

    EvalReport other = a;
    other.datasets[0].name = "different";
    CHECK_THROWS_AS(compare_reports(a, other), AxisMismatch);
}

TEST_CASE("report bytes are deterministic under a scripted mock") {
    Rng rng(56);
    Corpus corpus = make_corpus(40, rng);
    ProbeSpec spec;
    spec.type = TaskType::CF;
    spec.corpus = &corpus;
    spec.n = 15;
    auto client = ScriptedMockClient::echo_gold();
    EvalOptions options;
    options.seed = 11;
    options.embed_markers = true;
    std::string r1 = run_eval(spec, *client, options).to_json().dump();
    std::string r2 = run_eval(spec, *client, options).to_json().dump();
    CHECK(r1 == r2);
}

TEST_CASE("each task type maps to exactly one metric") {
    CHECK(metric_for(TaskType::MV) == Metric::F1Set);
    CHECK(metric_for(TaskType::CF) == Metric::Accuracy);
    CHECK(metric_for(TaskType::TQA) == Metric::Accuracy);
    CHECK(metric_for(TaskType::CTA) == Metric::F1Set);
    CHECK(metric_for(TaskType::R2R) == Metric::Accuracy);
    CHECK(metric_for(TaskType::EM) == Metric::F1Binary);
    CHECK(metric_for(TaskType::SM) == Metric::Recall);
    CHECK(metric_for(TaskType::DI) == Metric::Accuracy);
    CHECK(metric_for(TaskType::ED) == Metric::F1Set);
    CHECK_THROWS_AS(metric_for(TaskType::TS), ConfigError);
}
