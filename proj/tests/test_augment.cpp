#include "doctest.h"

#include <map>
#include <set>

#include "tabletask/answers.hpp"
#include "tabletask/augment.hpp"
#include "tabletask/errors.hpp"
#include "tabletask/synth.hpp"

#include "test_support.hpp"

using namespace tabletask;
using namespace tabletask::testing;

namespace {

AugmentContext ctx_with_source(const Table& source) {
    AugmentContext ctx;
    static thread_local std::map<std::string, Table> store;
    store[content_hash(source)] = source;
    ctx.lookup_source = [](const std::string& digest) -> const Table* {
        auto it = store.find(digest);
        return it == store.end() ? nullptr : &it->second;
    };
    return ctx;
}

ScriptedMockClient script_client(std::vector<nlohmann::json> entries) {
    ProviderConfig cfg;
    cfg.provider = "mock";
    cfg.mock_mode = "script";
    cfg.script = std::move(entries);
    return ScriptedMockClient(cfg);
}

} // namespace

TEST_CASE("instruction augmentation: paper-style summarization variant is drawable") {
    Table t = student_table();
    t.title = "second grade art and music scores";
    TaskInstance ts = synth_table_summarization(t, TitleBounds{3, 15});
    CHECK(ts.instruction ==
          "Please look at the table below and provide a title that can summarize the table");

    bool saw_variant = false;
    for (uint64_t seed = 0; seed < 64 && !saw_variant; ++seed) {
        TaskInstance v = augment_instruction(ts, InstructionPool::builtin(), seed);
        CHECK(v.completion.body == ts.completion.body); // completion untouched
        CHECK(v.input.to_json() == ts.input.to_json()); // payload untouched
        if (v.instruction == "Please examine the table below and give it a descriptive title")
            saw_variant = true;
    }
    CHECK(saw_variant);
}

TEST_CASE("instruction augmentation: 1000 draws cover the whole pool") {
    Table t = student_table();
    TaskInstance di = synth_data_imputation(t, 3);
    const auto& pool = InstructionPool::builtin().for_type(TaskType::DI);
    std::set<std::string> seen;
    for (uint64_t seed = 0; seed < 1000; ++seed)
        seen.insert(augment_instruction(di, InstructionPool::builtin(), seed).instruction);
    CHECK(seen.size() == pool.size());

    // single-template pool pins the instruction up to placeholder filling
    InstructionPool single = InstructionPool::builtin();
    single.set_templates(TaskType::DI, {pool[0]});
    for (uint64_t seed = 0; seed < 5; ++seed)
        CHECK(augment_instruction(di, single, seed).instruction == di.instruction);
}

TEST_CASE("every task type ships at least five instruction templates") {
    for (TaskType t : all_task_types())
        CHECK(InstructionPool::builtin().for_type(t).size() >= 5);
}

TEST_CASE("instruction pool validation rejects undeclared placeholders") {
    InstructionPool bad = InstructionPool::builtin();
    bad.set_templates(TaskType::DI, {"Fill the cell named {bogus}."});
    CHECK_THROWS_AS(bad.validate(), NoTemplates);
}

TEST_CASE("instruction pool file overlays the builtin templates") {
    TempDir dir("pool-file");
    nlohmann::json pool_json = {
        {"DI", {"Custom imputation wording one.", "Custom imputation wording two."}}};
    dir.write("pool.json", pool_json.dump());
    InstructionPool pool = InstructionPool::load((dir.path() / "pool.json").string());
    CHECK(pool.for_type(TaskType::DI).size() == 2);
    CHECK(pool.for_type(TaskType::DI)[0] == "Custom imputation wording one.");
    // untouched types keep their builtin templates
    CHECK(pool.for_type(TaskType::TS) == InstructionPool::builtin().for_type(TaskType::TS));

    dir.write("bad.json", nlohmann::json{{"DI", {"{bogus} wording"}}}.dump());
    CHECK_THROWS_AS(InstructionPool::load((dir.path() / "bad.json").string()), NoTemplates);
}

TEST_CASE("model-assisted instruction paraphrase replaces or keeps the text") {
    Table t = student_table();
    TaskInstance di = synth_data_imputation(t, 3);
    auto reworded = script_client({{{"text", "  Kindly complete the one empty cell.  "}}});
    TaskInstance out = augment_instruction_model(di, reworded);
    CHECK(out.instruction == "Kindly complete the one empty cell.");
    CHECK(out.completion.body == di.completion.body);

    auto silent = script_client({{{"text", "   "}}});
    TaskInstance kept = augment_instruction_model(di, silent);
    CHECK(kept.instruction == di.instruction);
}

TEST_CASE("safety table: pinned entries") {
    Rng rng(40);
    TableGenOptions opt;
    opt.titled = true;
    opt.min_rows = 4;
    Table t = random_table(rng, opt);
    SynthContext sctx;

    auto safety_of = [&](TaskType type, TableOp op) {
        TaskInstance inst = synthesize(type, t, 7, sctx);
        return augmentation_safety(inst, op);
    };
    // column-permutation safe for DI, ED, CF, TS, HVM
    for (TaskType type : {TaskType::DI, TaskType::ED, TaskType::CF, TaskType::TS, TaskType::HVM})
        CHECK(safety_of(type, TableOp::column_permutation) == AugSafety::safe);
    // column-permutation unsafe (re-synthesis) for the index-referencing tasks
    for (TaskType type : {TaskType::RCSW, TaskType::RCF, TaskType::RCS, TaskType::CA, TaskType::RA,
                          TaskType::SM, TaskType::LE})
        CHECK(safety_of(type, TableOp::column_permutation) == AugSafety::resynthesize);

    TaskInstance mv_ns = synth_missing_value(t, MvVariant::no_sep, MvQuestion::column, 5);
    CHECK(augmentation_safety(mv_ns, TableOp::column_permutation) == AugSafety::resynthesize);
    TaskInstance mv_ws = synth_missing_value(t, MvVariant::with_sep, MvQuestion::column, 5);
    CHECK(augmentation_safety(mv_ws, TableOp::column_permutation) == AugSafety::safe);
}

TEST_CASE("column permutation on DI: blank moves with its column, answer intact") {
    Rng rng(41);
    for (int i = 0; i < 20; ++i) {
        Table t = random_table(rng);
        TaskInstance di = synth_data_imputation(t, 900 + i);
        AugmentContext ctx = ctx_with_source(t);
        TaskInstance aug = augment_table(di, TableOp::column_permutation, 17 + i, ctx);
        CHECK(aug.completion.body == di.completion.body);
        CHECK(aug.params["augmentation"]["mode"] == "in-place");
        CHECK(verify(aug));
    }
}

TEST_CASE("row permutation on a swap instance forces re-synthesis") {
    Rng rng(42);
    Table t = random_table(rng);
    TaskInstance sw = synth_swap(t, Axis::row, 31);
    AugmentContext ctx = ctx_with_source(t);
    TaskInstance aug = augment_table(sw, TableOp::row_permutation, 5, ctx);
    CHECK(aug.params["augmentation"]["mode"] == "resynthesized");
    CHECK(verify(aug));

    AugmentContext no_resynth = ctx;
    no_resynth.allow_resynthesis = false;
    CHECK_THROWS_AS(augment_table(sw, TableOp::row_permutation, 5, no_resynth),
                    UnsafeAugmentation);
}

TEST_CASE("column sampling on CF: keeping the column preserves, dropping re-synthesizes") {
    Rng rng(43);
    bool kept_path = false, resynth_path = false;
    for (int i = 0; i < 80 && !(kept_path && resynth_path); ++i) {
        TableGenOptions opt;
        opt.min_cols = 3;
        opt.max_cols = 5;
        Table t = random_table(rng, opt);
        TaskInstance cf;
        try {
            cf = synth_column_finding(t, 70 + i);
        } catch (const NoUniqueValue&) {
            continue;
        }
        AugmentContext ctx = ctx_with_source(t);
        TaskInstance aug = augment_table(cf, TableOp::column_sampling, 29 + i, ctx);
        CHECK(verify(aug)); // oracle re-check after augmentation
        std::string mode = aug.params["augmentation"]["mode"].get<std::string>();
        if (mode == "in-place") {
            kept_path = true;
            CHECK(aug.completion.body == cf.completion.body);
        } else {
            resynth_path = true;
        }
    }
    CHECK(kept_path);
    CHECK(resynth_path);
}

TEST_CASE("benchmark instances reject sampling ops outright") {
    TempDir dir("augment-bench");
    nlohmann::json ta;
    ta["headers"] = std::vector<std::string>{"name", "city"};
    ta["rows"] = std::vector<std::vector<std::string>>{{"Acme", "Berlin"}};
    nlohmann::json rec;
    rec["task_type"] = "EM";
    rec["tables"] = nlohmann::json::array({ta, ta});
    rec["gold"] = "yes";
    dir.write("em.jsonl", rec.dump() + "\n");
    auto em = load_benchmark((dir.path() / "em.jsonl").string(), TaskType::EM);
    AugmentContext ctx;
    CHECK_THROWS_AS(augment_table(em[0], TableOp::row_sampling, 1, ctx), UnsafeAugmentation);
    // permutations are fine
    TaskInstance aug = augment_table(em[0], TableOp::column_permutation, 1, ctx);
    CHECK(aug.completion.body == em[0].completion.body);
}

TEST_CASE("ground-truth CoT for error detection embeds both spellings") {
    // The known corruption pair, with the correction pointing back.
    Table t;
    t.headers = {"state", "code"};
    t.rows = {{"Mississippi", "MS"}, {"Alabama", "AL"}, {"Georgia", "GA"}};
    TaskInstance ed;
    ed.type = TaskType::ED;
    ed.seed = 1;
    ed.source_digest = content_hash(t);
    Table input = t;
    input.rows[0][0] = "Missisipi";
    ed.input.tables = {input};
    ed.completion.kind = CompletionKind::value;
    ed.completion.answer = {{"erroneous_cell", "Missisipi"}};
    ed.completion.body = ed.completion.answer.dump();
    ed.params = {{"row_index", 1},
                 {"column_name", "state"},
                 {"corrupted", "Missisipi"},
                 {"correction", "Mississippi"}};
    ed.instruction = canonical_instruction(TaskType::ED, {});

    TaskInstance aug = augment_completion(ed, CompletionMode::cot_ground_truth, nullptr, 0);
    CHECK(aug.completion.body.find("\"Missisipi\" should be \"Mississippi\"") !=
          std::string::npos);
    // the machine-parseable tail survives byte for byte
    auto final_json = extract_final_json(aug.completion.body);
    REQUIRE(final_json.has_value());
    CHECK(*final_json == ed.completion.answer);
    CHECK(aug.completion.body.find(ed.completion.body) != std::string::npos);
}

TEST_CASE("completion augmentation: off mode is the identity") {
    Table t = student_table();
    TaskInstance di = synth_data_imputation(t, 2);
    TaskInstance same = augment_completion(di, CompletionMode::off, nullptr, 0);
    CHECK(same.to_json() == di.to_json());
}

TEST_CASE("model-assisted CoT keeps gold; mismatches are dropped") {
    TempDir dir("augment-cot");
    nlohmann::json ta;
    ta["headers"] = std::vector<std::string>{"name", "city"};
    ta["rows"] = std::vector<std::vector<std::string>>{{"Acme", "Berlin"}};
    nlohmann::json tb;
    tb["headers"] = std::vector<std::string>{"name", "city"};
    tb["rows"] = std::vector<std::vector<std::string>>{{"Acme Corp", "Berlin"}};
    nlohmann::json rec;
    rec["task_type"] = "EM";
    rec["tables"] = nlohmann::json::array({ta, tb});
    rec["gold"] = "yes";
    dir.write("em.jsonl", rec.dump() + "\n");
    auto em = load_benchmark((dir.path() / "em.jsonl").string(), TaskType::EM);

    auto good = script_client({{{"text", "Both rows name the same company in the same city.\n"
                                         "{\"match\": \"yes\"}"}}});
    TaskInstance aug = augment_completion(em[0], CompletionMode::cot_model_assisted, &good, 0);
    CHECK(aug.completion.body.find("Both rows name the same company") != std::string::npos);
    // final answer preserved verbatim
    CHECK(aug.completion.body.size() >= em[0].completion.body.size());
    CHECK(aug.completion.body.substr(aug.completion.body.size() -
                                     em[0].completion.body.size()) == em[0].completion.body);

    auto bad = script_client({{{"text", "They differ.\n{\"match\": \"no\"}"}}});
    CHECK_THROWS_AS(augment_completion(em[0], CompletionMode::cot_model_assisted, &bad, 0),
                    GoldMismatch);

    CHECK_THROWS_AS(augment_completion(em[0], CompletionMode::cot_model_assisted, nullptr, 0),
                    ModelUnavailable);
}

TEST_CASE("zero-shot prompts carry one payload; few-shot carry k+1 with k gold answers") {
    Rng rng(44);
    Table t = random_table(rng);
    TaskInstance di = synth_data_imputation(t, 5);

    std::vector<TaskInstance> bank;
    for (int i = 0; i < 6; ++i)
        bank.push_back(synth_data_imputation(random_table(rng), 100 + i));

    PromptRecord zero = render_template(di, TemplateKind{false, 2}, bank, 1);
    auto count = [](const std::string& hay, const std::string& needle) {
        std::size_t n = 0, pos = 0;
        while ((pos = hay.find(needle, pos)) != std::string::npos) {
            ++n;
            pos += needle.size();
        }
        return n;
    };
    CHECK(count(zero.prompt, "Input:") == 1);
    CHECK(zero.completion == di.completion.body);

    PromptRecord few = render_template(di, TemplateKind{true, 2}, bank, 1);
    CHECK(count(few.prompt, "Input:") == 3);
    CHECK(count(few.prompt, "Output:") == 3);
    // the test instance's own answer never leaks into the prompt
    CHECK(few.prompt.find(di.completion.body) == std::string::npos);
    // no example shares the instance's source digest
    for (const auto& d : few.meta["example_digests"])
        CHECK(d.get<std::string>() != di.source_digest);

    CHECK_THROWS_AS(render_template(di, TemplateKind{true, 10}, bank, 1), InsufficientExamples);
}

TEST_CASE("few-shot bank never serves an example with the instance's digest") {
    Rng rng(45);
    Table t = random_table(rng);
    TaskInstance di = synth_data_imputation(t, 5);
    // a bank polluted with instances of the same source table
    std::vector<TaskInstance> bank;
    for (int i = 0; i < 4; ++i) bank.push_back(synth_data_imputation(t, 200 + i));
    bank.push_back(synth_data_imputation(random_table(rng), 1));
    bank.push_back(synth_data_imputation(random_table(rng), 2));
    PromptRecord few = render_template(di, TemplateKind{true, 2}, bank, 3);
    for (const auto& d : few.meta["example_digests"])
        CHECK(d.get<std::string>() != di.source_digest);
}

TEST_CASE("format axis changes prompt bytes, never the gold answer") {
    Rng rng(46);
    Table t = random_table(rng);
    TaskInstance di = synth_data_imputation(t, 5);
    PromptRecord md = render_template(di, TemplateKind{false, 2}, {}, 1,
                                      SerializationFormat::Markdown);
    PromptRecord csv = render_template(di, TemplateKind{false, 2}, {}, 1,
                                       SerializationFormat::CSV);
    PromptRecord js = render_template(di, TemplateKind{false, 2}, {}, 1,
                                      SerializationFormat::JSON);
    CHECK(md.prompt != csv.prompt);
    CHECK(md.prompt != js.prompt);
    CHECK(md.completion == csv.completion);
    CHECK(md.completion == js.completion);
    CHECK(md.answer == js.answer);
}

TEST_CASE("safe augmentation preserves oracle consistency across the board") {
    Rng rng(47);
    TableGenOptions opt;
    opt.titled = true;
    opt.min_rows = 4;
    opt.min_cols = 3;
    opt.numeric_chance = 0.0;
    SynthContext sctx;
    for (int i = 0; i < 25; ++i) {
        Table t = random_table(rng, opt);
        AugmentContext ctx = ctx_with_source(t);
        ctx.synth = sctx;
        for (TaskType type : all_task_types()) {
            if (!is_synthesized_task(type) || !eligible(type, t, sctx)) continue;
            TaskInstance inst = synthesize(type, t, 500 + i, sctx);
            for (TableOp op : {TableOp::column_permutation, TableOp::row_permutation,
                               TableOp::column_sampling, TableOp::row_sampling}) {
                TaskInstance aug = augment_table(inst, op, 1000 + i, ctx);
                CHECK(verify(aug));
            }
        }
    }
}
