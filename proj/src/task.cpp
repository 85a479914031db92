#include "tabletask/task.hpp"

#include <array>

#include "tabletask/errors.hpp"

namespace tabletask {

namespace {

struct TaskTypeInfo {
    TaskType type;
    const char* name;
    bool train;
    bool test;
    bool synthesized;
};

// Train/test roles follow the task summary: T-1..T-4 are held-out test
// tasks, T-5..T-9 appear on both sides, T-10..T-18 are train-only.
// Entity matching and NL-to-SQL rely on benchmark labels; everything else
// is synthesized from corpus tables.
constexpr std::array<TaskTypeInfo, kTaskTypeCount> kTaskInfo = {{
    {TaskType::MV, "MV", false, true, true},
    {TaskType::CF, "CF", false, true, true},
    {TaskType::TQA, "TQA", false, true, false},
    {TaskType::CTA, "CTA", false, true, false},
    {TaskType::R2R, "R2R", true, true, true},
    {TaskType::EM, "EM", true, true, false},
    {TaskType::SM, "SM", true, true, true},
    {TaskType::DI, "DI", true, true, true},
    {TaskType::ED, "ED", true, true, true},
    {TaskType::LE, "LE", true, false, true},
    {TaskType::HVM, "HVM", true, false, true},
    {TaskType::NS, "NS", true, false, false},
    {TaskType::TS, "TS", true, false, true},
    {TaskType::CA, "CA", true, false, true},
    {TaskType::RA, "RA", true, false, true},
    {TaskType::RCSW, "RCSW", true, false, true},
    {TaskType::RCF, "RCF", true, false, true},
    {TaskType::RCS, "RCS", true, false, true},
}};

const TaskTypeInfo& info(TaskType t) { return kTaskInfo[static_cast<std::size_t>(t)]; }

} // namespace

const char* to_string(TaskType t) { return info(t).name; }

TaskType task_type_from_string(const std::string& s) {
    for (const auto& i : kTaskInfo)
        if (s == i.name) return i.type;
    throw ConfigError("unknown task type '" + s + "'");
}

std::vector<TaskType> all_task_types() {
    std::vector<TaskType> out;
    out.reserve(kTaskTypeCount);
    for (const auto& i : kTaskInfo) out.push_back(i.type);
    return out;
}

bool is_train_task(TaskType t) { return info(t).train; }
bool is_test_task(TaskType t) { return info(t).test; }
bool is_synthesized_task(TaskType t) { return info(t).synthesized; }

const char* to_string(CompletionKind k) {
    switch (k) {
        case CompletionKind::text: return "text";
        case CompletionKind::table: return "table";
        case CompletionKind::cellref: return "cellref";
        case CompletionKind::value: return "value";
        case CompletionKind::mapping: return "mapping";
        case CompletionKind::json_answer: return "json-answer";
    }
    return "text";
}

CompletionKind completion_kind_from_string(const std::string& s) {
    if (s == "text") return CompletionKind::text;
    if (s == "table") return CompletionKind::table;
    if (s == "cellref") return CompletionKind::cellref;
    if (s == "value") return CompletionKind::value;
    if (s == "mapping") return CompletionKind::mapping;
    if (s == "json-answer") return CompletionKind::json_answer;
    throw ConfigError("unknown completion kind '" + s + "'");
}

nlohmann::json Completion::to_json() const {
    return {{"kind", to_string(kind)},
            {"body", body},
            {"answer", answer},
            {"answer_schema", answer_schema}};
}

Completion Completion::from_json(const nlohmann::json& j) {
    Completion c;
    c.kind = completion_kind_from_string(j.at("kind").get<std::string>());
    c.body = j.at("body").get<std::string>();
    c.answer = j.value("answer", nlohmann::json());
    c.answer_schema = j.value("answer_schema", "");
    return c;
}

namespace {
nlohmann::json table_to_json(const Table& t) {
    nlohmann::json j;
    if (t.title) j["title"] = *t.title;
    j["headers"] = t.headers;
    j["rows"] = t.rows;
    j["source_tag"] = to_string(t.source_tag);
    return j;
}

Table table_from_json(const nlohmann::json& j) {
    Table t;
    if (j.contains("title")) t.title = j["title"].get<std::string>();
    t.headers = j.at("headers").get<std::vector<std::string>>();
    t.rows = j.at("rows").get<std::vector<std::vector<std::string>>>();
    if (j.contains("source_tag"))
        t.source_tag = source_tag_from_string(j["source_tag"].get<std::string>());
    return t;
}
} // namespace

nlohmann::json InputPayload::to_json() const {
    nlohmann::json j;
    nlohmann::json tabs = nlohmann::json::array();
    for (const auto& t : tables) tabs.push_back(table_to_json(t));
    j["tables"] = tabs;
    if (list_text) j["list_text"] = *list_text;
    if (headerless) j["headerless"] = true;
    if (drop_separator_at)
        j["drop_separator_at"] = {{"row_index", drop_separator_at->row_index},
                                  {"column_name", drop_separator_at->column_name}};
    return j;
}

InputPayload InputPayload::from_json(const nlohmann::json& j) {
    InputPayload p;
    for (const auto& t : j.at("tables")) p.tables.push_back(table_from_json(t));
    if (j.contains("list_text")) p.list_text = j["list_text"].get<std::string>();
    p.headerless = j.value("headerless", false);
    if (j.contains("drop_separator_at"))
        p.drop_separator_at = CellRef{j["drop_separator_at"].at("row_index").get<std::size_t>(),
                                      j["drop_separator_at"].at("column_name").get<std::string>()};
    return p;
}

nlohmann::json TaskInstance::to_json() const {
    return {{"task_type", to_string(type)},
            {"instruction", instruction},
            {"input", input.to_json()},
            {"completion", completion.to_json()},
            {"source_digest", source_digest},
            {"seed", seed},
            {"slots", slots},
            {"params", params}};
}

TaskInstance TaskInstance::from_json(const nlohmann::json& j) {
    TaskInstance t;
    t.type = task_type_from_string(j.at("task_type").get<std::string>());
    t.instruction = j.at("instruction").get<std::string>();
    t.input = InputPayload::from_json(j.at("input"));
    t.completion = Completion::from_json(j.at("completion"));
    t.source_digest = j.value("source_digest", "");
    t.seed = j.value("seed", uint64_t{0});
    if (j.contains("slots")) t.slots = j["slots"].get<std::map<std::string, std::string>>();
    if (j.contains("params")) t.params = j["params"];
    return t;
}

} // namespace tabletask
