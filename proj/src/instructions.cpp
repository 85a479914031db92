#include "tabletask/instructions.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "tabletask/errors.hpp"

namespace tabletask {

const std::vector<std::string>& declared_slots(TaskType t) {
    static const std::map<TaskType, std::vector<std::string>> slots = {
        {TaskType::MV, {"target"}},
        {TaskType::CF, {"value"}},
        {TaskType::TQA, {"question"}},
        {TaskType::CTA, {"column", "choices"}},
        {TaskType::R2R, {}},
        {TaskType::EM, {}},
        {TaskType::SM, {}},
        {TaskType::DI, {}},
        {TaskType::ED, {}},
        {TaskType::LE, {"num_cols"}},
        {TaskType::HVM, {"headers"}},
        {TaskType::NS, {"question"}},
        {TaskType::TS, {}},
        {TaskType::CA, {}},
        {TaskType::RA, {}},
        {TaskType::RCSW, {"axis", "first", "second"}},
        {TaskType::RCF, {"axis", "targets"}},
        {TaskType::RCS, {"axis", "key"}},
    };
    return slots.at(t);
}

std::vector<std::string> template_placeholders(const std::string& tmpl) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] != '{') continue;
        std::size_t end = tmpl.find('}', i + 1);
        if (end == std::string::npos) break;
        std::string name = tmpl.substr(i + 1, end - i - 1);
        bool ident = !name.empty();
        for (char c : name)
            if (!(std::islower(static_cast<unsigned char>(c)) || c == '_')) ident = false;
        if (ident) out.push_back(name);
        i = end;
    }
    return out;
}

std::string fill_template(const std::string& tmpl,
                          const std::map<std::string, std::string>& slots) {
    std::string out;
    out.reserve(tmpl.size());
    for (std::size_t i = 0; i < tmpl.size(); ++i) {
        if (tmpl[i] == '{') {
            std::size_t end = tmpl.find('}', i + 1);
            if (end != std::string::npos) {
                std::string name = tmpl.substr(i + 1, end - i - 1);
                auto it = slots.find(name);
                if (it != slots.end()) {
                    out += it->second;
                    i = end;
                    continue;
                }
                bool ident = !name.empty();
                for (char c : name)
                    if (!(std::islower(static_cast<unsigned char>(c)) || c == '_')) ident = false;
                if (ident)
                    throw NoTemplates("unfilled placeholder {" + name + "}");
            }
        }
        out += tmpl[i];
    }
    return out;
}

namespace {

std::map<TaskType, std::vector<std::string>> builtin_templates() {
    std::map<TaskType, std::vector<std::string>> p;

    p[TaskType::MV] = {
        "Please look at the table below. There is exactly one missing cell. Identify the {target} of the missing cell.",
        "Examine the following table and find the single empty cell. Report the {target} of that cell.",
        "The table below contains exactly one missing value. What is the {target} of that cell?",
        "Inspect the table and locate the one cell whose value is absent. Give the {target} of the missing cell.",
        "One cell in this table has no value. Please identify the {target} of that cell.",
        "Read the table carefully; a single cell is missing. Answer with the {target} of the missing cell.",
    };

    p[TaskType::CF] = {
        "Please look at the table below and find the column that contains the value \"{value}\". The value appears exactly once in the table.",
        "In the following table, the value \"{value}\" occurs exactly once. Which column is it in?",
        "Locate the cell whose value is \"{value}\" in the table below and report its column name.",
        "The value \"{value}\" appears once in this table. Identify the column that holds it.",
        "Find \"{value}\" in the table and answer with the name of its column.",
        "Scan the table below for the value \"{value}\" and name the column it belongs to.",
    };

    p[TaskType::TQA] = {
        "Please answer the following question based on the table below.\nQuestion: {question}",
        "Use the table below to answer this question: {question}",
        "Based on the contents of the table, answer the question.\nQuestion: {question}",
        "Read the table and answer: {question}",
        "Answer the question using only the information in the table.\nQuestion: {question}",
    };

    p[TaskType::CTA] = {
        "Please look at the table below and select the semantic type of the column \"{column}\" from the following choices: {choices}.",
        "From the candidate types ({choices}), pick the type that best describes the column \"{column}\" in the table below.",
        "Classify the column \"{column}\" of the table. Possible types: {choices}.",
        "Which of the following types best matches the column \"{column}\"? Choices: {choices}.",
        "Given the table below, choose the semantic type of the column \"{column}\" among: {choices}.",
    };

    p[TaskType::R2R] = {
        "Please examine the table below. The last column was derived from the other columns by a fixed transformation, and exactly one of its cells is blank. Infer the transformation from the filled rows and provide the missing value.",
        "In the table below, one value of the derived last column is missing. Use the pattern in the complete rows to fill it in.",
        "The rightmost column of this table is computed from the other columns. One cell is empty; infer the rule and supply the value.",
        "Look at the input/output examples formed by the rows of the table. Apply the same transformation to produce the one missing output value.",
        "A cell in the last column is blank. Infer the row-to-row transformation from the other rows and give the missing value.",
    };

    p[TaskType::EM] = {
        "Please look at the two rows below and determine whether they refer to the same real-world entity.",
        "Do the two records shown below describe the same entity? Answer yes or no.",
        "Compare Entity 1 and Entity 2 and decide whether they are the same real-world entity.",
        "Determine whether the two table rows below are a match, that is, refer to one and the same entity.",
        "Judge whether the following two records refer to the same entity.",
    };

    p[TaskType::SM] = {
        "Please look at the two tables below and match each column of Table 1 to the column of Table 2 that has the same meaning.",
        "For every column in Table 1, find the corresponding column in Table 2 that refers to the same concept.",
        "Match the columns of the two tables: map each Table 1 header to its Table 2 counterpart.",
        "The two tables below describe the same kind of records with renamed columns. Produce the column correspondence from Table 1 to Table 2.",
        "Align the schemas of Table 1 and Table 2 by pairing columns with the same meaning.",
    };

    p[TaskType::DI] = {
        "Please look at the table below and fill in the one missing cell, using the other values in the table as context.",
        "One cell of the table is empty. Predict the missing value from the surrounding rows and columns.",
        "The table below has a single blank cell. Provide the most plausible value for it.",
        "Impute the missing value in the table using the patterns in its rows and columns.",
        "Use the table context to infer the value of the one empty cell below.",
    };

    p[TaskType::ED] = {
        "Please look at the table below and identify the cell value that is most likely a typographic error (a misspelling).",
        "One cell in this table contains a misspelled value. Find it.",
        "Examine the table and point out the cell whose value looks like a spelling mistake.",
        "Detect the likely misspelling among the cell values of the table below.",
        "Review the table for typographic errors and name the misspelled cell value.",
    };

    p[TaskType::LE] = {
        "The list below was produced from a table by replacing the column separators with spaces. Reconstruct the original table with {num_cols} columns.",
        "Each line below is a table row whose column boundaries were lost. Split every line into {num_cols} columns and return the table.",
        "Recover the {num_cols}-column table from the unsegmented list below, aligning values vertically.",
        "Turn the following list into a table with {num_cols} columns by restoring the column boundaries.",
        "The lines below are rows of a table with {num_cols} columns, written without separators. Rebuild the table.",
    };

    p[TaskType::HVM] = {
        "The table below is missing its header row. Assign each of the following shuffled column headers to the correct column and return the completed table: {headers}.",
        "Match the shuffled headers ({headers}) to the columns of the headerless table below and return the completed table.",
        "Fill in the header row of the table below using these candidate headers: {headers}.",
        "Place each of the headers {headers} above the column it belongs to and produce the table with its header row restored.",
        "Given the headerless table below and the candidate headers {headers}, reconstruct the table with headers in the right order.",
    };

    p[TaskType::NS] = {
        "Please write a SQL query that answers the following question over the table below.\nQuestion: {question}",
        "Translate the question into a SQL query for the table shown below.\nQuestion: {question}",
        "Given the table below, produce the SQL query corresponding to: {question}",
        "Write SQL that answers this question about the table: {question}",
        "Formulate a SQL query over the table to answer the question.\nQuestion: {question}",
    };

    p[TaskType::TS] = {
        "Please look at the table below and provide a title that can summarize the table",
        "Please examine the table below and give it a descriptive title",
        "Please provide a succinct summary for the table below",
        "Write a short title that captures the content of the following table.",
        "Summarize the table below with a brief title.",
        "Give a one-line heading that describes the table.",
    };

    p[TaskType::CA] = {
        "Please generate a new column for the table below that is semantically compatible with the existing columns. Return the new column with its header and one value per row.",
        "Extend the table below with one additional column that fits the table's content. Output the new column (header plus cells).",
        "Propose a plausible extra column for this table and return it as a single-column table.",
        "Add one more column that naturally complements the table below; respond with the header and the cell values of the new column.",
        "Augment the table with a new, compatible column. Return only the generated column.",
    };

    p[TaskType::RA] = {
        "Please generate a new row for the table below that is consistent with the existing rows. Return the new row together with the table headers.",
        "Extend the table below by one additional row that fits the existing data. Output the new row.",
        "Propose a plausible next row for this table and return it as a one-row table.",
        "Add one more record that naturally continues the table below; respond with that row only.",
        "Augment the table with a compatible new row. Return only the generated row.",
    };

    p[TaskType::RCSW] = {
        "Please swap {first} and {second} in the table below and return the resulting table.",
        "Exchange the positions of {first} and {second} in the following table and output the result.",
        "In the table below, interchange {first} with {second}, then return the full table.",
        "Return the table that results from swapping {first} and {second}.",
        "Manipulate the table below by swapping {first} and {second}; output the new table.",
    };

    p[TaskType::RCF] = {
        "Please filter the table below down to {targets} and return the resulting table.",
        "Keep only {targets} of the following table and output the result.",
        "From the table below, select {targets} and return them as a table.",
        "Reduce the table to {targets}; output the filtered table.",
        "Return the sub-table of the table below consisting of {targets}.",
    };

    p[TaskType::RCS] = {
        "Please reorder the table below: sort {key} in ascending order, then return the resulting table.",
        "Sort {key} of the table below in ascending order and output the result.",
        "Rearrange the table so that {key} appear in ascending order; return the full table.",
        "Return the table that results from sorting {key} in ascending order.",
        "Manipulate the table below by sorting {key} in ascending order; output the new table.",
    };

    return p;
}

} // namespace

const InstructionPool& InstructionPool::builtin() {
    static const InstructionPool pool = [] {
        InstructionPool p;
        p.templates_ = builtin_templates();
        p.validate();
        return p;
    }();
    return pool;
}

InstructionPool InstructionPool::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open instruction pool: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ConfigError("instruction pool must be a JSON object: " + path);
    InstructionPool pool = builtin();
    for (auto it = j.begin(); it != j.end(); ++it) {
        TaskType t = task_type_from_string(it.key());
        pool.set_templates(t, it.value().get<std::vector<std::string>>());
    }
    pool.validate();
    return pool;
}

const std::vector<std::string>& InstructionPool::for_type(TaskType t) const {
    auto it = templates_.find(t);
    if (it == templates_.end() || it->second.empty())
        throw NoTemplates(std::string("no instruction templates for ") + to_string(t));
    return it->second;
}

void InstructionPool::set_templates(TaskType t, std::vector<std::string> templates) {
    templates_[t] = std::move(templates);
}

void InstructionPool::validate() const {
    for (TaskType t : all_task_types()) {
        auto it = templates_.find(t);
        if (it == templates_.end() || it->second.empty())
            throw NoTemplates(std::string("no instruction templates for ") + to_string(t));
        const auto& declared = declared_slots(t);
        for (const auto& tmpl : it->second) {
            for (const auto& ph : template_placeholders(tmpl)) {
                if (std::find(declared.begin(), declared.end(), ph) == declared.end())
                    throw NoTemplates("template for " + std::string(to_string(t)) +
                                      " uses undeclared placeholder {" + ph + "}");
            }
        }
    }
}

std::string canonical_instruction(TaskType t, const std::map<std::string, std::string>& slots) {
    return fill_template(InstructionPool::builtin().for_type(t).front(), slots);
}

} // namespace tabletask
