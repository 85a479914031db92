#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "tabletask/task.hpp"

namespace tabletask {

/// Placeholder names a task type's templates may reference.
const std::vector<std::string>& declared_slots(TaskType t);

/// Placeholders referenced by a template string ("{name}" occurrences).
std::vector<std::string> template_placeholders(const std::string& tmpl);

/// Replaces every {name} with slots.at(name); throws NoTemplates when a
/// placeholder has no value.
std::string fill_template(const std::string& tmpl,
                          const std::map<std::string, std::string>& slots);

/// Per-task-type instruction templates. Index 0 is the canonical
/// human-written instruction; the rest are paraphrased variants.
class InstructionPool {
public:
    /// The built-in pool: one canonical plus at least four variants per
    /// task type.
    static const InstructionPool& builtin();

    /// Loads a JSON pool file ({"TS": ["template", ...], ...}) layered on
    /// top of the built-in templates.
    static InstructionPool load(const std::string& path);

    const std::vector<std::string>& for_type(TaskType t) const;
    void set_templates(TaskType t, std::vector<std::string> templates);

    /// Checks that every task type keeps at least one template and that
    /// template placeholders stay inside the declared slot set.
    void validate() const;

private:
    std::map<TaskType, std::vector<std::string>> templates_;
};

/// Canonical instruction for a task, filled with the instance's slots.
std::string canonical_instruction(TaskType t, const std::map<std::string, std::string>& slots);

} // namespace tabletask
