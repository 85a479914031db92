#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "tabletask/rng.hpp"
#include "tabletask/table.hpp"

namespace tabletask {

/// A concrete binding of a program to a table: program id, input columns
/// (0-based), and the parameter object. Deterministic and total on the
/// rows it was selected for.
struct ProgramApplication {
    std::string program_id;
    std::vector<std::size_t> input_columns;
    nlohmann::json config = nlohmann::json::object();

    nlohmann::json to_json() const;
    static ProgramApplication from_json(const nlohmann::json& j);
};

/// One row-to-row transform: maps a tuple of input cells to an output
/// cell. `configs` enumerates parameterizations that are total on the
/// given input columns (empty means not applicable).
struct TransformProgram {
    std::string id;
    std::size_t arity = 1;
    std::function<std::optional<std::string>(const std::vector<std::string>& cells,
                                             const nlohmann::json& config)>
        apply;
    std::function<std::string(const std::vector<std::string>& input_headers,
                              const nlohmann::json& config)>
        output_header;
    std::function<std::vector<nlohmann::json>(const std::vector<std::vector<std::string>>& columns)>
        configs;
};

/// Config-extensible registry of transform programs.
class ProgramLibrary {
public:
    /// Built-in set: concatenate-with-separator, split-and-take, case
    /// mapping, prefix/suffix strip, date reformat, numeric round.
    static const ProgramLibrary& builtin();

    void add(TransformProgram program);
    const std::vector<TransformProgram>& programs() const { return programs_; }
    const TransformProgram& by_id(const std::string& id) const;

    /// Seeded search for a program and input columns that are total and
    /// non-trivial on every row of `t`. Throws NoApplicableProgram.
    ProgramApplication find_application(const Table& t, Rng& rng) const;

    /// Output cells for every row (empty optional when some row fails).
    std::optional<std::vector<std::string>> materialize(const Table& t,
                                                        const ProgramApplication& app) const;

    std::string output_header(const Table& t, const ProgramApplication& app) const;

    /// Applies the program to one row of the original columns.
    std::optional<std::string> apply_row(const std::vector<std::string>& row,
                                         const ProgramApplication& app) const;

private:
    std::vector<TransformProgram> programs_;
};

} // namespace tabletask
