#include "tabletask/programs.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "tabletask/errors.hpp"
#include "tabletask/util.hpp"

namespace tabletask {

nlohmann::json ProgramApplication::to_json() const {
    return {{"program_id", program_id}, {"input_columns", input_columns}, {"config", config}};
}

ProgramApplication ProgramApplication::from_json(const nlohmann::json& j) {
    ProgramApplication app;
    app.program_id = j.at("program_id").get<std::string>();
    app.input_columns = j.at("input_columns").get<std::vector<std::size_t>>();
    app.config = j.value("config", nlohmann::json::object());
    return app;
}

namespace {

bool all_alpha_present(const std::vector<std::string>& cells) {
    for (const auto& c : cells) {
        bool any = false;
        for (char ch : c)
            if (std::isalpha(static_cast<unsigned char>(ch))) any = true;
        if (!any) return false;
    }
    return true;
}

bool is_iso_date(const std::string& s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

std::string map_case(const std::string& s, bool upper) {
    std::string out = s;
    for (char& c : out)
        c = upper ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
                  : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

TransformProgram make_concat() {
    TransformProgram p;
    p.id = "concat";
    p.arity = 2;
    p.apply = [](const std::vector<std::string>& cells, const nlohmann::json& cfg)
        -> std::optional<std::string> {
        std::string sep = cfg.value("separator", " ");
        std::string out = trim(cells[0] + sep + cells[1]);
        if (out.empty()) return std::nullopt;
        return out;
    };
    p.output_header = [](const std::vector<std::string>& h, const nlohmann::json& cfg) {
        std::string sep = cfg.value("separator", " ");
        return h[0] + (sep == " " ? " " : sep) + h[1];
    };
    p.configs = [](const std::vector<std::vector<std::string>>& cols) {
        std::vector<nlohmann::json> out;
        for (const auto& col : cols)
            for (const auto& c : col)
                if (c.empty()) return out;
        out.push_back({{"separator", " "}});
        out.push_back({{"separator", "-"}});
        out.push_back({{"separator", ", "}});
        return out;
    };
    return p;
}

TransformProgram make_split_take() {
    TransformProgram p;
    p.id = "split_take";
    p.arity = 1;
    p.apply = [](const std::vector<std::string>& cells, const nlohmann::json& cfg)
        -> std::optional<std::string> {
        std::string delim = cfg.value("delimiter", " ");
        auto parts = split(cells[0], delim[0]);
        if (parts.size() < 2) return std::nullopt;
        std::string part = cfg.value("position", "first") == "first"
                               ? trim(parts.front())
                               : trim(parts.back());
        if (part.empty()) return std::nullopt;
        return part;
    };
    p.output_header = [](const std::vector<std::string>& h, const nlohmann::json& cfg) {
        return h[0] + " (" + cfg.value("position", "first") + " part)";
    };
    p.configs = [](const std::vector<std::vector<std::string>>& cols) {
        std::vector<nlohmann::json> out;
        for (char d : {' ', '-', '/'}) {
            bool ok = true;
            for (const auto& c : cols[0]) {
                auto parts = split(c, d);
                if (parts.size() < 2 || trim(parts.front()).empty() || trim(parts.back()).empty()) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            std::string ds(1, d);
            out.push_back({{"delimiter", ds}, {"position", "first"}});
            out.push_back({{"delimiter", ds}, {"position", "last"}});
        }
        return out;
    };
    return p;
}

TransformProgram make_case(bool upper) {
    TransformProgram p;
    p.id = upper ? "uppercase" : "lowercase";
    p.arity = 1;
    p.apply = [upper](const std::vector<std::string>& cells, const nlohmann::json&)
        -> std::optional<std::string> {
        if (cells[0].empty()) return std::nullopt;
        return map_case(cells[0], upper);
    };
    p.output_header = [upper](const std::vector<std::string>& h, const nlohmann::json&) {
        return h[0] + (upper ? " (upper)" : " (lower)");
    };
    p.configs = [upper](const std::vector<std::vector<std::string>>& cols) {
        std::vector<nlohmann::json> out;
        if (!all_alpha_present(cols[0])) return out;
        // Require the mapping to change at least one cell.
        bool changes = false;
        for (const auto& c : cols[0])
            if (map_case(c, upper) != c) changes = true;
        if (changes) out.push_back(nlohmann::json::object());
        return out;
    };
    return p;
}

TransformProgram make_strip(bool prefix) {
    TransformProgram p;
    p.id = prefix ? "prefix_strip" : "suffix_strip";
    p.arity = 1;
    p.apply = [prefix](const std::vector<std::string>& cells, const nlohmann::json& cfg)
        -> std::optional<std::string> {
        std::size_t k = cfg.value("count", std::size_t{1});
        if (cells[0].size() <= k) return std::nullopt;
        std::string out = prefix ? cells[0].substr(k) : cells[0].substr(0, cells[0].size() - k);
        out = trim(out);
        if (out.empty()) return std::nullopt;
        return out;
    };
    p.output_header = [prefix](const std::vector<std::string>& h, const nlohmann::json& cfg) {
        return h[0] + (prefix ? " (without first " : " (without last ") +
               std::to_string(cfg.value("count", std::size_t{1})) + " chars)";
    };
    p.configs = [](const std::vector<std::vector<std::string>>& cols) {
        std::vector<nlohmann::json> out;
        for (std::size_t k : {1u, 2u, 3u}) {
            bool ok = true;
            for (const auto& c : cols[0]) {
                if (c.size() <= k + 1) { ok = false; break; }
            }
            if (ok) out.push_back({{"count", k}});
        }
        return out;
    };
    return p;
}

TransformProgram make_date_reformat() {
    TransformProgram p;
    p.id = "date_reformat";
    p.arity = 1;
    p.apply = [](const std::vector<std::string>& cells, const nlohmann::json& cfg)
        -> std::optional<std::string> {
        const std::string& s = cells[0];
        if (!is_iso_date(s)) return std::nullopt;
        std::string y = s.substr(0, 4), m = s.substr(5, 2), d = s.substr(8, 2);
        std::string layout = cfg.value("layout", "dmy");
        if (layout == "dmy") return d + "/" + m + "/" + y;
        if (layout == "mdy") return m + "/" + d + "/" + y;
        return y + "/" + m + "/" + d;
    };
    p.output_header = [](const std::vector<std::string>& h, const nlohmann::json&) {
        return h[0] + " (reformatted)";
    };
    p.configs = [](const std::vector<std::vector<std::string>>& cols) {
        std::vector<nlohmann::json> out;
        for (const auto& c : cols[0])
            if (!is_iso_date(c)) return out;
        out.push_back({{"layout", "dmy"}});
        out.push_back({{"layout", "mdy"}});
        out.push_back({{"layout", "ymd"}});
        return out;
    };
    return p;
}

TransformProgram make_round() {
    TransformProgram p;
    p.id = "numeric_round";
    p.arity = 1;
    p.apply = [](const std::vector<std::string>& cells, const nlohmann::json& cfg)
        -> std::optional<std::string> {
        auto v = parse_number(cells[0]);
        if (!v) return std::nullopt;
        int decimals = cfg.value("decimals", 0);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.*f", decimals, *v);
        return std::string(buf);
    };
    p.output_header = [](const std::vector<std::string>& h, const nlohmann::json& cfg) {
        return h[0] + " (rounded to " + std::to_string(cfg.value("decimals", 0)) + " dp)";
    };
    p.configs = [](const std::vector<std::vector<std::string>>& cols) {
        std::vector<nlohmann::json> out;
        bool fractional = false;
        for (const auto& c : cols[0]) {
            auto v = parse_number(c);
            if (!v) return out;
            if (c.find('.') != std::string::npos) fractional = true;
        }
        if (!fractional) return out;
        out.push_back({{"decimals", 0}});
        out.push_back({{"decimals", 1}});
        return out;
    };
    return p;
}

} // namespace

const ProgramLibrary& ProgramLibrary::builtin() {
    static const ProgramLibrary lib = [] {
        ProgramLibrary l;
        l.add(make_concat());
        l.add(make_split_take());
        l.add(make_case(true));
        l.add(make_case(false));
        l.add(make_strip(true));
        l.add(make_strip(false));
        l.add(make_date_reformat());
        l.add(make_round());
        return l;
    }();
    return lib;
}

void ProgramLibrary::add(TransformProgram program) { programs_.push_back(std::move(program)); }

const TransformProgram& ProgramLibrary::by_id(const std::string& id) const {
    for (const auto& p : programs_)
        if (p.id == id) return p;
    throw NoApplicableProgram("unknown program id '" + id + "'");
}

ProgramApplication ProgramLibrary::find_application(const Table& t, Rng& rng) const {
    std::vector<std::size_t> program_order(programs_.size());
    for (std::size_t i = 0; i < program_order.size(); ++i) program_order[i] = i;
    rng.shuffle(program_order);

    std::vector<std::size_t> col_order(t.column_count());
    for (std::size_t i = 0; i < col_order.size(); ++i) col_order[i] = i;
    rng.shuffle(col_order);

    for (std::size_t pi : program_order) {
        const auto& prog = programs_[pi];
        if (prog.arity > t.column_count()) continue;
        // Try column tuples in seeded order; for arity 2 pair each column
        // with the next distinct ones.
        std::vector<std::vector<std::size_t>> tuples;
        if (prog.arity == 1) {
            for (std::size_t c : col_order) tuples.push_back({c});
        } else {
            for (std::size_t a = 0; a < col_order.size(); ++a)
                for (std::size_t b = 0; b < col_order.size(); ++b)
                    if (a != b) tuples.push_back({col_order[a], col_order[b]});
        }
        for (const auto& tuple : tuples) {
            std::vector<std::vector<std::string>> cols;
            for (std::size_t c : tuple) {
                std::vector<std::string> col;
                for (const auto& row : t.rows) col.push_back(row[c]);
                cols.push_back(std::move(col));
            }
            auto cfgs = prog.configs(cols);
            if (cfgs.empty()) continue;
            ProgramApplication app;
            app.program_id = prog.id;
            app.input_columns = tuple;
            app.config = cfgs[rng.index(cfgs.size())];
            if (materialize(t, app)) return app;
        }
    }
    throw NoApplicableProgram("no transform program is total on this table");
}

std::optional<std::vector<std::string>> ProgramLibrary::materialize(
    const Table& t, const ProgramApplication& app) const {
    std::vector<std::string> out;
    out.reserve(t.row_count());
    for (const auto& row : t.rows) {
        auto v = apply_row(row, app);
        if (!v || v->empty()) return std::nullopt;
        out.push_back(std::move(*v));
    }
    return out;
}

std::string ProgramLibrary::output_header(const Table& t, const ProgramApplication& app) const {
    const auto& prog = by_id(app.program_id);
    std::vector<std::string> in_headers;
    for (std::size_t c : app.input_columns) in_headers.push_back(t.headers[c]);
    std::string h = trim(prog.output_header(in_headers, app.config));
    // Keep the derived header distinct from existing ones.
    std::string unique = h;
    int n = 2;
    while (std::find(t.headers.begin(), t.headers.end(), unique) != t.headers.end())
        unique = h + " " + std::to_string(n++);
    return unique;
}

std::optional<std::string> ProgramLibrary::apply_row(const std::vector<std::string>& row,
                                                     const ProgramApplication& app) const {
    const auto& prog = by_id(app.program_id);
    std::vector<std::string> cells;
    cells.reserve(app.input_columns.size());
    for (std::size_t c : app.input_columns) {
        if (c >= row.size()) return std::nullopt;
        cells.push_back(row[c]);
    }
    return prog.apply(cells, app.config);
}

} // namespace tabletask
