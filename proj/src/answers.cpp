#include "tabletask/answers.hpp"

#include <cctype>
#include <vector>

#include "tabletask/util.hpp"

namespace tabletask {

namespace {

struct Span {
    std::size_t begin;
    std::size_t end; // one past the closing brace
};

// Top-level {...} spans in order of appearance, tracking string literals
// so braces inside quoted text do not confuse the balance.
std::vector<Span> object_spans(const std::string& text) {
    std::vector<Span> spans;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"' && depth > 0) {
            in_string = true;
            continue;
        }
        if (c == '{') {
            if (depth == 0) start = i;
            ++depth;
        } else if (c == '}') {
            if (depth > 0 && --depth == 0) spans.push_back({start, i + 1});
        }
    }
    return spans;
}

} // namespace

std::optional<nlohmann::json> extract_final_json(const std::string& text) {
    auto spans = object_spans(text);
    for (auto it = spans.rbegin(); it != spans.rend(); ++it) {
        nlohmann::json j =
            nlohmann::json::parse(text.substr(it->begin, it->end - it->begin), nullptr, false);
        if (!j.is_discarded() && j.is_object()) return j;
    }
    return std::nullopt;
}

std::string strip_final_json(const std::string& text) {
    auto spans = object_spans(text);
    for (auto it = spans.rbegin(); it != spans.rend(); ++it) {
        nlohmann::json j =
            nlohmann::json::parse(text.substr(it->begin, it->end - it->begin), nullptr, false);
        if (!j.is_discarded() && j.is_object())
            return text.substr(0, it->begin) + text.substr(it->end);
    }
    return text;
}

std::string normalize_value(const std::string& s) {
    return to_lower(strip_thousands_separators(trim(s)));
}

std::string normalize_row_id(const nlohmann::json& v) {
    std::string s;
    if (v.is_number_integer()) s = std::to_string(v.get<int64_t>());
    else if (v.is_number()) s = std::to_string(static_cast<int64_t>(v.get<double>()));
    else if (v.is_string()) s = v.get<std::string>();
    else return "";
    std::string digits;
    for (char c : s)
        if (std::isdigit(static_cast<unsigned char>(c))) digits += c;
    return digits;
}

} // namespace tabletask
