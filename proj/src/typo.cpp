#include "tabletask/typo.hpp"

#include <cctype>
#include <map>

namespace tabletask {

namespace {

const std::map<char, std::string>& qwerty_neighbors() {
    static const std::map<char, std::string> n = {
        {'q', "wa"},   {'w', "qes"},  {'e', "wrd"},  {'r', "etf"},  {'t', "ryg"},
        {'y', "tuh"},  {'u', "yij"},  {'i', "uok"},  {'o', "ipl"},  {'p', "ol"},
        {'a', "qsz"},  {'s', "adwx"}, {'d', "sfec"}, {'f', "dgrv"}, {'g', "fhtb"},
        {'h', "gjyn"}, {'j', "hkum"}, {'k', "jli"},  {'l', "kpo"},  {'z', "ax"},
        {'x', "zcs"},  {'c', "xvd"},  {'v', "cbf"},  {'b', "vng"},  {'n', "bmh"},
        {'m', "nj"},
    };
    return n;
}

std::optional<std::string> substitute(const std::string& v, Rng& rng) {
    std::vector<std::size_t> alpha;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (std::isalpha(static_cast<unsigned char>(v[i]))) alpha.push_back(i);
    if (alpha.empty()) return std::nullopt;
    std::size_t pos = alpha[rng.index(alpha.size())];
    char c = v[pos];
    char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    auto it = qwerty_neighbors().find(lower);
    if (it == qwerty_neighbors().end()) return std::nullopt;
    char repl = it->second[rng.index(it->second.size())];
    if (std::isupper(static_cast<unsigned char>(c)))
        repl = static_cast<char>(std::toupper(static_cast<unsigned char>(repl)));
    std::string out = v;
    out[pos] = repl;
    return out;
}

std::optional<std::string> erase_one(const std::string& v, Rng& rng) {
    if (v.size() < 2) return std::nullopt;
    std::size_t pos = rng.index(v.size());
    std::string out = v;
    out.erase(pos, 1);
    return out;
}

std::optional<std::string> duplicate_one(const std::string& v, Rng& rng) {
    if (v.empty()) return std::nullopt;
    std::size_t pos = rng.index(v.size());
    std::string out = v;
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), v[pos]);
    return out;
}

std::optional<std::string> transpose(const std::string& v, Rng& rng) {
    std::vector<std::size_t> spots;
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
        if (v[i] != v[i + 1]) spots.push_back(i);
    if (spots.empty()) return std::nullopt;
    std::size_t pos = spots[rng.index(spots.size())];
    std::string out = v;
    std::swap(out[pos], out[pos + 1]);
    return out;
}

} // namespace

bool typo_eligible(const std::string& value) {
    std::size_t alpha = 0;
    for (char c : value)
        if (std::isalpha(static_cast<unsigned char>(c))) ++alpha;
    return alpha >= 4;
}

std::optional<std::string> inject_typo(const std::string& value, Rng& rng) {
    // A few attempts across uniformly drawn classes; some classes may be
    // inapplicable (e.g. transposition on a run of equal characters).
    for (int attempt = 0; attempt < 8; ++attempt) {
        auto cls = static_cast<TypoClass>(rng.index(4));
        std::optional<std::string> out;
        switch (cls) {
            case TypoClass::adjacent_substitution: out = substitute(value, rng); break;
            case TypoClass::deletion: out = erase_one(value, rng); break;
            case TypoClass::duplication: out = duplicate_one(value, rng); break;
            case TypoClass::transposition: out = transpose(value, rng); break;
        }
        if (out && *out != value) return out;
    }
    return std::nullopt;
}

} // namespace tabletask
