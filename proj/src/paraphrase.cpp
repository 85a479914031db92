#include "tabletask/paraphrase.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "json.hpp"

#include "tabletask/errors.hpp"
#include "tabletask/util.hpp"

namespace tabletask {

namespace {

// Full-header entries. Keys are lowercase.
const std::map<std::string, std::vector<std::string>>& full_header_dict() {
    static const std::map<std::string, std::vector<std::string>> d = {
        {"company names", {"enterprises", "business names", "firms"}},
        {"company name", {"enterprise", "business name", "firm"}},
        {"emp-id", {"employee identifier", "staff id", "worker id"}},
        {"emp id", {"employee identifier", "staff id"}},
        {"employee id", {"staff identifier", "worker id", "personnel number"}},
        {"first name", {"given name", "forename"}},
        {"last name", {"family name", "surname"}},
        {"full name", {"complete name", "name"}},
        {"date of birth", {"birth date", "birthday"}},
        {"phone number", {"telephone", "contact number", "phone"}},
        {"zip code", {"postal code", "zip"}},
        {"unit price", {"price per unit", "cost per item"}},
        {"gdp", {"gross domestic product", "economic output"}},
        {"population", {"number of inhabitants", "residents", "headcount"}},
        {"area", {"surface area", "extent", "region size"}},
        {"country", {"nation", "state"}},
        {"continent", {"landmass", "world region"}},
        {"year", {"calendar year", "yr"}},
        {"rank", {"position", "standing", "place"}},
        {"no", {"number", "index"}},
        {"no.", {"number", "index"}},
    };
    return d;
}

// Word-level synonyms and abbreviation expansions. Keys are lowercase.
const std::map<std::string, std::vector<std::string>>& word_dict() {
    static const std::map<std::string, std::vector<std::string>> d = {
        {"name", {"title", "label", "designation"}},
        {"names", {"titles", "labels", "designations"}},
        {"company", {"firm", "enterprise", "business"}},
        {"companies", {"firms", "enterprises", "businesses"}},
        {"id", {"identifier", "code", "key"}},
        {"ids", {"identifiers", "codes", "keys"}},
        {"emp", {"employee", "staff"}},
        {"employee", {"staff member", "worker"}},
        {"employees", {"staff", "workers"}},
        {"qty", {"quantity", "count"}},
        {"quantity", {"amount", "count"}},
        {"amount", {"sum", "total", "value"}},
        {"price", {"cost", "rate", "charge"}},
        {"prices", {"costs", "rates"}},
        {"cost", {"price", "expense"}},
        {"date", {"day", "calendar date"}},
        {"dates", {"days", "calendar dates"}},
        {"time", {"moment", "clock time"}},
        {"year", {"calendar year", "annum"}},
        {"years", {"calendar years"}},
        {"month", {"calendar month"}},
        {"day", {"date", "weekday"}},
        {"city", {"town", "municipality"}},
        {"cities", {"towns", "municipalities"}},
        {"country", {"nation", "state"}},
        {"countries", {"nations", "states"}},
        {"state", {"province", "region"}},
        {"region", {"area", "zone", "district"}},
        {"address", {"location", "street address"}},
        {"location", {"place", "site", "position"}},
        {"phone", {"telephone", "contact number"}},
        {"email", {"e-mail address", "electronic mail"}},
        {"age", {"years old", "age in years"}},
        {"gender", {"sex"}},
        {"salary", {"pay", "wage", "compensation"}},
        {"revenue", {"income", "earnings", "turnover"}},
        {"profit", {"earnings", "net income", "gain"}},
        {"sales", {"revenue", "units sold"}},
        {"total", {"sum", "overall", "aggregate"}},
        {"average", {"mean", "avg"}},
        {"avg", {"average", "mean"}},
        {"min", {"minimum", "lowest"}},
        {"max", {"maximum", "highest"}},
        {"minimum", {"lowest", "smallest"}},
        {"maximum", {"highest", "largest"}},
        {"number", {"count", "quantity", "num"}},
        {"num", {"number", "count"}},
        {"count", {"number", "tally"}},
        {"rate", {"ratio", "frequency"}},
        {"percent", {"percentage", "share"}},
        {"percentage", {"percent", "share"}},
        {"score", {"points", "result", "grade"}},
        {"scores", {"points", "results", "grades"}},
        {"grade", {"mark", "score", "level"}},
        {"rank", {"position", "standing", "place"}},
        {"ranking", {"standing", "order"}},
        {"status", {"state", "condition"}},
        {"type", {"kind", "category", "class"}},
        {"types", {"kinds", "categories", "classes"}},
        {"category", {"class", "group", "type"}},
        {"categories", {"classes", "groups", "types"}},
        {"group", {"cluster", "set", "category"}},
        {"description", {"details", "summary", "notes"}},
        {"title", {"name", "heading", "caption"}},
        {"author", {"writer", "creator"}},
        {"authors", {"writers", "creators"}},
        {"publisher", {"publishing house", "imprint"}},
        {"product", {"item", "article", "good"}},
        {"products", {"items", "articles", "goods"}},
        {"item", {"product", "article", "entry"}},
        {"items", {"products", "articles", "entries"}},
        {"order", {"purchase", "transaction"}},
        {"orders", {"purchases", "transactions"}},
        {"customer", {"client", "buyer", "patron"}},
        {"customers", {"clients", "buyers", "patrons"}},
        {"user", {"account holder", "member"}},
        {"users", {"account holders", "members"}},
        {"owner", {"holder", "proprietor"}},
        {"manager", {"supervisor", "lead"}},
        {"department", {"division", "unit", "dept"}},
        {"dept", {"department", "division"}},
        {"team", {"squad", "crew", "group"}},
        {"teams", {"squads", "crews", "groups"}},
        {"player", {"athlete", "competitor"}},
        {"players", {"athletes", "competitors"}},
        {"student", {"pupil", "learner"}},
        {"students", {"pupils", "learners"}},
        {"teacher", {"instructor", "educator"}},
        {"school", {"institution", "academy"}},
        {"course", {"class", "module"}},
        {"subject", {"topic", "discipline"}},
        {"result", {"outcome", "score"}},
        {"results", {"outcomes", "scores"}},
        {"value", {"figure", "amount"}},
        {"values", {"figures", "amounts"}},
        {"code", {"identifier", "key"}},
        {"codes", {"identifiers", "keys"}},
        {"key", {"code", "identifier"}},
        {"length", {"extent", "span"}},
        {"width", {"breadth"}},
        {"height", {"elevation", "stature"}},
        {"weight", {"mass"}},
        {"size", {"dimension", "magnitude"}},
        {"speed", {"velocity", "pace"}},
        {"distance", {"range", "span"}},
        {"duration", {"length of time", "time span"}},
        {"capacity", {"volume", "limit"}},
        {"population", {"inhabitants", "residents"}},
        {"area", {"surface", "extent"}},
        {"budget", {"allocation", "funds"}},
        {"fund", {"capital", "pool"}},
        {"tax", {"levy", "duty"}},
        {"fee", {"charge", "payment"}},
        {"balance", {"remaining amount", "account balance"}},
        {"account", {"ledger", "profile"}},
        {"currency", {"money", "denomination"}},
        {"stock", {"inventory", "shares"}},
        {"market", {"marketplace", "exchange"}},
        {"brand", {"make", "label"}},
        {"model", {"version", "variant"}},
        {"color", {"colour", "shade", "hue"}},
        {"colour", {"color", "shade"}},
        {"material", {"substance", "fabric"}},
        {"genre", {"category", "style"}},
        {"language", {"tongue", "lang"}},
        {"nationality", {"citizenship", "origin"}},
        {"capital", {"capital city", "seat of government"}},
        {"mayor", {"city head"}},
        {"president", {"head of state", "leader"}},
        {"director", {"head", "chief"}},
        {"movie", {"film", "picture"}},
        {"film", {"movie", "motion picture"}},
        {"song", {"track", "tune"}},
        {"album", {"record", "release"}},
        {"artist", {"performer", "musician"}},
        {"band", {"group", "ensemble"}},
        {"book", {"volume", "publication"}},
        {"journal", {"periodical", "review"}},
        {"article", {"paper", "piece"}},
        {"page", {"pg", "leaf"}},
        {"chapter", {"section", "part"}},
        {"section", {"part", "segment"}},
        {"version", {"release", "revision"}},
        {"release", {"launch", "version"}},
        {"start", {"begin", "beginning"}},
        {"end", {"finish", "conclusion"}},
        {"begin", {"start"}},
        {"finish", {"end", "completion"}},
        {"open", {"opening"}},
        {"close", {"closing"}},
        {"high", {"peak", "maximum"}},
        {"low", {"bottom", "minimum"}},
        {"first", {"initial", "earliest"}},
        {"last", {"final", "latest"}},
        {"next", {"following", "subsequent"}},
        {"previous", {"prior", "preceding"}},
        {"wins", {"victories", "won"}},
        {"losses", {"defeats", "lost"}},
        {"goals", {"scores", "points"}},
        {"points", {"score", "tally"}},
        {"games", {"matches", "contests"}},
        {"match", {"game", "contest"}},
        {"season", {"campaign", "year"}},
        {"event", {"occasion", "happening"}},
        {"events", {"occasions", "happenings"}},
        {"position", {"role", "post", "rank"}},
        {"role", {"function", "position"}},
        {"level", {"tier", "grade"}},
        {"unit", {"measure", "division"}},
        {"units", {"measures", "divisions"}},
        {"source", {"origin", "provenance"}},
        {"destination", {"target", "endpoint"}},
        {"origin", {"source", "starting point"}},
        {"target", {"goal", "objective"}},
        {"comment", {"remark", "note"}},
        {"comments", {"remarks", "notes"}},
        {"note", {"remark", "annotation"}},
        {"notes", {"remarks", "annotations"}},
        {"reference", {"citation", "ref"}},
        {"ref", {"reference", "citation"}},
        {"link", {"url", "hyperlink"}},
        {"url", {"web address", "link"}},
        {"website", {"site", "web page"}},
        {"image", {"picture", "photo"}},
        {"photo", {"picture", "image"}},
        {"file", {"document", "record"}},
        {"record", {"entry", "row"}},
        {"records", {"entries", "rows"}},
        {"row", {"record", "line"}},
        {"column", {"field", "attribute"}},
        {"field", {"column", "attribute"}},
        {"attribute", {"property", "feature"}},
        {"property", {"attribute", "characteristic"}},
        {"feature", {"characteristic", "trait"}},
        {"label", {"tag", "name"}},
        {"tag", {"label", "marker"}},
        {"art", {"fine arts", "artwork"}},
        {"music", {"musical score", "melody"}},
        {"math", {"mathematics", "maths"}},
        {"science", {"natural science"}},
        {"history", {"historical record", "past events"}},
    };
    return d;
}

struct Token {
    std::string text;
    char separator; // separator preceding this token, or '\0' for the first
};

std::vector<Token> tokenize_header(const std::string& h) {
    std::vector<Token> out;
    std::string cur;
    char sep = '\0';
    for (char c : h) {
        if (c == ' ' || c == '-' || c == '_' || c == '/') {
            if (!cur.empty()) out.push_back({cur, sep});
            cur.clear();
            sep = c;
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back({cur, sep});
    return out;
}

std::string join_tokens(const std::vector<Token>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (t.separator != '\0') out += t.separator;
        out += t.text;
    }
    return out;
}

} // namespace

const HeaderParaphraser& HeaderParaphraser::builtin() {
    static const HeaderParaphraser p = [] {
        HeaderParaphraser hp;
        return hp;
    }();
    return p;
}

HeaderParaphraser HeaderParaphraser::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open paraphrase dictionary: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ConfigError("paraphrase dictionary must be a JSON object: " + path);
    HeaderParaphraser p = builtin();
    for (auto it = j.begin(); it != j.end(); ++it)
        p.add(it.key(), it.value().get<std::vector<std::string>>());
    return p;
}

void HeaderParaphraser::add(const std::string& header, std::vector<std::string> paraphrases) {
    full_[to_lower(header)] = std::move(paraphrases);
}

std::vector<std::string> HeaderParaphraser::candidates(const std::string& header) const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    std::string lower = to_lower(header);
    auto push = [&](const std::string& cand) {
        std::string c = trim(cand);
        if (c.empty() || iequals(c, header)) return;
        if (seen.insert(to_lower(c)).second) out.push_back(c);
    };

    // Extra entries first, then the bundled full-header dictionary.
    auto it = full_.find(lower);
    if (it != full_.end())
        for (const auto& c : it->second) push(c);
    const auto& full = full_header_dict();
    auto fit = full.find(lower);
    if (fit != full.end())
        for (const auto& c : fit->second) push(c);

    // Word-level: replace one token at a time, then all replaceable ones.
    const auto& words = word_dict();
    auto tokens = tokenize_header(header);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto wit = words.find(to_lower(tokens[i].text));
        if (wit == words.end()) continue;
        for (const auto& repl : wit->second) {
            auto variant = tokens;
            variant[i].text = repl;
            push(join_tokens(variant));
        }
    }
    if (tokens.size() > 1) {
        auto variant = tokens;
        bool replaced = false;
        for (auto& tok : variant) {
            auto wit = words.find(to_lower(tok.text));
            if (wit != words.end()) {
                tok.text = wit->second.front();
                replaced = true;
            }
        }
        if (replaced) push(join_tokens(variant));
    }
    return out;
}

HeaderParaphraseMap HeaderParaphraser::paraphrase_headers(const std::vector<std::string>& headers,
                                                          Rng& rng) const {
    std::set<std::string> taken; // lowered paraphrases and originals
    for (const auto& h : headers) taken.insert(to_lower(h));

    HeaderParaphraseMap map;
    map.reserve(headers.size());
    for (const auto& h : headers) {
        auto cands = candidates(h);
        if (cands.empty())
            throw ParaphraseFailure("no paraphrase available for header '" + h + "'");
        rng.shuffle(cands);
        const std::string* chosen = nullptr;
        for (const auto& c : cands) {
            if (!taken.count(to_lower(c))) {
                chosen = &c;
                break;
            }
        }
        if (!chosen)
            throw ParaphraseFailure("all paraphrases for header '" + h + "' collide");
        taken.insert(to_lower(*chosen));
        map.emplace_back(h, *chosen);
    }
    return map;
}

} // namespace tabletask
