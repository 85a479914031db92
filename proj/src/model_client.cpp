#include "tabletask/model_client.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"

#include "tabletask/errors.hpp"
#include "tabletask/util.hpp"

namespace tabletask {

const char* to_string(FinishReason r) {
    switch (r) {
        case FinishReason::stop: return "stop";
        case FinishReason::length: return "length";
        case FinishReason::error: return "error";
    }
    return "stop";
}

ProviderConfig ProviderConfig::from_json(const nlohmann::json& j) {
    ProviderConfig c;
    c.provider = j.value("provider", c.provider);
    c.endpoint = j.value("endpoint", c.endpoint);
    c.model = j.value("model", c.model);
    c.credential_env = j.value("credential_env", c.credential_env);
    c.concurrency = j.value("concurrency", c.concurrency);
    c.max_attempts = j.value("max_attempts", c.max_attempts);
    c.backoff_ms = j.value("backoff_ms", c.backoff_ms);
    c.temperature = j.value("temperature", c.temperature);
    c.max_tokens = j.value("max_tokens", c.max_tokens);
    if (j.contains("mock")) {
        const auto& m = j["mock"];
        c.mock_mode = m.value("mode", c.mock_mode);
        if (m.contains("script")) c.script = m["script"].get<std::vector<nlohmann::json>>();
        c.correct_fraction = m.value("correct_fraction", c.correct_fraction);
    }
    if (c.provider != "mock" && c.provider != "http")
        throw ConfigError("unknown provider '" + c.provider + "'");
    return c;
}

ProviderConfig ProviderConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open provider config: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("provider config is not valid JSON: " + path);
    return from_json(j);
}

nlohmann::json ProviderConfig::to_json() const {
    nlohmann::json j = {{"provider", provider},     {"model", model},
                        {"concurrency", concurrency}, {"max_attempts", max_attempts},
                        {"temperature", temperature}, {"max_tokens", max_tokens}};
    if (provider == "http") j["endpoint"] = endpoint;
    if (provider == "mock")
        j["mock"] = {{"mode", mock_mode}, {"correct_fraction", correct_fraction}};
    return j;
}

CompletionResponse ModelClient::complete(const CompletionRequest& req) {
    if (req.prompt.empty()) throw ProviderError("empty prompt");
    unsigned backoff = backoff_ms_;
    for (unsigned attempt = 1;; ++attempt) {
        try {
            auto start = std::chrono::steady_clock::now();
            CompletionResponse resp = complete_once(req);
            resp.attempts = static_cast<int>(attempt);
            resp.latency_ms = static_cast<int>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                                   std::chrono::steady_clock::now() - start)
                                                   .count());
            return resp;
        } catch (const Transport&) {
            if (attempt >= max_attempts_) throw;
        } catch (const RateLimited&) {
            if (attempt >= max_attempts_) throw;
        }
        if (backoff) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff *= 2;
        }
    }
}

std::vector<CompletionResponse> ModelClient::batch_complete(
    const std::vector<CompletionRequest>& reqs) {
    std::vector<CompletionResponse> out(reqs.size());
    parallel_for(reqs.size(), concurrency_, [&](std::size_t i) {
        try {
            out[i] = complete(reqs[i]);
        } catch (const Error& e) {
            out[i].finish = FinishReason::error;
            out[i].error = e.code();
            out[i].text.clear();
        }
    });
    return out;
}

// ---------------------------------------------------------------------------
// Eval markers

namespace {
constexpr const char* kMarkerPrefix = "\n<!--EVAL ";
constexpr const char* kMarkerSuffix = "-->";
} // namespace

std::string embed_eval_marker(const std::string& prompt, const std::string& gold,
                              std::size_t index) {
    nlohmann::json j = {{"gold", gold}, {"idx", index}};
    return prompt + kMarkerPrefix + j.dump() + kMarkerSuffix;
}

std::optional<std::pair<std::string, std::size_t>> extract_eval_marker(const std::string& prompt) {
    std::size_t pos = prompt.rfind(kMarkerPrefix);
    if (pos == std::string::npos) return std::nullopt;
    std::size_t start = pos + std::string(kMarkerPrefix).size();
    std::size_t end = prompt.find(kMarkerSuffix, start);
    if (end == std::string::npos) return std::nullopt;
    nlohmann::json j = nlohmann::json::parse(prompt.substr(start, end - start), nullptr, false);
    if (j.is_discarded() || !j.contains("gold") || !j.contains("idx")) return std::nullopt;
    return std::make_pair(j["gold"].get<std::string>(), j["idx"].get<std::size_t>());
}

// ---------------------------------------------------------------------------
// Scripted mock

ScriptedMockClient::ScriptedMockClient(const ProviderConfig& config) : config_(config) {
    concurrency_ = config.concurrency;
    max_attempts_ = config.max_attempts;
    backoff_ms_ = 0; // keep retry tests instant
    model_id_ = config.model.empty() ? "mock" : config.model;
}

std::unique_ptr<ScriptedMockClient> ScriptedMockClient::echo_gold() {
    ProviderConfig c;
    c.provider = "mock";
    c.mock_mode = "echo_gold";
    c.model = "mock-echo-gold";
    return std::make_unique<ScriptedMockClient>(c);
}

namespace {

// Mangles a gold answer into a parseable but wrong one: string values get
// a suffix, numbers get shifted.
nlohmann::json mangle(const nlohmann::json& j) {
    if (j.is_string()) return j.get<std::string>() + " (incorrect)";
    if (j.is_number_integer()) return j.get<int64_t>() + 1;
    if (j.is_number_float()) return j.get<double>() + 1.0;
    if (j.is_boolean()) return !j.get<bool>();
    if (j.is_array()) {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& v : j) out.push_back(mangle(v));
        return out;
    }
    if (j.is_object()) {
        nlohmann::json out = nlohmann::json::object();
        for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = mangle(it.value());
        return out;
    }
    return j;
}

std::string wrong_answer_for(const std::string& gold) {
    nlohmann::json j = nlohmann::json::parse(gold, nullptr, false);
    if (j.is_discarded()) return gold + " (incorrect)";
    // Special-case binary answers: flipping keeps them parseable.
    if (j.is_object() && j.contains("match")) {
        j["match"] = j["match"] == "yes" ? "no" : "yes";
        return j.dump();
    }
    return mangle(j).dump();
}

} // namespace

CompletionResponse ScriptedMockClient::complete_once(const CompletionRequest& req) {
    CompletionResponse resp;
    if (config_.mock_mode == "script") {
        nlohmann::json entry;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            if (script_cursor_ >= config_.script.size())
                throw ProviderError("mock script exhausted");
            entry = config_.script[script_cursor_++];
        }
        if (entry.contains("error")) {
            std::string code = entry["error"].get<std::string>();
            if (code == "Transport") throw Transport("scripted failure");
            if (code == "RateLimited") throw RateLimited("scripted failure");
            if (code == "Auth") throw Auth("scripted failure");
            throw ProviderError("scripted failure: " + code);
        }
        resp.text = entry.value("text", "");
        return resp;
    }

    auto marker = extract_eval_marker(req.prompt);
    if (config_.mock_mode == "echo_gold") {
        if (!marker) {
            resp.text.clear(); // nothing to echo; scores as unparsable
            return resp;
        }
        resp.text = marker->first;
        return resp;
    }
    if (config_.mock_mode == "fraction_correct") {
        if (!marker) {
            resp.text.clear();
            return resp;
        }
        auto [gold, idx] = *marker;
        auto threshold = static_cast<std::size_t>(config_.correct_fraction * 100.0 + 0.5);
        resp.text = (idx % 100) < threshold ? gold : wrong_answer_for(gold);
        return resp;
    }
    throw ConfigError("unknown mock mode '" + config_.mock_mode + "'");
}

// ---------------------------------------------------------------------------
// HTTP provider

HttpProviderClient::HttpProviderClient(const ProviderConfig& config) : config_(config) {
    concurrency_ = config.concurrency;
    max_attempts_ = config.max_attempts;
    backoff_ms_ = config.backoff_ms;
    model_id_ = config.model;
    std::string url = config.endpoint;
    if (url.rfind("http://", 0) == 0) url = url.substr(7);
    else if (url.rfind("https://", 0) == 0)
        throw ConfigError("https endpoints are not supported by this build; use http");
    auto slash = url.find('/');
    std::string hostport = slash == std::string::npos ? url : url.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : url.substr(slash);
    auto colon = hostport.find(':');
    host_ = colon == std::string::npos ? hostport : hostport.substr(0, colon);
    port_ = colon == std::string::npos ? 80 : std::stoi(hostport.substr(colon + 1));
    if (host_.empty()) throw ConfigError("provider endpoint missing host: " + config.endpoint);
}

CompletionResponse HttpProviderClient::complete_once(const CompletionRequest& req) {
    httplib::Client cli(host_, port_);
    cli.set_connection_timeout(10);
    cli.set_read_timeout(120);
    httplib::Headers headers;
    if (const char* cred = std::getenv(config_.credential_env.c_str()); cred && *cred)
        headers.emplace("Authorization", std::string("Bearer ") + cred);

    nlohmann::json body = {{"model", req.model.empty() ? config_.model : req.model},
                           {"prompt", req.prompt},
                           {"temperature", req.temperature},
                           {"max_tokens", req.max_tokens}};
    auto res = cli.Post(path_, headers, body.dump(), "application/json");
    if (!res) throw Transport("connection to " + host_ + " failed");
    if (res->status == 401 || res->status == 403) throw Auth("provider returned " + std::to_string(res->status));
    if (res->status == 429) throw RateLimited("provider returned 429");
    if (res->status >= 500) throw Transport("provider returned " + std::to_string(res->status));
    if (res->status != 200) throw ProviderError("provider returned " + std::to_string(res->status) +
                                                ": " + res->body);
    nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("text"))
        throw ProviderError("provider response is not {text, finish_reason} JSON");
    CompletionResponse resp;
    resp.text = j["text"].get<std::string>();
    std::string fr = j.value("finish_reason", "stop");
    resp.finish = fr == "length" ? FinishReason::length : FinishReason::stop;
    return resp;
}

std::unique_ptr<ModelClient> make_client(const ProviderConfig& config) {
    if (config.provider == "mock") return std::make_unique<ScriptedMockClient>(config);
    if (config.provider == "http") return std::make_unique<HttpProviderClient>(config);
    throw ConfigError("unknown provider '" + config.provider + "'");
}

} // namespace tabletask
