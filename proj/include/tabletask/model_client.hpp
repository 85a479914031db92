#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace tabletask {

struct CompletionRequest {
    std::string model;
    std::string prompt;
    double temperature = 0.0;
    int max_tokens = 1024;
};

enum class FinishReason { stop, length, error };

const char* to_string(FinishReason r);

struct CompletionResponse {
    std::string text;
    FinishReason finish = FinishReason::stop;
    int latency_ms = 0;
    int attempts = 1;
    std::string error; // error code when finish == error
};

/// Provider settings: endpoint + credential for HTTP providers, scripted
/// behaviour for the hermetic mock.
struct ProviderConfig {
    std::string provider = "mock"; // "mock" or "http"
    std::string endpoint;
    std::string model = "default";
    std::string credential_env = "TABLETASK_API_KEY";
    unsigned concurrency = 8;
    unsigned max_attempts = 3;
    unsigned backoff_ms = 100;
    double temperature = 0.0;
    int max_tokens = 1024;

    // Mock settings.
    std::string mock_mode = "echo_gold"; // echo_gold | script | fraction_correct
    std::vector<nlohmann::json> script;  // {"text": ...} or {"error": "Transport"}
    double correct_fraction = 1.0;

    static ProviderConfig from_json(const nlohmann::json& j);
    static ProviderConfig load(const std::string& path);
    nlohmann::json to_json() const;
};

/// Completion-model interface. `complete` retries transient transport
/// errors with exponential backoff (bounded attempts); `batch_complete`
/// fans out with a bounded number of in-flight requests and returns
/// responses in input order, carrying per-item failures in-position.
class ModelClient {
public:
    virtual ~ModelClient() = default;

    CompletionResponse complete(const CompletionRequest& req);
    std::vector<CompletionResponse> batch_complete(const std::vector<CompletionRequest>& reqs);

    unsigned concurrency() const { return concurrency_; }
    void set_concurrency(unsigned n) { concurrency_ = n ? n : 1; }

    const std::string& model_id() const { return model_id_; }

protected:
    /// One attempt; throws Transport/Auth/RateLimited/ProviderError.
    virtual CompletionResponse complete_once(const CompletionRequest& req) = 0;

    unsigned concurrency_ = 8;
    unsigned max_attempts_ = 3;
    unsigned backoff_ms_ = 100;
    std::string model_id_ = "default";
};

/// Markers the evaluation harness embeds into prompts so the scripted
/// mock can behave as a perfect (or fixed-accuracy) oracle.
std::string embed_eval_marker(const std::string& prompt, const std::string& gold,
                              std::size_t index);
std::optional<std::pair<std::string, std::size_t>> extract_eval_marker(const std::string& prompt);

/// Deterministic scripted mock:
///  - echo_gold: answers with the gold text embedded in the prompt marker;
///  - script: the k-th call consumes the k-th script entry (text or error);
///  - fraction_correct: answers gold on a fixed fraction of instance
///    indices (idx % 100 < fraction*100), a mangled answer otherwise.
class ScriptedMockClient : public ModelClient {
public:
    explicit ScriptedMockClient(const ProviderConfig& config);

    static std::unique_ptr<ScriptedMockClient> echo_gold();

protected:
    CompletionResponse complete_once(const CompletionRequest& req) override;

private:
    ProviderConfig config_;
    std::mutex mutex_;
    std::size_t script_cursor_ = 0;
};

/// Minimal JSON-POST provider: {model, prompt, temperature, max_tokens}
/// -> {text, finish_reason}. Credential read from the configured
/// environment variable and sent as a bearer token.
class HttpProviderClient : public ModelClient {
public:
    explicit HttpProviderClient(const ProviderConfig& config);

protected:
    CompletionResponse complete_once(const CompletionRequest& req) override;

private:
    ProviderConfig config_;
    std::string host_;
    int port_ = 80;
    std::string path_ = "/";
};

/// Builds a client from config ("mock" or "http").
std::unique_ptr<ModelClient> make_client(const ProviderConfig& config);

} // namespace tabletask
