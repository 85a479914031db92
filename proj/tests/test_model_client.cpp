#include "doctest.h"

#include <atomic>
#include <chrono>
#include <thread>

#include "tabletask/errors.hpp"
#include "tabletask/model_client.hpp"

using namespace tabletask;

namespace {
ProviderConfig mock_config(const std::string& mode) {
    ProviderConfig cfg;
    cfg.provider = "mock";
    cfg.mock_mode = mode;
    return cfg;
}
} // namespace

TEST_CASE("echo-gold mock returns the marker content") {
    auto client = ScriptedMockClient::echo_gold();
    std::string prompt = embed_eval_marker("What is the capital?", "{\"answer\":\"Paris\"}", 3);
    CompletionRequest req{"m", prompt, 0.0, 64};
    auto resp = client->complete(req);
    CHECK(resp.text == "{\"answer\":\"Paris\"}");
    CHECK(resp.finish == FinishReason::stop);

    auto extracted = extract_eval_marker(prompt);
    REQUIRE(extracted.has_value());
    CHECK(extracted->second == 3);

    // no marker, nothing to echo
    auto empty = client->complete({"m", "plain prompt", 0.0, 64});
    CHECK(empty.text.empty());
}

TEST_CASE("scripted mock hands out entries in call order") {
    ProviderConfig cfg = mock_config("script");
    cfg.script = {{{"text", "first"}}, {{"text", "second"}}, {{"text", "third"}}};
    ScriptedMockClient client(cfg);
    CHECK(client.complete({"m", "p", 0, 8}).text == "first");
    CHECK(client.complete({"m", "p", 0, 8}).text == "second");
    CHECK(client.complete({"m", "p", 0, 8}).text == "third");
    CHECK_THROWS_AS(client.complete({"m", "p", 0, 8}), ProviderError);
}

TEST_CASE("transient failures retry with bounded attempts") {
    ProviderConfig cfg = mock_config("script");
    cfg.script = {{{"error", "Transport"}}, {{"error", "Transport"}}, {{"text", "ok"}}};
    cfg.max_attempts = 3;
    ScriptedMockClient client(cfg);
    auto resp = client.complete({"m", "p", 0, 8});
    CHECK(resp.text == "ok");
    CHECK(resp.attempts == 3);

    ProviderConfig fail_cfg = mock_config("script");
    fail_cfg.script = {{{"error", "Transport"}}, {{"error", "Transport"}},
                       {{"error", "Transport"}}};
    fail_cfg.max_attempts = 3;
    ScriptedMockClient failing(fail_cfg);
    CHECK_THROWS_AS(failing.complete({"m", "p", 0, 8}), Transport);

    // auth errors never retry
    ProviderConfig auth_cfg = mock_config("script");
    auth_cfg.script = {{{"error", "Auth"}}, {{"text", "never"}}};
    ScriptedMockClient auth_client(auth_cfg);
    CHECK_THROWS_AS(auth_client.complete({"m", "p", 0, 8}), Auth);
}

TEST_CASE("batch preserves input order and carries per-item errors in place") {
    // Adversarial latency: an echo mock answering from markers, hammered
    // with shuffled-duration work via high concurrency.
    auto client = ScriptedMockClient::echo_gold();
    client->set_concurrency(8);
    std::vector<CompletionRequest> reqs;
    for (int i = 0; i < 50; ++i)
        reqs.push_back({"m", embed_eval_marker("q", "gold-" + std::to_string(i), i), 0.0, 8});
    auto responses = client->batch_complete(reqs);
    REQUIRE(responses.size() == 50);
    for (int i = 0; i < 50; ++i) CHECK(responses[i].text == "gold-" + std::to_string(i));

    // single item batch behaves like complete()
    auto single = client->batch_complete({reqs[0]});
    CHECK(single[0].text == client->complete(reqs[0]).text);

    // one failing item leaves the others intact
    ProviderConfig cfg = mock_config("script");
    cfg.script = {{{"text", "a"}}, {{"error", "Auth"}}, {{"text", "c"}}};
    cfg.concurrency = 1;
    ScriptedMockClient scripted(cfg);
    auto mixed = scripted.batch_complete({{"m", "1", 0, 8}, {"m", "2", 0, 8}, {"m", "3", 0, 8}});
    CHECK(mixed[0].text == "a");
    CHECK(mixed[1].finish == FinishReason::error);
    CHECK(mixed[1].error == "Auth");
    CHECK(mixed[2].text == "c");
}

namespace {
// Echo mock whose per-call latency is anti-correlated with submission
// order, so completion order inverts while output order must not.
class JitteryEchoClient : public ModelClient {
public:
    JitteryEchoClient() { concurrency_ = 16; }

protected:
    CompletionResponse complete_once(const CompletionRequest& req) override {
        auto marker = extract_eval_marker(req.prompt);
        if (marker)
            std::this_thread::sleep_for(
                std::chrono::milliseconds((31 - marker->second % 32)));
        CompletionResponse resp;
        resp.text = marker ? marker->first : "";
        return resp;
    }
};
} // namespace

TEST_CASE("adversarial latencies still yield input order") {
    JitteryEchoClient client;
    std::vector<CompletionRequest> reqs;
    for (int i = 0; i < 32; ++i)
        reqs.push_back({"m", embed_eval_marker("q", "g" + std::to_string(i), i), 0.0, 8});
    auto responses = client.batch_complete(reqs);
    for (int i = 0; i < 32; ++i) REQUIRE(responses[i].text == "g" + std::to_string(i));
}

TEST_CASE("fraction-correct mock answers the configured share exactly") {
    ProviderConfig cfg = mock_config("fraction_correct");
    cfg.correct_fraction = 0.46;
    ScriptedMockClient client(cfg);
    int correct = 0;
    for (int i = 0; i < 1000; ++i) {
        std::string gold = "{\"column\":\"music\"}";
        auto resp = client.complete({"m", embed_eval_marker("q", gold, i), 0.0, 8});
        if (resp.text == gold) ++correct;
    }
    CHECK(correct == 460);
}

TEST_CASE("empty prompts are rejected") {
    auto client = ScriptedMockClient::echo_gold();
    CHECK_THROWS_AS(client->complete({"m", "", 0.0, 8}), ProviderError);
}

TEST_CASE("provider config round-trips through json") {
    nlohmann::json j = {{"provider", "mock"},
                        {"model", "test-model"},
                        {"concurrency", 4},
                        {"mock", {{"mode", "fraction_correct"}, {"correct_fraction", 0.25}}}};
    ProviderConfig cfg = ProviderConfig::from_json(j);
    CHECK(cfg.mock_mode == "fraction_correct");
    CHECK(cfg.correct_fraction == 0.25);
    CHECK(cfg.concurrency == 4);
    CHECK_THROWS_AS(ProviderConfig::from_json({{"provider", "grpc"}}), ConfigError);
}

TEST_CASE("marker survives prompts that contain json blocks") {
    std::string prompt = "Instruction with {\"decoy\": 1} inside.";
    std::string marked = embed_eval_marker(prompt, "GOLD {\"x\": 2}", 9);
    auto m = extract_eval_marker(marked);
    REQUIRE(m.has_value());
    CHECK(m->first == "GOLD {\"x\": 2}");
    CHECK(m->second == 9);
}
