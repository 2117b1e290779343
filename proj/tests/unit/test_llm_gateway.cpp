// Must match http_backends.cpp so both translation units see one httplib.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "test_support.hpp"

#include "llmsast/digest.hpp"
#include "llmsast/llm_gateway.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <thread>
#include <unordered_set>

using namespace llmsast;
using namespace std::chrono_literals;

namespace {

std::vector<ChatMessage> convo(std::string text) { return {{Role::human, std::move(text)}}; }

struct FlakyBackend final : Backend {
    int failures_left;
    bool provider_error = false;
    int calls = 0;
    explicit FlakyBackend(int failures) : failures_left(failures) {}
    RawCompletion complete(const std::vector<ChatMessage>&, const ModelProfile&, const CompletionParams&) override {
        ++calls;
        if (provider_error) throw ProviderError("401 bad key");
        if (failures_left-- > 0) throw TransientError("503");
        return {"ok", 10, 2};
    }
};

} // namespace

TEST_CASE("cost of 1000 input and 500 output tokens at 0.01/0.03") {
    const auto p = testing::mock_profile();
    CHECK(compute_cost(1000, 500, p).str() == "0.025000");
}

TEST_CASE("model profiles file") {
    const auto profiles = load_model_profiles(testing::source_dir() / "config" / "models.json");
    REQUIRE(profiles.count("gpt-4-0125-preview"));
    const auto& turbo = profiles.at("gpt-4-0125-preview");
    CHECK(turbo.provider == "openai");
    CHECK(turbo.input_price.str() == "0.010000");
    CHECK(turbo.output_price.str() == "0.030000");
    CHECK(turbo.context_window == 128000);
    CHECK(profiles.at("claude-3-opus-20240229").provider == "anthropic");
    CHECK(profiles.at("heuristic").provider == "heuristic");
    CHECK_THROWS_AS(parse_model_profiles(R"({"m": {"provider": "openai", "input_price": 0.01,
        "output_price": "0.03", "context_window": 10}})"),
                    ConfigError);
}

TEST_CASE("replay key is stable and sensitive to every field") {
    const auto p = testing::mock_profile();
    const auto base = convo("hello");
    const std::string k = record_replay_key(base, p, {0.0, 0});
    CHECK(k.size() == 64);
    CHECK(k == record_replay_key(base, p, {0.0, 0}));
    auto p2 = p;
    p2.model_name = "other";
    CHECK(record_replay_key(base, p2, {0.0, 0}) != k);
    CHECK(record_replay_key(base, p, {0.7, 0}) != k);
    CHECK(record_replay_key(base, p, {0.0, 1}) != k);
    CHECK(record_replay_key({{Role::system, "hello"}}, p, {0.0, 0}) != k);
    // Length prefixes keep message boundaries apart.
    CHECK(record_replay_key({{Role::human, "ab"}, {Role::ai, "c"}}, p, {0, 0}) !=
          record_replay_key({{Role::human, "a"}, {Role::ai, "bc"}}, p, {0, 0}));
    // Price changes do not invalidate recordings.
    auto p3 = p;
    p3.input_price = Money::from_micros(1);
    CHECK(record_replay_key(base, p3, {0.0, 0}) == k);
}

TEST_CASE("replay key: 10,000 perturbations give distinct keys") {
    const auto p = testing::mock_profile();
    std::mt19937_64 rng(77);
    std::unordered_set<std::string> keys;
    const std::string text = "public class J1 { void m() { Runtime.getRuntime().exec(cmd); } }";
    for (int i = 0; i < 10000; ++i) {
        std::vector<ChatMessage> m = convo(text);
        CompletionParams params{0.0, 0};
        switch (i % 5) {
        case 0: m[0].content.insert(rng() % m[0].content.size(), std::to_string(i)); break;
        case 1: m.push_back({Role::ai, "answer " + std::to_string(i)}); break;
        case 2: params.run_index = static_cast<std::uint32_t>(i + 1); break;
        case 3: params.temperature = (i / 5 + 1) * 0.001; break;
        default: m[0].content += std::string(static_cast<std::size_t>(i / 5 + 1), ' '); break;
        }
        keys.insert(record_replay_key(m, p, params));
    }
    CHECK(keys.size() == 10000);
}

TEST_CASE("token estimate is bytes over four, rounded up") {
    CHECK(estimate_tokens(convo("abcd")) == 1);
    CHECK(estimate_tokens(convo("abcde")) == 2);
    CHECK(estimate_tokens({{Role::human, std::string(4000, 'x')}, {Role::ai, std::string(400, 'y')}}) == 1100);
}

TEST_CASE("rate limiter keeps any one-second window at the limit") {
    VirtualClock clock;
    RateLimiter rl(5, clock);
    for (int i = 0; i < 200; ++i) rl.acquire();
    const auto h = rl.history();
    REQUIRE(h.size() == 200);
    for (std::size_t i = 5; i < h.size(); ++i) CHECK(h[i] - h[i - 5] >= 1000ms);
    // Nothing is slower than needed: 200 at 5/s takes 39 full windows.
    CHECK(h.back() - h.front() == 39s);
}

TEST_CASE("rate limiter: zero disables limiting; threads share the budget") {
    VirtualClock clock;
    RateLimiter off(0, clock);
    for (int i = 0; i < 100; ++i) off.acquire();
    CHECK(clock.now() == Clock::time_point{});

    VirtualClock c2;
    RateLimiter rl(3, c2);
    std::vector<std::thread> ts;
    for (int t = 0; t < 4; ++t)
        ts.emplace_back([&] {
            for (int i = 0; i < 15; ++i) rl.acquire();
        });
    for (auto& t : ts) t.join();
    auto h = rl.history();
    REQUIRE(h.size() == 60);
    std::sort(h.begin(), h.end());
    for (std::size_t i = 3; i < h.size(); ++i) CHECK(h[i] - h[i - 3] >= 1000ms);
}

TEST_CASE("exponential backoff") {
    RetryPolicy r;
    CHECK(r.backoff_for(1) == 500ms);
    CHECK(r.backoff_for(2) == 1000ms);
    CHECK(r.backoff_for(3) == 2000ms);
    CHECK(r.backoff_for(20) == 30000ms);
}

TEST_CASE("gateway retries transient errors only") {
    VirtualClock clock;
    auto flaky = std::make_shared<FlakyBackend>(2);
    Gateway gw({}, flaky, clock);
    const auto c = gw.complete(convo("x"), testing::mock_profile(), {});
    CHECK(c.message.content == "ok");
    CHECK(flaky->calls == 3);
    CHECK(clock.now() - Clock::time_point{} == 1500ms);
    CHECK(c.usage.wall_time_ms == 1500);
    CHECK(gw.network_calls() == 1);

    auto dead = std::make_shared<FlakyBackend>(100);
    Gateway::Options o;
    o.retry.max_attempts = 3;
    Gateway gw2(o, dead, clock);
    CHECK_THROWS_AS(gw2.complete(convo("x"), testing::mock_profile(), {}), TransientError);
    CHECK(dead->calls == 3);

    auto refused = std::make_shared<FlakyBackend>(0);
    refused->provider_error = true;
    Gateway gw3({}, refused, clock);
    CHECK_THROWS_AS(gw3.complete(convo("x"), testing::mock_profile(), {}), ProviderError);
    CHECK(refused->calls == 1);
}

TEST_CASE("gateway validates requests before any network use") {
    VirtualClock clock;
    auto b = std::make_shared<testing::ScriptedBackend>([](auto&, auto) { return "r"; });
    Gateway gw({}, b, clock);
    CHECK_THROWS_AS(gw.complete({}, testing::mock_profile(), {}), ConfigError);
    CHECK_THROWS_AS(gw.complete(convo(""), testing::mock_profile(), {}), ConfigError);
    CHECK_THROWS_AS(gw.complete(convo("x"), testing::mock_profile(), {2.5, 0}), ConfigError);
    CHECK_THROWS_AS(gw.complete(convo(std::string(4001, 'x')), testing::mock_profile(1000), {}), OverflowError);
    CHECK(b->calls() == 0);
}

TEST_CASE("record then replay returns identical completions without a backend") {
    testing::TempDir dir("replay");
    VirtualClock clock;
    auto b = std::make_shared<testing::ScriptedBackend>(
        [](const testing::ScriptedBackend::Request& r, std::size_t n) {
            return "answer " + std::to_string(n) + " to " + r.messages.back().content;
        });
    Gateway::Options rec;
    rec.mode = ReplayMode::record;
    rec.replay_dir = dir.path();
    std::vector<Completion> first;
    {
        Gateway gw(rec, b, clock);
        for (int i = 0; i < 5; ++i) first.push_back(gw.complete(convo("q" + std::to_string(i)), testing::mock_profile(), {0.7, 1}));
        // A second identical request is served from the store.
        gw.complete(convo("q0"), testing::mock_profile(), {0.7, 1});
        CHECK(gw.network_calls() == 5);
        CHECK(gw.replay_hits() == 1);
    }
    Gateway::Options rep = rec;
    rep.mode = ReplayMode::replay;
    Gateway gw(rep, nullptr, clock);
    Money total;
    for (int i = 0; i < 5; ++i) {
        const auto c = gw.complete(convo("q" + std::to_string(i)), testing::mock_profile(), {0.7, 1});
        CHECK(c.message.content == first[i].message.content);
        CHECK(c.usage == first[i].usage);
        CHECK(c.replay_key == first[i].replay_key);
        total += c.usage.cost;
    }
    CHECK(gw.network_calls() == 0);
    CHECK(gw.live_spend().micros() == 0);
    CHECK(total.micros() > 0);
    CHECK_THROWS_AS(gw.complete(convo("never asked"), testing::mock_profile(), {}), ReplayMissError);
    CHECK_THROWS_AS(gw.complete(convo("q0"), testing::mock_profile(), {0.7, 2}), ReplayMissError);

    // A damaged record is reported, not silently re-fetched.
    const std::string key = first[0].replay_key;
    write_file(dir.path() / key.substr(0, 2) / (key + ".json"), "{ not json");
    CHECK_THROWS_AS(gw.complete(convo("q0"), testing::mock_profile(), {0.7, 1}), IntegrityError);
}

TEST_CASE("replay mode needs an existing store") {
    VirtualClock clock;
    Gateway::Options o;
    o.mode = ReplayMode::replay;
    CHECK_THROWS_AS(Gateway(o, nullptr, clock), ConfigError);
    o.replay_dir = "/nonexistent/llmsast/store";
    CHECK_THROWS_AS(Gateway(o, nullptr, clock), ConfigError);
}

TEST_CASE("router dispatches by provider") {
    ProviderRouter router;
    router.add("mock", std::make_unique<testing::ScriptedBackend>([](auto&, auto) { return "from mock"; }));
    CHECK(router.complete(convo("x"), testing::mock_profile(), {}).content == "from mock");
    auto p = testing::mock_profile();
    p.provider = "nobody";
    CHECK_THROWS_AS(router.complete(convo("x"), p, {}), ConfigError);
}

TEST_CASE("heuristic backend flags tainted command execution") {
    auto h = make_heuristic_backend();
    ModelProfile p = testing::mock_profile();
    p.provider = "heuristic";
    const std::string code = "```java\nclass A {\nvoid m(HttpServletRequest request) throws Exception {\n"
                             "String data = request.getParameter(\"x\");\nRuntime.getRuntime().exec(\"ls \" + data);\n}\n}\n```";
    const auto r = h->complete(convo("Is this code vulnerable?\n" + code), p, {});
    CHECK(r.content.find("vulnerability: YES") != std::string::npos);
    CHECK(r.content.find("CWE-78") != std::string::npos);
    CHECK(r.input_tokens > 0);
    CHECK(r.content == h->complete(convo("Is this code vulnerable?\n" + code), p, {}).content);
}

// ---------------------------------------------------------------- HTTP

namespace {

/// Local stand-in for a provider endpoint.
class StubServer {
public:
    StubServer() {
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~StubServer() {
        server_.stop();
        thread_.join();
    }
    httplib::Server& server() { return server_; }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

struct EnvGuard {
    std::string name;
    EnvGuard(const char* n, const std::string& v) : name(n) { ::setenv(n, v.c_str(), 1); }
    ~EnvGuard() { ::unsetenv(name.c_str()); }
};

} // namespace

TEST_CASE("openai backend: request shape, usage and status mapping") {
    StubServer stub;
    nlohmann::json last;
    int status = 200;
    std::string body;
    stub.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        last = nlohmann::json::parse(req.body);
        CHECK(req.get_header_value("Authorization") == "Bearer test-key");
        res.status = status;
        res.set_content(body, "application/json");
    });
    EnvGuard url("LLMSAST_OPENAI_BASE_URL", stub.url());
    EnvGuard key("OPENAI_API_KEY", "test-key");
    auto be = make_openai_backend();
    ModelProfile p = testing::mock_profile();
    p.model_name = "gpt-4-0125-preview";

    body = R"({"choices":[{"message":{"role":"assistant","content":"vulnerability: NO"}}],
               "usage":{"prompt_tokens":12,"completion_tokens":3}})";
    const auto r = be->complete({{Role::system, "sys"}, {Role::human, "hi"}, {Role::ai, "a"}, {Role::human, "again"}},
                                p, {0.7, 0});
    CHECK(r.content == "vulnerability: NO");
    CHECK(r.input_tokens == 12);
    CHECK(r.output_tokens == 3);
    CHECK(last["model"] == "gpt-4-0125-preview");
    CHECK(last["temperature"].get<double>() == doctest::Approx(0.7));
    REQUIRE(last["messages"].size() == 4);
    CHECK(last["messages"][0]["role"] == "system");
    CHECK(last["messages"][2]["role"] == "assistant");

    status = 401, body = R"({"error":{"message":"bad key"}})";
    CHECK_THROWS_AS(be->complete(convo("x"), p, {}), ProviderError);
    status = 429, body = R"({"error":{"type":"rate_limit"}})";
    CHECK_THROWS_AS(be->complete(convo("x"), p, {}), TransientError);
    status = 429, body = R"({"error":{"type":"insufficient_quota"}})";
    CHECK_THROWS_AS(be->complete(convo("x"), p, {}), ProviderError);
    status = 503, body = "{}";
    CHECK_THROWS_AS(be->complete(convo("x"), p, {}), TransientError);
    status = 400, body = R"({"error":{"code":"context_length_exceeded"}})";
    CHECK_THROWS_AS(be->complete(convo("x"), p, {}), OverflowError);
    status = 400, body = R"({"error":{"code":"invalid_request"}})";
    CHECK_THROWS_AS(be->complete(convo("x"), p, {}), ProviderError);
    status = 200, body = "not json";
    CHECK_THROWS_AS(be->complete(convo("x"), p, {}), ProtocolError);
    status = 200, body = R"({"choices":[]})";
    CHECK_THROWS_AS(be->complete(convo("x"), p, {}), ProtocolError);
}

TEST_CASE("anthropic backend: system prompt, headers and usage") {
    StubServer stub;
    nlohmann::json last;
    stub.server().Post("/v1/messages", [&](const httplib::Request& req, httplib::Response& res) {
        last = nlohmann::json::parse(req.body);
        CHECK(req.get_header_value("x-api-key") == "test-key");
        CHECK(req.get_header_value("anthropic-version") == "2023-06-01");
        res.set_content(R"({"content":[{"type":"text","text":"part one "},{"type":"text","text":"part two"}],
                            "usage":{"input_tokens":20,"output_tokens":4}})",
                        "application/json");
    });
    EnvGuard url("LLMSAST_ANTHROPIC_BASE_URL", stub.url());
    EnvGuard key("ANTHROPIC_API_KEY", "test-key");
    auto be = make_anthropic_backend();
    ModelProfile p = testing::mock_profile();
    p.model_name = "claude-3-opus-20240229";
    const auto r = be->complete({{Role::system, "be careful"}, {Role::human, "hi"}}, p, {});
    CHECK(r.content == "part one part two");
    CHECK(r.input_tokens == 20);
    CHECK(r.output_tokens == 4);
    CHECK(last["system"] == "be careful");
    REQUIRE(last["messages"].size() == 1);
    CHECK(last["messages"][0]["role"] == "user");
    CHECK(last.contains("max_tokens"));
}

TEST_CASE("missing credentials and unreachable hosts") {
    ::unsetenv("OPENAI_API_KEY");
    CHECK_THROWS_AS(make_openai_backend()->complete(convo("x"), testing::mock_profile(), {}), ProviderError);
    EnvGuard url("LLMSAST_OPENAI_BASE_URL", "http://127.0.0.1:1");
    EnvGuard key("OPENAI_API_KEY", "k");
    CHECK_THROWS_AS(make_openai_backend()->complete(convo("x"), testing::mock_profile(), {}), TransientError);
}
