// HTTP clients for the hosted chat APIs. This is the only translation unit
// that pulls in httplib, so the TLS build flags stay local to it.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <json.hpp>

#include "llmsast/llm_gateway.hpp"

#include <cstdlib>

namespace llmsast {
namespace {

using nlohmann::json;

std::string env_or(const char* name, std::string fallback) {
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

bool contains(const std::string& haystack, std::string_view needle) {
    return haystack.find(needle) != std::string::npos;
}

struct HttpResult {
    int status = 0;
    std::string body;
};

HttpResult post_json(const std::string& base_url, const std::string& path, const httplib::Headers& headers,
                     const json& body) {
    httplib::Client cli(base_url);
    cli.set_connection_timeout(30, 0);
    cli.set_read_timeout(600, 0);
    cli.set_write_timeout(60, 0);
    auto res = cli.Post(path, headers, body.dump(), "application/json");
    if (!res) throw TransientError("transport failure talking to " + base_url + ": " + httplib::to_string(res.error()));
    return {res->status, res->body};
}

/// Maps a non-200 status to the gateway's error classes.
[[noreturn]] void raise_for_status(const HttpResult& r, std::string_view provider,
                                   std::initializer_list<std::string_view> overflow_markers) {
    const std::string head = std::string(provider) + " HTTP " + std::to_string(r.status) + ": " +
                             r.body.substr(0, 400);
    if (r.status == 401 || r.status == 403) throw ProviderError(head);
    if (r.status == 429) {
        if (contains(r.body, "insufficient_quota")) throw ProviderError(head);
        throw TransientError(head);
    }
    if (r.status >= 500 || r.status == 408) throw TransientError(head);
    if (r.status == 400 || r.status == 413) {
        for (auto m : overflow_markers) {
            if (contains(r.body, m)) throw OverflowError(head);
        }
    }
    throw ProviderError(head);
}

json parse_body(const HttpResult& r, std::string_view provider) {
    try {
        return json::parse(r.body);
    } catch (const json::exception& e) {
        throw ProtocolError(std::string(provider) + ": response is not JSON: " + e.what());
    }
}

class OpenAiBackend final : public Backend {
public:
    RawCompletion complete(const std::vector<ChatMessage>& messages, const ModelProfile& profile,
                           const CompletionParams& params) override {
        const std::string key = env_or("OPENAI_API_KEY", "");
        if (key.empty()) throw ProviderError("OPENAI_API_KEY is not set");
        json msgs = json::array();
        for (const auto& m : messages) {
            const char* role = m.role == Role::system ? "system" : m.role == Role::human ? "user" : "assistant";
            msgs.push_back({{"role", role}, {"content", m.content}});
        }
        const json body{{"model", profile.model_name},
                        {"messages", msgs},
                        {"temperature", params.temperature},
                        {"max_tokens", profile.max_output_tokens}};
        const httplib::Headers headers{{"Authorization", "Bearer " + key}};
        const auto r = post_json(env_or("LLMSAST_OPENAI_BASE_URL", "https://api.openai.com"), "/v1/chat/completions",
                                 headers, body);
        if (r.status != 200) raise_for_status(r, "openai", {"context_length_exceeded", "maximum context length"});
        const json j = parse_body(r, "openai");
        try {
            RawCompletion out;
            const auto& content = j.at("choices").at(0).at("message").at("content");
            out.content = content.is_null() ? "" : content.get<std::string>();
            out.input_tokens = j.at("usage").at("prompt_tokens").get<std::uint64_t>();
            out.output_tokens = j.at("usage").at("completion_tokens").get<std::uint64_t>();
            return out;
        } catch (const json::exception& e) {
            throw ProtocolError(std::string("openai: unexpected response shape: ") + e.what());
        }
    }
};

class AnthropicBackend final : public Backend {
public:
    RawCompletion complete(const std::vector<ChatMessage>& messages, const ModelProfile& profile,
                           const CompletionParams& params) override {
        const std::string key = env_or("ANTHROPIC_API_KEY", "");
        if (key.empty()) throw ProviderError("ANTHROPIC_API_KEY is not set");
        std::string system;
        json msgs = json::array();
        for (const auto& m : messages) {
            if (m.role == Role::system) {
                if (!system.empty()) system += "\n\n";
                system += m.content;
                continue;
            }
            msgs.push_back({{"role", m.role == Role::human ? "user" : "assistant"}, {"content", m.content}});
        }
        json body{{"model", profile.model_name},
                  {"messages", msgs},
                  {"temperature", std::min(params.temperature, 1.0)},
                  {"max_tokens", profile.max_output_tokens}};
        if (!system.empty()) body["system"] = system;
        const httplib::Headers headers{{"x-api-key", key}, {"anthropic-version", "2023-06-01"}};
        const auto r = post_json(env_or("LLMSAST_ANTHROPIC_BASE_URL", "https://api.anthropic.com"), "/v1/messages",
                                 headers, body);
        if (r.status != 200) raise_for_status(r, "anthropic", {"prompt is too long", "too many tokens"});
        const json j = parse_body(r, "anthropic");
        try {
            RawCompletion out;
            for (const auto& block : j.at("content")) {
                if (block.value("type", "") == "text") out.content += block.at("text").get<std::string>();
            }
            out.input_tokens = j.at("usage").at("input_tokens").get<std::uint64_t>();
            out.output_tokens = j.at("usage").at("output_tokens").get<std::uint64_t>();
            return out;
        } catch (const json::exception& e) {
            throw ProtocolError(std::string("anthropic: unexpected response shape: ") + e.what());
        }
    }
};

} // namespace

std::unique_ptr<Backend> make_openai_backend() { return std::make_unique<OpenAiBackend>(); }
std::unique_ptr<Backend> make_anthropic_backend() { return std::make_unique<AnthropicBackend>(); }

} // namespace llmsast
