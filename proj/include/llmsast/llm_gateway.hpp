#pragma once

#include "llmsast/error.hpp"
#include "llmsast/money.hpp"

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace llmsast {

enum class Role { system, human, ai };

std::string_view to_string(Role r);
std::optional<Role> parse_role(std::string_view text);

struct ChatMessage {
    Role role = Role::human;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct ModelProfile {
    std::string model_name;
    std::string provider; ///< "openai", "anthropic", "heuristic", "mock"
    Money input_price;    ///< per 1k tokens
    Money output_price;   ///< per 1k tokens
    std::uint64_t context_window = 0;
    std::uint32_t max_output_tokens = 4096;
};

/// Profiles keyed by model name, read from a JSON object of
/// `{"<model>": {"provider", "input_price", "output_price", "context_window"}}`.
/// Prices are decimal strings so they never pass through a double.
std::map<std::string, ModelProfile> load_model_profiles(const std::filesystem::path& path);
std::map<std::string, ModelProfile> parse_model_profiles(std::string_view json_text);

struct CompletionParams {
    double temperature = 0.0; ///< [0, 2]
    std::uint32_t run_index = 0;
};

struct UsageRecord {
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
    std::int64_t wall_time_ms = 0;
    Money cost;

    bool operator==(const UsageRecord&) const = default;
};

Money compute_cost(std::uint64_t input_tokens, std::uint64_t output_tokens, const ModelProfile& profile);

struct TranscriptStep {
    std::vector<ChatMessage> sent;
    ChatMessage response;
    UsageRecord usage;
    std::string replay_key;

    bool operator==(const TranscriptStep&) const = default;
};

/// Append-only record of one case's calls.
class Transcript {
public:
    void append(TranscriptStep step) { steps_.push_back(std::move(step)); }
    const std::vector<TranscriptStep>& steps() const { return steps_; }
    std::size_t size() const { return steps_.size(); }
    Money total_cost() const;
    std::int64_t total_wall_time_ms() const;
    std::uint64_t total_input_tokens() const;
    std::uint64_t total_output_tokens() const;

    bool operator==(const Transcript&) const = default;

private:
    std::vector<TranscriptStep> steps_;
};

/// Stable SHA-256 over a length-prefixed encoding of the model name, each
/// message's role and content, the temperature in thousandths, and run_index.
std::string record_replay_key(const std::vector<ChatMessage>& messages, const ModelProfile& profile,
                              const CompletionParams& params);

/// Estimated prompt size when no tokenizer is at hand: one token per 4 bytes.
std::uint64_t estimate_tokens(const std::vector<ChatMessage>& messages);

// ---------------------------------------------------------------- errors

/// The prompt does not fit the context window. Never retried.
class OverflowError : public Error {
public:
    using Error::Error;
};
/// Authentication, quota or other terminal provider refusals.
class ProviderError : public Error {
public:
    using Error::Error;
};
/// The provider answered with something we cannot read.
class ProtocolError : public Error {
public:
    using Error::Error;
};
/// Transport failures, rate limiting and 5xx answers; retried with backoff.
class TransientError : public Error {
public:
    using Error::Error;
};
/// Replay mode found no record for a request.
class ReplayMissError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------- time

class Clock {
public:
    using time_point = std::chrono::steady_clock::time_point;
    virtual ~Clock() = default;
    virtual time_point now() = 0;
    virtual void sleep_for(std::chrono::milliseconds d) = 0;
};

class SteadyClock final : public Clock {
public:
    time_point now() override { return std::chrono::steady_clock::now(); }
    void sleep_for(std::chrono::milliseconds d) override;
};

/// Test clock: sleeping advances time instantly.
class VirtualClock final : public Clock {
public:
    time_point now() override;
    void sleep_for(std::chrono::milliseconds d) override;
    void advance(std::chrono::milliseconds d) { sleep_for(d); }

private:
    std::mutex mu_;
    time_point t_{};
};

/// At most `per_second` dispatches in any sliding one-second window.
/// `per_second == 0` disables limiting. Thread-safe.
class RateLimiter {
public:
    RateLimiter(double per_second, Clock& clock);
    void acquire();
    /// Dispatch times so far; kept for tests, bounded by `history_limit`.
    std::vector<Clock::time_point> history() const;

private:
    std::size_t limit_;
    Clock& clock_;
    mutable std::mutex mu_;
    std::deque<Clock::time_point> window_;
    std::vector<Clock::time_point> history_;
    static constexpr std::size_t history_limit = 100000;
};

struct RetryPolicy {
    int max_attempts = 5;
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
    std::chrono::milliseconds max_backoff{30000};

    std::chrono::milliseconds backoff_for(int attempt) const; ///< attempt is 1-based
};

// ---------------------------------------------------------------- backends

struct RawCompletion {
    std::string content;
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual RawCompletion complete(const std::vector<ChatMessage>& messages, const ModelProfile& profile,
                                   const CompletionParams& params) = 0;
};

/// Chat Completions API. Key from OPENAI_API_KEY; base URL overridable with
/// LLMSAST_OPENAI_BASE_URL (e.g. a local stub server).
std::unique_ptr<Backend> make_openai_backend();
/// Messages API. Key from ANTHROPIC_API_KEY; base URL overridable with
/// LLMSAST_ANTHROPIC_BASE_URL.
std::unique_ptr<Backend> make_anthropic_backend();
/// Offline pattern-matching stand-in for a model; see heuristic_backend.cpp.
std::unique_ptr<Backend> make_heuristic_backend();

/// Routes by ModelProfile::provider.
class ProviderRouter final : public Backend {
public:
    void add(std::string provider, std::unique_ptr<Backend> backend);
    RawCompletion complete(const std::vector<ChatMessage>& messages, const ModelProfile& profile,
                           const CompletionParams& params) override;

private:
    std::map<std::string, std::unique_ptr<Backend>> backends_;
};

/// Router with the openai, anthropic and heuristic providers registered.
std::unique_ptr<ProviderRouter> make_default_router();

// ---------------------------------------------------------------- replay

struct StoredCompletion {
    std::string content;
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
    std::int64_t wall_time_ms = 0;
};

/// Content-addressed directory: `<root>/<key[0:2]>/<key>.json`.
/// Concurrent reads, serialized writes.
class ReplayStore {
public:
    explicit ReplayStore(std::filesystem::path root);
    std::optional<StoredCompletion> get(const std::string& key) const;
    void put(const std::string& key, const std::vector<ChatMessage>& messages, const ModelProfile& profile,
             const CompletionParams& params, const StoredCompletion& value);
    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path path_for(const std::string& key) const;
    std::filesystem::path root_;
    std::mutex write_mu_;
};

enum class ReplayMode { live, record, replay };

std::string_view to_string(ReplayMode m);
std::optional<ReplayMode> parse_replay_mode(std::string_view text);

// ---------------------------------------------------------------- gateway

struct Completion {
    ChatMessage message;
    UsageRecord usage;
    std::string replay_key;
};

/// Shared by all workers. Only the rate limiters and counters are mutable.
class Gateway {
public:
    struct Options {
        ReplayMode mode = ReplayMode::live;
        std::optional<std::filesystem::path> replay_dir; ///< required for record/replay
        double rate_limit_per_second = 0;                ///< per provider; 0 = unlimited
        RetryPolicy retry;
    };

    Gateway(Options options, std::shared_ptr<Backend> backend, Clock& clock);

    /// Throws OverflowError before any network use when the estimated prompt
    /// exceeds the model's context window.
    Completion complete(const std::vector<ChatMessage>& messages, const ModelProfile& profile,
                        const CompletionParams& params);

    ReplayMode mode() const { return options_.mode; }
    /// Cost of calls that reached a backend (not replay hits).
    Money live_spend() const;
    std::uint64_t network_calls() const;
    std::uint64_t replay_hits() const;

private:
    RawCompletion call_with_retry(const std::vector<ChatMessage>& messages, const ModelProfile& profile,
                                  const CompletionParams& params);
    RateLimiter& limiter_for(const std::string& provider);

    Options options_;
    std::shared_ptr<Backend> backend_;
    Clock& clock_;
    std::unique_ptr<ReplayStore> store_;

    mutable std::mutex mu_;
    std::map<std::string, std::unique_ptr<RateLimiter>> limiters_;
    Money live_spend_;
    std::uint64_t network_calls_ = 0;
    std::uint64_t replay_hits_ = 0;
};

} // namespace llmsast
