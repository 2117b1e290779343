#include "llmsast/llm_gateway.hpp"

#include "llmsast/digest.hpp"
#include "llmsast/io.hpp"
#include "llmsast/log.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <thread>

namespace llmsast {

using nlohmann::json;

std::string_view to_string(Role r) {
    switch (r) {
    case Role::system: return "system";
    case Role::human: return "human";
    case Role::ai: return "ai";
    }
    return "human";
}

std::optional<Role> parse_role(std::string_view text) {
    if (text == "system") return Role::system;
    if (text == "human") return Role::human;
    if (text == "ai") return Role::ai;
    return std::nullopt;
}

std::string_view to_string(ReplayMode m) {
    switch (m) {
    case ReplayMode::live: return "live";
    case ReplayMode::record: return "record";
    case ReplayMode::replay: return "replay";
    }
    return "live";
}

std::optional<ReplayMode> parse_replay_mode(std::string_view text) {
    if (text == "live") return ReplayMode::live;
    if (text == "record") return ReplayMode::record;
    if (text == "replay") return ReplayMode::replay;
    return std::nullopt;
}

// ---------------------------------------------------------------- profiles

std::map<std::string, ModelProfile> parse_model_profiles(std::string_view json_text) {
    std::map<std::string, ModelProfile> out;
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model profiles: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("model profiles: top level must be an object");
    for (const auto& [name, v] : j.items()) {
        try {
            ModelProfile p;
            p.model_name = name;
            p.provider = v.at("provider").get<std::string>();
            const auto in = Money::parse(v.at("input_price").get<std::string>());
            const auto outp = Money::parse(v.at("output_price").get<std::string>());
            if (!in || !outp || in->micros() < 0 || outp->micros() < 0) {
                throw ConfigError("model profiles: " + name + " has an invalid price");
            }
            p.input_price = *in;
            p.output_price = *outp;
            p.context_window = v.at("context_window").get<std::uint64_t>();
            p.max_output_tokens = v.value("max_output_tokens", 4096u);
            out.emplace(name, std::move(p));
        } catch (const json::exception& e) {
            throw ConfigError("model profiles: " + name + ": " + e.what());
        }
    }
    return out;
}

std::map<std::string, ModelProfile> load_model_profiles(const std::filesystem::path& path) {
    return parse_model_profiles(read_file(path));
}

Money compute_cost(std::uint64_t input_tokens, std::uint64_t output_tokens, const ModelProfile& profile) {
    return token_cost(input_tokens, output_tokens, profile.input_price, profile.output_price);
}

// ---------------------------------------------------------------- transcript

Money Transcript::total_cost() const {
    Money m;
    for (const auto& s : steps_) m += s.usage.cost;
    return m;
}

std::int64_t Transcript::total_wall_time_ms() const {
    std::int64_t t = 0;
    for (const auto& s : steps_) t += s.usage.wall_time_ms;
    return t;
}

std::uint64_t Transcript::total_input_tokens() const {
    std::uint64_t t = 0;
    for (const auto& s : steps_) t += s.usage.input_tokens;
    return t;
}

std::uint64_t Transcript::total_output_tokens() const {
    std::uint64_t t = 0;
    for (const auto& s : steps_) t += s.usage.output_tokens;
    return t;
}

// ---------------------------------------------------------------- keys

std::string record_replay_key(const std::vector<ChatMessage>& messages, const ModelProfile& profile,
                              const CompletionParams& params) {
    std::string buf = "llmsast-replay-v1";
    auto field = [&buf](std::string_view s) {
        buf += '\n';
        buf += std::to_string(s.size());
        buf += ':';
        buf += s;
    };
    field(profile.model_name);
    field(std::to_string(messages.size()));
    for (const auto& m : messages) {
        field(to_string(m.role));
        field(m.content);
    }
    field(std::to_string(std::llround(params.temperature * 1000.0)));
    field(std::to_string(params.run_index));
    return sha256_hex(buf);
}

std::uint64_t estimate_tokens(const std::vector<ChatMessage>& messages) {
    std::uint64_t bytes = 0;
    for (const auto& m : messages) bytes += m.content.size();
    return (bytes + 3) / 4;
}

// ---------------------------------------------------------------- time

void SteadyClock::sleep_for(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

Clock::time_point VirtualClock::now() {
    std::lock_guard lock(mu_);
    return t_;
}

void VirtualClock::sleep_for(std::chrono::milliseconds d) {
    std::lock_guard lock(mu_);
    t_ += d;
}

RateLimiter::RateLimiter(double per_second, Clock& clock)
    : limit_(per_second <= 0 ? 0 : static_cast<std::size_t>(std::floor(per_second))), clock_(clock) {
    if (per_second > 0 && limit_ == 0) limit_ = 1;
}

void RateLimiter::acquire() {
    std::lock_guard lock(mu_);
    while (true) {
        const auto now = clock_.now();
        if (limit_ == 0) {
            if (history_.size() < history_limit) history_.push_back(now);
            return;
        }
        while (!window_.empty() && window_.front() + std::chrono::seconds(1) <= now) window_.pop_front();
        if (window_.size() < limit_) {
            window_.push_back(now);
            if (history_.size() < history_limit) history_.push_back(now);
            return;
        }
        // Holding the lock while waiting keeps dispatch order FIFO.
        const auto wait = window_.front() + std::chrono::seconds(1) - now;
        clock_.sleep_for(std::max(std::chrono::milliseconds(1),
                                  std::chrono::ceil<std::chrono::milliseconds>(wait)));
    }
}

std::vector<Clock::time_point> RateLimiter::history() const {
    std::lock_guard lock(mu_);
    return history_;
}

std::chrono::milliseconds RetryPolicy::backoff_for(int attempt) const {
    double ms = static_cast<double>(initial_backoff.count()) * std::pow(multiplier, std::max(0, attempt - 1));
    ms = std::min(ms, static_cast<double>(max_backoff.count()));
    return std::chrono::milliseconds(static_cast<std::int64_t>(ms));
}

// ---------------------------------------------------------------- routing

void ProviderRouter::add(std::string provider, std::unique_ptr<Backend> backend) {
    backends_[std::move(provider)] = std::move(backend);
}

RawCompletion ProviderRouter::complete(const std::vector<ChatMessage>& messages, const ModelProfile& profile,
                                       const CompletionParams& params) {
    auto it = backends_.find(profile.provider);
    if (it == backends_.end()) throw ConfigError("no backend for provider '" + profile.provider + "'");
    return it->second->complete(messages, profile, params);
}

std::unique_ptr<ProviderRouter> make_default_router() {
    auto r = std::make_unique<ProviderRouter>();
    r->add("openai", make_openai_backend());
    r->add("anthropic", make_anthropic_backend());
    r->add("heuristic", make_heuristic_backend());
    return r;
}

// ---------------------------------------------------------------- replay store

ReplayStore::ReplayStore(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
}

std::filesystem::path ReplayStore::path_for(const std::string& key) const {
    return root_ / key.substr(0, 2) / (key + ".json");
}

std::optional<StoredCompletion> ReplayStore::get(const std::string& key) const {
    const auto p = path_for(key);
    if (!std::filesystem::exists(p)) return std::nullopt;
    try {
        const json j = json::parse(read_file(p));
        if (j.at("key").get<std::string>() != key) throw IntegrityError("replay record " + p.string() + " has wrong key");
        const auto& r = j.at("response");
        return StoredCompletion{r.at("content").get<std::string>(), r.at("input_tokens").get<std::uint64_t>(),
                                r.at("output_tokens").get<std::uint64_t>(), r.at("wall_time_ms").get<std::int64_t>()};
    } catch (const json::exception& e) {
        throw IntegrityError("replay record " + p.string() + " is corrupt: " + e.what());
    }
}

void ReplayStore::put(const std::string& key, const std::vector<ChatMessage>& messages, const ModelProfile& profile,
                      const CompletionParams& params, const StoredCompletion& value) {
    json msgs = json::array();
    for (const auto& m : messages) msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    const json j{{"key", key},
                 {"model", profile.model_name},
                 {"temperature_milli", std::llround(params.temperature * 1000.0)},
                 {"run_index", params.run_index},
                 {"messages", msgs},
                 {"response",
                  {{"content", value.content},
                   {"input_tokens", value.input_tokens},
                   {"output_tokens", value.output_tokens},
                   {"wall_time_ms", value.wall_time_ms}}}};
    std::lock_guard lock(write_mu_);
    write_file(path_for(key), j.dump(1) + "\n");
}

// ---------------------------------------------------------------- gateway

Gateway::Gateway(Options options, std::shared_ptr<Backend> backend, Clock& clock)
    : options_(std::move(options)), backend_(std::move(backend)), clock_(clock) {
    if (options_.mode != ReplayMode::live) {
        if (!options_.replay_dir) throw ConfigError("replay store directory required in record/replay mode");
        if (options_.mode == ReplayMode::replay && !std::filesystem::is_directory(*options_.replay_dir)) {
            throw ConfigError("replay store not found: " + options_.replay_dir->string());
        }
        store_ = std::make_unique<ReplayStore>(*options_.replay_dir);
    }
    if (options_.retry.max_attempts < 1) throw ConfigError("retry policy needs at least one attempt");
}

RateLimiter& Gateway::limiter_for(const std::string& provider) {
    std::lock_guard lock(mu_);
    auto& slot = limiters_[provider];
    if (!slot) slot = std::make_unique<RateLimiter>(options_.rate_limit_per_second, clock_);
    return *slot;
}

RawCompletion Gateway::call_with_retry(const std::vector<ChatMessage>& messages, const ModelProfile& profile,
                                       const CompletionParams& params) {
    if (!backend_) throw ConfigError("gateway has no backend for live calls");
    for (int attempt = 1;; ++attempt) {
        limiter_for(profile.provider).acquire();
        try {
            return backend_->complete(messages, profile, params);
        } catch (const TransientError& e) {
            if (attempt >= options_.retry.max_attempts) throw;
            const auto wait = options_.retry.backoff_for(attempt);
            log::warn(std::string(e.what()) + "; retry " + std::to_string(attempt) + " in " +
                      std::to_string(wait.count()) + " ms");
            clock_.sleep_for(wait);
        }
    }
}

Completion Gateway::complete(const std::vector<ChatMessage>& messages, const ModelProfile& profile,
                             const CompletionParams& params) {
    if (messages.empty()) throw ConfigError("complete: no messages");
    for (const auto& m : messages) {
        if (m.role != Role::system && m.content.empty()) throw ConfigError("complete: empty human/ai turn");
    }
    if (params.temperature < 0 || params.temperature > 2) throw ConfigError("complete: temperature outside [0, 2]");

    const std::uint64_t estimate = estimate_tokens(messages);
    if (profile.context_window && estimate > profile.context_window) {
        throw OverflowError("prompt of ~" + std::to_string(estimate) + " tokens exceeds the " +
                            std::to_string(profile.context_window) + "-token window of " + profile.model_name);
    }

    Completion out;
    out.replay_key = record_replay_key(messages, profile, params);
    out.message.role = Role::ai;

    if (store_) {
        if (auto hit = store_->get(out.replay_key)) {
            out.message.content = std::move(hit->content);
            out.usage = {hit->input_tokens, hit->output_tokens, hit->wall_time_ms,
                         compute_cost(hit->input_tokens, hit->output_tokens, profile)};
            std::lock_guard lock(mu_);
            ++replay_hits_;
            return out;
        }
        if (options_.mode == ReplayMode::replay) {
            throw ReplayMissError("no recorded response for key " + out.replay_key + " (model " +
                                  profile.model_name + ")");
        }
    }

    const auto t0 = clock_.now();
    RawCompletion raw = call_with_retry(messages, profile, params);
    const auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(clock_.now() - t0).count();

    out.message.content = std::move(raw.content);
    out.usage = {raw.input_tokens, raw.output_tokens, wall, compute_cost(raw.input_tokens, raw.output_tokens, profile)};
    {
        std::lock_guard lock(mu_);
        live_spend_ += out.usage.cost;
        ++network_calls_;
    }
    if (store_) {
        store_->put(out.replay_key, messages, profile, params,
                    {out.message.content, raw.input_tokens, raw.output_tokens, wall});
    }
    return out;
}

Money Gateway::live_spend() const {
    std::lock_guard lock(mu_);
    return live_spend_;
}

std::uint64_t Gateway::network_calls() const {
    std::lock_guard lock(mu_);
    return network_calls_;
}

std::uint64_t Gateway::replay_hits() const {
    std::lock_guard lock(mu_);
    return replay_hits_;
}

} // namespace llmsast
