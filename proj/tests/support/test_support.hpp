#pragma once

#include "llmsast/io.hpp"
#include "llmsast/llm_gateway.hpp"

#include <atomic>
#include <filesystem>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <vector>

namespace testing {

inline std::filesystem::path source_dir() { return LLMSAST_SOURCE_DIR; }
inline std::filesystem::path golden(const std::string& name) { return source_dir() / "tests" / "golden" / name; }
inline std::string read_golden(const std::string& name) { return llmsast::read_file(golden(name)); }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "t") {
        static std::atomic<unsigned> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("llmsast-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

private:
    std::filesystem::path path_;
};

/// Backend answering from a function; records every request.
class ScriptedBackend final : public llmsast::Backend {
public:
    struct Request {
        std::vector<llmsast::ChatMessage> messages;
        std::string model;
        double temperature = 0;
        std::uint32_t run_index = 0;
    };
    using Script = std::function<std::string(const Request&, std::size_t call_no)>;

    explicit ScriptedBackend(Script script) : script_(std::move(script)) {}

    llmsast::RawCompletion complete(const std::vector<llmsast::ChatMessage>& messages,
                                    const llmsast::ModelProfile& profile,
                                    const llmsast::CompletionParams& params) override {
        Request r{messages, profile.model_name, params.temperature, params.run_index};
        std::size_t n;
        {
            std::lock_guard g(mu_);
            n = requests_.size();
            requests_.push_back(r);
        }
        llmsast::RawCompletion out;
        out.content = script_(r, n);
        out.input_tokens = llmsast::estimate_tokens(messages);
        out.output_tokens = (out.content.size() + 3) / 4;
        return out;
    }

    std::vector<Request> requests() const {
        std::lock_guard g(mu_);
        return requests_;
    }
    std::size_t calls() const {
        std::lock_guard g(mu_);
        return requests_.size();
    }

private:
    Script script_;
    mutable std::mutex mu_;
    std::vector<Request> requests_;
};

inline llmsast::ModelProfile mock_profile(std::uint64_t context = 128000) {
    llmsast::ModelProfile p;
    p.model_name = "mock-model";
    p.provider = "mock";
    p.input_price = *llmsast::Money::parse("0.01");
    p.output_price = *llmsast::Money::parse("0.03");
    p.context_window = context;
    return p;
}

} // namespace testing
