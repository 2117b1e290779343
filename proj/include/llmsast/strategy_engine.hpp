#pragma once

#include "llmsast/cwe_id.hpp"
#include "llmsast/error.hpp"
#include "llmsast/llm_gateway.hpp"
#include "llmsast/verdict_parser.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace llmsast {

enum class StrategyId {
    b, b_rci, b_sr, b_ssr, b_srci, b_sc,
    as, as_rci, rf, rf_rci,
    fs20, fs6, fs6_rci,
    dfa, dfa_rci, dfa_h, dfa_h_rci,
    cot_dfa, cot_dfa_rci, cot_8s, cot_8s_rci, cot_8s_sc,
    cr, cr_rci, tot_8s,
};

std::string_view to_string(StrategyId id);
std::optional<StrategyId> parse_strategy_id(std::string_view text);
const std::vector<StrategyId>& all_strategy_ids();

enum class Protocol { single, rci, self_refine, short_refine, short_rci, self_consistency, tot };

std::string_view to_string(Protocol p);
std::optional<Protocol> parse_protocol(std::string_view text);

struct StrategySpec {
    StrategyId id = StrategyId::b;
    Protocol protocol = Protocol::single;
    /// First entry renders the opening turn. Follow-ups by protocol:
    /// rci and self_refine {critique, improve}; short_* {combined};
    /// tot {step, evaluator, step_instructions}.
    std::vector<std::string> template_refs;
    double temperature = 0.0;
    std::uint32_t samples = 1;
    std::optional<std::string> few_shot_set; ///< examples file stem under templates/few_shot
    bool api_sequence = false;               ///< fill {api_sequence}
    bool strip_code_blocks = false;          ///< drop fenced blocks before parsing (fix prompts)
    std::uint32_t tot_steps = 8;
    std::uint32_t tot_candidates = 3;
    std::uint32_t tot_evaluators = 3;

    /// Gateway calls one case costs under this spec.
    std::uint32_t expected_calls() const;
};

/// Named plain-text templates with `{name}` placeholders. Substitution is a
/// single pass, so substituted text (source code, earlier answers) is never
/// re-scanned. A `{identifier}` without a value is a ConfigError; braces that
/// do not enclose an identifier are literal.
class TemplateLibrary {
public:
    /// Reads every `*.txt` in `dir`; one trailing newline is dropped.
    static TemplateLibrary load(const std::filesystem::path& dir);

    void add(std::string name, std::string text);
    bool contains(std::string_view name) const;
    const std::string& get(std::string_view name) const; ///< LookupError if absent
    std::string render(std::string_view name, const std::map<std::string, std::string>& vars) const;

private:
    std::map<std::string, std::string, std::less<>> templates_;
};

std::string render_template(std::string_view text, const std::map<std::string, std::string>& vars);

/// Registry file: `{"schema_version": 1, "strategies": {"<id>": {...}}}`.
/// Every StrategyId must be present and every referenced template must exist.
class StrategyRegistry {
public:
    static StrategyRegistry parse(std::string_view json_text, const TemplateLibrary& templates);
    static StrategyRegistry load(const std::filesystem::path& path, const TemplateLibrary& templates);

    const StrategySpec& get(StrategyId id) const;
    const std::map<StrategyId, StrategySpec>& all() const { return specs_; }

private:
    std::map<StrategyId, StrategySpec> specs_;
};

/// Throws ConfigError when a spec breaks a protocol invariant.
void validate_spec(const StrategySpec& spec);

// ---------------------------------------------------------------- helpers

/// Method-invocation names in order of appearance. Receivers that are plain
/// dotted names are kept ("Runtime.getRuntime", "System.out.println");
/// constructors appear as "new X". Throws java::LexError.
std::vector<std::string> extract_api_sequence(std::string_view source);

struct FewShotExample {
    bool vulnerable = false;
    CweId cwe;
    std::string name; ///< CWE name shown in the example's verdict
    std::string code;
    std::string explanation;
};

/// `[{"vulnerable", "cwe", "name", "code", "explanation"}]`
std::vector<FewShotExample> parse_few_shot_examples(std::string_view json_text);
std::vector<FewShotExample> load_few_shot_examples(const std::filesystem::path& path);

/// Embeds the examples, each followed by its verdict line, then the query
/// code, via `template_name` ({examples}, {code}). An empty list logs a
/// warning and renders `fallback_template` instead. Unequal vulnerable and
/// clean counts throw ConfigError.
std::vector<ChatMessage> build_few_shot_prompt(const std::vector<FewShotExample>& examples, std::string_view code,
                                               const TemplateLibrary& templates, std::string_view template_name,
                                               std::string_view fallback_template);

/// Removes ``` fenced blocks (fence lines included). An unclosed fence runs
/// to the end of the text.
std::string strip_fenced_blocks(std::string_view text);

/// Index (0-based) named by "best candidate: <n>" when 1 <= n <= count.
std::optional<std::uint32_t> parse_candidate_choice(std::string_view response, std::uint32_t count);

/// Candidate with the most votes; ties, and the all-abstain case, go to the
/// lowest index.
std::uint32_t tot_winner(const std::vector<std::optional<std::uint32_t>>& votes, std::uint32_t count);

/// Per-CWE majority: a CWE is reported when at least floor(n/2)+1 samples
/// report it.
std::set<CweId> majority_cwes(const std::vector<std::set<CweId>>& per_sample);

// ---------------------------------------------------------------- results

enum class ScanStatus { ok, skipped_overflow, error };

std::string_view to_string(ScanStatus s);
std::optional<ScanStatus> parse_scan_status(std::string_view text);

/// What a transcript decides under a protocol.
struct TranscriptVerdict {
    std::vector<Verdict> verdicts;
    std::set<CweId> reported_cwes;
    bool final_decision = false;
    bool low_confidence = false;
    std::vector<std::string> diagnostics;
};

/// Pure re-derivation of the decision from a stored transcript. The engine
/// uses it for fresh runs too, so stored and recomputed results agree.
TranscriptVerdict decide(const StrategySpec& spec, const Transcript& transcript);

struct ScanResult {
    std::string case_id;
    StrategyId strategy = StrategyId::b;
    std::string model;
    ScanStatus status = ScanStatus::ok;
    std::string error; ///< set when status != ok
    std::vector<Verdict> verdicts;
    Transcript transcript;
    bool final_decision = false;
    std::set<CweId> reported_cwes;
    bool low_confidence = false;
    std::vector<std::string> diagnostics;
};

/// A gateway failure with the case it happened on. `terminal` marks
/// failures that will repeat for every case (authentication, quota).
class CaseError : public Error {
public:
    CaseError(std::string case_id, const std::string& cause, bool terminal = false)
        : Error(case_id + ": " + cause), case_id_(std::move(case_id)), terminal_(terminal) {}
    const std::string& case_id() const noexcept { return case_id_; }
    bool terminal() const noexcept { return terminal_; }

private:
    std::string case_id_;
    bool terminal_;
};

class StrategyEngine {
public:
    struct Options {
        /// Package written into the code sent to the model; empty drops it.
        std::string package_override = "testcases";
        /// Few-shot example sets by name, consulted when a spec names one.
        std::map<std::string, std::vector<FewShotExample>> few_shot;
    };

    StrategyEngine(const TemplateLibrary& templates, Gateway& gateway, ModelProfile profile, Options options);

    /// Runs one case. Context overflow yields status skipped_overflow; other
    /// gateway errors are rethrown as CaseError with the original message.
    ScanResult run(const std::string& case_id, std::string_view source, const StrategySpec& spec);

    /// Messages of the opening turn for `code` (already prepared).
    std::vector<ChatMessage> opening_turn(const StrategySpec& spec, std::string_view code) const;

private:
    Completion call(Transcript& t, std::vector<ChatMessage> messages, double temperature, std::uint32_t run_index);
    void run_conversation(Transcript& t, const StrategySpec& spec, std::string_view code);
    void run_self_consistency(Transcript& t, const StrategySpec& spec, std::string_view code);
    void run_tot(Transcript& t, const StrategySpec& spec, std::string_view code);

    const TemplateLibrary& templates_;
    Gateway& gateway_;
    ModelProfile profile_;
    Options options_;
};

} // namespace llmsast
