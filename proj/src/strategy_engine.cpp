#include "llmsast/strategy_engine.hpp"

#include "llmsast/corpus_prep.hpp"
#include "llmsast/io.hpp"
#include "llmsast/java_lexer.hpp"
#include "llmsast/log.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>

namespace llmsast {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<StrategyId, std::string_view>, 25> kIds{{
    {StrategyId::b, "b"},
    {StrategyId::b_rci, "b_rci"},
    {StrategyId::b_sr, "b_sr"},
    {StrategyId::b_ssr, "b_ssr"},
    {StrategyId::b_srci, "b_srci"},
    {StrategyId::b_sc, "b_sc"},
    {StrategyId::as, "as"},
    {StrategyId::as_rci, "as_rci"},
    {StrategyId::rf, "rf"},
    {StrategyId::rf_rci, "rf_rci"},
    {StrategyId::fs20, "fs20"},
    {StrategyId::fs6, "fs6"},
    {StrategyId::fs6_rci, "fs6_rci"},
    {StrategyId::dfa, "dfa"},
    {StrategyId::dfa_rci, "dfa_rci"},
    {StrategyId::dfa_h, "dfa_h"},
    {StrategyId::dfa_h_rci, "dfa_h_rci"},
    {StrategyId::cot_dfa, "cot_dfa"},
    {StrategyId::cot_dfa_rci, "cot_dfa_rci"},
    {StrategyId::cot_8s, "cot_8s"},
    {StrategyId::cot_8s_rci, "cot_8s_rci"},
    {StrategyId::cot_8s_sc, "cot_8s_sc"},
    {StrategyId::cr, "cr"},
    {StrategyId::cr_rci, "cr_rci"},
    {StrategyId::tot_8s, "tot_8s"},
}};

constexpr std::array<std::pair<Protocol, std::string_view>, 7> kProtocols{{
    {Protocol::single, "single"},
    {Protocol::rci, "rci"},
    {Protocol::self_refine, "self_refine"},
    {Protocol::short_refine, "short_refine"},
    {Protocol::short_rci, "short_rci"},
    {Protocol::self_consistency, "self_consistency"},
    {Protocol::tot, "tot"},
}};

std::size_t template_count(Protocol p) {
    switch (p) {
    case Protocol::single:
    case Protocol::self_consistency: return 1;
    case Protocol::short_refine:
    case Protocol::short_rci: return 2;
    case Protocol::rci:
    case Protocol::self_refine:
    case Protocol::tot: return 3;
    }
    return 1;
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        out.emplace_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return out;
}

std::string verdict_line_for(const FewShotExample& e) {
    if (!e.vulnerable) {
        return "vulnerability: NO | vulnerability type: N/A | vulnerability name: N/A | explanation: " +
               e.explanation;
    }
    return "vulnerability: YES | vulnerability type: " + e.cwe.str() + " | vulnerability name: " + e.name +
           " | explanation: " + e.explanation;
}

std::string indent(std::string_view text, std::string_view pad) {
    std::string out;
    for (const auto& line : split_lines(text)) {
        if (!out.empty()) out += '\n';
        out += pad;
        out += line;
    }
    return out;
}

} // namespace

std::string_view to_string(StrategyId id) {
    for (const auto& [k, v] : kIds) {
        if (k == id) return v;
    }
    return "b";
}

std::optional<StrategyId> parse_strategy_id(std::string_view text) {
    std::string norm(text);
    if (norm.rfind("p_", 0) == 0) norm.erase(0, 2);
    std::replace(norm.begin(), norm.end(), '-', '_');
    for (const auto& [k, v] : kIds) {
        if (v == norm) return k;
    }
    return std::nullopt;
}

const std::vector<StrategyId>& all_strategy_ids() {
    static const std::vector<StrategyId> ids = [] {
        std::vector<StrategyId> v;
        for (const auto& [k, name] : kIds) v.push_back(k);
        return v;
    }();
    return ids;
}

std::string_view to_string(Protocol p) {
    for (const auto& [k, v] : kProtocols) {
        if (k == p) return v;
    }
    return "single";
}

std::optional<Protocol> parse_protocol(std::string_view text) {
    for (const auto& [k, v] : kProtocols) {
        if (v == text) return k;
    }
    return std::nullopt;
}

std::uint32_t StrategySpec::expected_calls() const {
    switch (protocol) {
    case Protocol::single: return 1;
    case Protocol::short_refine:
    case Protocol::short_rci: return 2;
    case Protocol::rci:
    case Protocol::self_refine: return 3;
    case Protocol::self_consistency: return samples;
    case Protocol::tot: return tot_steps * (tot_candidates + tot_evaluators);
    }
    return 1;
}

void validate_spec(const StrategySpec& s) {
    const std::string name(to_string(s.id));
    if (s.template_refs.size() != template_count(s.protocol)) {
        throw ConfigError("strategy " + name + ": protocol " + std::string(to_string(s.protocol)) + " needs " +
                          std::to_string(template_count(s.protocol)) + " templates");
    }
    if (s.temperature < 0 || s.temperature > 2) throw ConfigError("strategy " + name + ": temperature outside [0, 2]");
    if (s.protocol == Protocol::self_consistency && s.samples != 3) {
        throw ConfigError("strategy " + name + ": self-consistency takes 3 samples");
    }
    if (s.protocol != Protocol::self_consistency && s.samples != 1) {
        throw ConfigError("strategy " + name + ": only self-consistency samples more than once");
    }
    if (s.protocol == Protocol::tot && (s.tot_steps != 8 || s.tot_candidates != 3 || s.tot_evaluators != 3)) {
        throw ConfigError("strategy " + name + ": tree of thoughts runs 8 steps, 3 candidates, 3 evaluators");
    }
}

// ---------------------------------------------------------------- templates

std::string render_template(std::string_view text, const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        if (text[i] == '{' && i + 1 < text.size() && ident_start(text[i + 1])) {
            std::size_t j = i + 1;
            while (j < text.size() && ident_char(text[j])) ++j;
            if (j < text.size() && text[j] == '}') {
                const std::string key(text.substr(i + 1, j - i - 1));
                auto it = vars.find(key);
                if (it == vars.end()) throw ConfigError("template placeholder {" + key + "} has no value");
                out += it->second;
                i = j + 1;
                continue;
            }
        }
        out += text[i++];
    }
    return out;
}

TemplateLibrary TemplateLibrary::load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError("template directory not found: " + dir.string());
    TemplateLibrary lib;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (!e.is_regular_file() || e.path().extension() != ".txt") continue;
        std::string text = read_file(e.path());
        if (!text.empty() && text.back() == '\n') text.pop_back();
        lib.add(e.path().stem().string(), std::move(text));
    }
    return lib;
}

void TemplateLibrary::add(std::string name, std::string text) { templates_[std::move(name)] = std::move(text); }

bool TemplateLibrary::contains(std::string_view name) const { return templates_.find(name) != templates_.end(); }

const std::string& TemplateLibrary::get(std::string_view name) const {
    auto it = templates_.find(name);
    if (it == templates_.end()) throw LookupError("unknown template '" + std::string(name) + "'");
    return it->second;
}

std::string TemplateLibrary::render(std::string_view name, const std::map<std::string, std::string>& vars) const {
    return render_template(get(name), vars);
}

// ---------------------------------------------------------------- registry

StrategyRegistry StrategyRegistry::parse(std::string_view json_text, const TemplateLibrary& templates) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("strategy registry: ") + e.what());
    }
    if (j.value("schema_version", 0) != 1) throw ConfigError("strategy registry: unsupported schema_version");
    StrategyRegistry reg;
    try {
        for (const auto& [name, v] : j.at("strategies").items()) {
            StrategySpec s;
            const auto id = parse_strategy_id(name);
            if (!id) throw ConfigError("strategy registry: unknown strategy '" + name + "'");
            s.id = *id;
            const auto proto = parse_protocol(v.at("protocol").get<std::string>());
            if (!proto) throw ConfigError("strategy registry: " + name + ": unknown protocol");
            s.protocol = *proto;
            s.template_refs = v.at("templates").get<std::vector<std::string>>();
            s.temperature = v.value("temperature", 0.0);
            s.samples = v.value("samples", 1u);
            if (v.contains("few_shot")) s.few_shot_set = v.at("few_shot").get<std::string>();
            s.api_sequence = v.value("api_sequence", false);
            s.strip_code_blocks = v.value("strip_code_blocks", false);
            validate_spec(s);
            for (const auto& t : s.template_refs) {
                if (!templates.contains(t)) throw ConfigError("strategy " + name + ": missing template '" + t + "'");
            }
            if (!reg.specs_.emplace(s.id, std::move(s)).second) {
                throw ConfigError("strategy registry: duplicate strategy '" + name + "'");
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("strategy registry: ") + e.what());
    }
    for (StrategyId id : all_strategy_ids()) {
        if (!reg.specs_.count(id)) {
            throw ConfigError("strategy registry: no entry for '" + std::string(to_string(id)) + "'");
        }
    }
    return reg;
}

StrategyRegistry StrategyRegistry::load(const std::filesystem::path& path, const TemplateLibrary& templates) {
    return parse(read_file(path), templates);
}

const StrategySpec& StrategyRegistry::get(StrategyId id) const {
    auto it = specs_.find(id);
    if (it == specs_.end()) throw LookupError("no strategy '" + std::string(to_string(id)) + "'");
    return it->second;
}

// ---------------------------------------------------------------- api sequence

std::vector<std::string> extract_api_sequence(std::string_view source) {
    const auto all = java::lex(source);
    std::vector<java::Token> t;
    for (const auto& tok : all) {
        if (!java::is_trivia(tok.kind)) t.push_back(tok);
    }
    auto is_punct = [&](std::size_t i, char c) {
        return i < t.size() && t[i].kind == java::TokenKind::punct && t[i].text[0] == c;
    };
    auto is_ident = [&](std::size_t i) { return i < t.size() && t[i].kind == java::TokenKind::identifier; };
    auto is_kw = [&](std::size_t i, std::string_view k) {
        return i < t.size() && t[i].kind == java::TokenKind::keyword && t[i].text == k;
    };

    std::vector<std::string> out;
    int depth = 0;
    std::vector<int> class_depths; // brace depths that open a class body
    bool class_pending = false;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if ((is_kw(i, "class") || is_kw(i, "interface") || is_kw(i, "enum") || is_kw(i, "record")) &&
            !(i > 0 && is_punct(i - 1, '.'))) {
            class_pending = true;
        }
        if (is_punct(i, '{')) {
            ++depth;
            if (class_pending) class_depths.push_back(depth);
            class_pending = false;
            continue;
        }
        if (is_punct(i, '}')) {
            if (!class_depths.empty() && class_depths.back() == depth) class_depths.pop_back();
            --depth;
            continue;
        }
        if (is_kw(i, "new")) {
            // new a.b.C<...>(  -> "new a.b.C"; array creation is skipped.
            std::size_t j = i + 1;
            std::string name;
            while (is_ident(j)) {
                name += t[j].text;
                if (is_punct(j + 1, '.') && is_ident(j + 2)) {
                    name += '.';
                    j += 2;
                } else {
                    ++j;
                    break;
                }
            }
            if (name.empty()) continue;
            if (is_punct(j, '<')) {
                int angle = 0;
                for (; j < t.size(); ++j) {
                    if (is_punct(j, '<')) ++angle;
                    else if (is_punct(j, '>') && --angle == 0) {
                        ++j;
                        break;
                    }
                }
            }
            if (is_punct(j, '(')) out.push_back("new " + name);
            i = j - 1;
            continue;
        }
        if (!is_ident(i) || !is_punct(i + 1, '(')) continue;
        const bool in_class_body = !class_depths.empty() && class_depths.back() == depth;
        if (i > 0) {
            const auto& prev = t[i - 1];
            const bool prev_type = prev.kind == java::TokenKind::identifier ||
                                   (prev.kind == java::TokenKind::keyword && prev.text != "return" &&
                                    prev.text != "throw" && prev.text != "else" && prev.text != "case" &&
                                    prev.text != "assert" && prev.text != "do" && prev.text != "yield");
            if (prev_type) continue; // declaration: "void run(", "String name("
            if ((is_punct(i - 1, '>') || is_punct(i - 1, ']')) && in_class_body) continue;
        }
        // Qualify with a dotted chain of plain identifiers.
        std::string name(t[i].text);
        std::size_t k = i;
        while (k >= 2 && is_punct(k - 1, '.') && is_ident(k - 2)) {
            name = std::string(t[k - 2].text) + "." + name;
            k -= 2;
        }
        if (k >= 1 && is_punct(k - 1, '.') && name.find('.') != std::string::npos) {
            // a().b.c( : the chain is rooted in a call result, keep only the method name
            name = std::string(t[i].text);
        }
        if (k >= 1 && is_punct(k - 1, '@')) continue;
        out.push_back(std::move(name));
    }
    return out;
}

// ---------------------------------------------------------------- few-shot

std::vector<FewShotExample> parse_few_shot_examples(std::string_view json_text) {
    std::vector<FewShotExample> out;
    try {
        const json j = json::parse(json_text);
        for (const auto& e : j) {
            FewShotExample x;
            x.vulnerable = e.at("vulnerable").get<bool>();
            const auto cwe = CweId::parse(e.at("cwe").get<std::string>());
            if (!cwe) throw ConfigError("few-shot example: bad cwe " + e.at("cwe").dump());
            x.cwe = *cwe;
            x.name = e.at("name").get<std::string>();
            x.code = e.at("code").get<std::string>();
            x.explanation = e.at("explanation").get<std::string>();
            out.push_back(std::move(x));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("few-shot examples: ") + e.what());
    }
    return out;
}

std::vector<FewShotExample> load_few_shot_examples(const std::filesystem::path& path) {
    return parse_few_shot_examples(read_file(path));
}

std::vector<ChatMessage> build_few_shot_prompt(const std::vector<FewShotExample>& examples, std::string_view code,
                                               const TemplateLibrary& templates, std::string_view template_name,
                                               std::string_view fallback_template) {
    if (examples.empty()) {
        log::warn("few-shot example list is empty; using the zero-shot prompt");
        return {{Role::human, templates.render(fallback_template, {{"code", std::string(code)}})}};
    }
    const auto vulnerable = std::count_if(examples.begin(), examples.end(), [](const auto& e) { return e.vulnerable; });
    if (static_cast<std::size_t>(vulnerable) * 2 != examples.size()) {
        throw ConfigError("few-shot examples are unbalanced: " + std::to_string(vulnerable) + " vulnerable of " +
                          std::to_string(examples.size()));
    }
    std::string block;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const auto& e = examples[i];
        if (i) block += "\n";
        block += "    Example " + std::to_string(i + 1) + ":\n    ```java\n" + indent(e.code, "    ") + "\n    ```\n    " +
                 verdict_line_for(e);
    }
    return {{Role::human, templates.render(template_name, {{"examples", block}, {"code", std::string(code)}})}};
}

// ---------------------------------------------------------------- parsing helpers

std::string strip_fenced_blocks(std::string_view text) {
    std::string out;
    bool inside = false;
    for (const auto& line : split_lines(text)) {
        std::string_view l = line;
        while (!l.empty() && (l.front() == ' ' || l.front() == '\t')) l.remove_prefix(1);
        const bool fence = l.rfind("```", 0) == 0;
        if (fence) {
            // "```x```" on one line opens and closes.
            if (!inside && l.size() > 3 && l.find("```", 3) != std::string_view::npos) continue;
            inside = !inside;
            continue;
        }
        if (inside) continue;
        out += line;
        out += '\n';
    }
    return out;
}

std::optional<std::uint32_t> parse_candidate_choice(std::string_view response, std::uint32_t count) {
    std::string low(response);
    for (char& c : low) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    const std::string_view marker = "best candidate";
    for (auto pos = low.find(marker); pos != std::string::npos; pos = low.find(marker, pos + 1)) {
        std::size_t i = pos + marker.size();
        while (i < low.size() && (low[i] == ' ' || low[i] == ':' || low[i] == '*' || low[i] == '#' || low[i] == '=' ||
                                  low[i] == '\t')) {
            ++i;
        }
        std::uint64_t n = 0;
        std::size_t digits = 0;
        while (i < low.size() && std::isdigit(static_cast<unsigned char>(low[i])) && digits < 9) {
            n = n * 10 + static_cast<std::uint64_t>(low[i] - '0');
            ++i;
            ++digits;
        }
        if (digits && n >= 1 && n <= count) return static_cast<std::uint32_t>(n - 1);
    }
    return std::nullopt;
}

std::uint32_t tot_winner(const std::vector<std::optional<std::uint32_t>>& votes, std::uint32_t count) {
    std::vector<std::uint32_t> tally(count, 0);
    for (const auto& v : votes) {
        if (v && *v < count) ++tally[*v];
    }
    std::uint32_t best = 0;
    for (std::uint32_t k = 1; k < count; ++k) {
        if (tally[k] > tally[best]) best = k;
    }
    return best;
}

std::set<CweId> majority_cwes(const std::vector<std::set<CweId>>& per_sample) {
    std::map<CweId, std::size_t> votes;
    for (const auto& s : per_sample) {
        for (CweId c : s) ++votes[c];
    }
    std::set<CweId> out;
    const std::size_t need = per_sample.size() / 2 + 1;
    for (const auto& [c, n] : votes) {
        if (n >= need) out.insert(c);
    }
    return out;
}

std::string_view to_string(ScanStatus s) {
    switch (s) {
    case ScanStatus::ok: return "ok";
    case ScanStatus::skipped_overflow: return "skipped-overflow";
    case ScanStatus::error: return "error";
    }
    return "ok";
}

std::optional<ScanStatus> parse_scan_status(std::string_view text) {
    if (text == "ok") return ScanStatus::ok;
    if (text == "skipped-overflow") return ScanStatus::skipped_overflow;
    if (text == "error") return ScanStatus::error;
    return std::nullopt;
}

// ---------------------------------------------------------------- decisions

namespace {

ParsedResponse parse_for(const StrategySpec& spec, const std::string& content) {
    return parse_verdicts(spec.strip_code_blocks ? strip_fenced_blocks(content) : content);
}

void absorb(TranscriptVerdict& out, const ParsedResponse& p, std::string_view where) {
    out.verdicts.insert(out.verdicts.end(), p.verdicts.begin(), p.verdicts.end());
    out.low_confidence = out.low_confidence || p.low_confidence;
    for (const auto& d : p.diagnostics) {
        out.diagnostics.push_back(std::string(where) + (d.line ? " line " + std::to_string(d.line) : "") + ": " +
                                  d.reason);
    }
}

} // namespace

TranscriptVerdict decide(const StrategySpec& spec, const Transcript& transcript) {
    const auto& steps = transcript.steps();
    if (steps.size() != spec.expected_calls()) {
        throw IntegrityError("transcript of " + std::to_string(steps.size()) + " calls, strategy " +
                             std::string(to_string(spec.id)) + " makes " + std::to_string(spec.expected_calls()));
    }
    TranscriptVerdict out;
    switch (spec.protocol) {
    case Protocol::self_consistency: {
        std::vector<std::set<CweId>> samples;
        for (std::size_t i = 0; i < steps.size(); ++i) {
            const auto p = parse_for(spec, steps[i].response.content);
            absorb(out, p, "sample " + std::to_string(i + 1));
            samples.push_back(positive_cwes(p.verdicts));
        }
        out.reported_cwes = majority_cwes(samples);
        break;
    }
    case Protocol::tot: {
        const std::uint32_t per_step = spec.tot_candidates + spec.tot_evaluators;
        const std::size_t base = static_cast<std::size_t>(spec.tot_steps - 1) * per_step;
        std::vector<std::optional<std::uint32_t>> votes;
        for (std::uint32_t e = 0; e < spec.tot_evaluators; ++e) {
            votes.push_back(parse_candidate_choice(steps[base + spec.tot_candidates + e].response.content,
                                                   spec.tot_candidates));
        }
        const auto win = tot_winner(votes, spec.tot_candidates);
        const auto p = parse_for(spec, steps[base + win].response.content);
        absorb(out, p, "step " + std::to_string(spec.tot_steps) + " candidate " + std::to_string(win + 1));
        out.reported_cwes = positive_cwes(p.verdicts);
        break;
    }
    default: {
        const auto p = parse_for(spec, steps.back().response.content);
        absorb(out, p, "final answer");
        out.reported_cwes = positive_cwes(p.verdicts);
        break;
    }
    }
    out.final_decision = !out.reported_cwes.empty();
    return out;
}

// ---------------------------------------------------------------- engine

StrategyEngine::StrategyEngine(const TemplateLibrary& templates, Gateway& gateway, ModelProfile profile,
                               Options options)
    : templates_(templates), gateway_(gateway), profile_(std::move(profile)), options_(std::move(options)) {}

std::vector<ChatMessage> StrategyEngine::opening_turn(const StrategySpec& spec, std::string_view code) const {
    if (spec.few_shot_set) {
        auto it = options_.few_shot.find(*spec.few_shot_set);
        if (it == options_.few_shot.end()) throw ConfigError("few-shot set '" + *spec.few_shot_set + "' not loaded");
        return build_few_shot_prompt(it->second, code, templates_, spec.template_refs.front(), "b");
    }
    std::map<std::string, std::string> vars{{"code", std::string(code)}};
    if (spec.api_sequence) {
        const auto seq = extract_api_sequence(code);
        std::string joined;
        for (const auto& s : seq) {
            if (!joined.empty()) joined += ", ";
            joined += s;
        }
        vars["api_sequence"] = joined.empty() ? "(none)" : joined;
    }
    return {{Role::human, templates_.render(spec.template_refs.front(), vars)}};
}

Completion StrategyEngine::call(Transcript& t, std::vector<ChatMessage> messages, double temperature,
                                std::uint32_t run_index) {
    Completion c = gateway_.complete(messages, profile_, {temperature, run_index});
    t.append({std::move(messages), c.message, c.usage, c.replay_key});
    return c;
}

void StrategyEngine::run_conversation(Transcript& t, const StrategySpec& spec, std::string_view code) {
    auto messages = opening_turn(spec, code);
    auto reply = call(t, messages, spec.temperature, 0);
    for (std::size_t k = 1; k < spec.template_refs.size(); ++k) {
        messages.push_back(reply.message);
        messages.push_back({Role::human, templates_.render(spec.template_refs[k], {})});
        reply = call(t, messages, spec.temperature, 0);
    }
}

void StrategyEngine::run_self_consistency(Transcript& t, const StrategySpec& spec, std::string_view code) {
    const auto messages = opening_turn(spec, code);
    for (std::uint32_t i = 0; i < spec.samples; ++i) call(t, messages, spec.temperature, i);
}

void StrategyEngine::run_tot(Transcript& t, const StrategySpec& spec, std::string_view code) {
    const auto instructions = split_lines(templates_.get(spec.template_refs[2]));
    if (instructions.size() != spec.tot_steps) {
        throw ConfigError("template " + spec.template_refs[2] + " must hold one instruction per step");
    }
    std::string chain;
    for (std::uint32_t s = 0; s < spec.tot_steps; ++s) {
        std::map<std::string, std::string> vars{{"code", std::string(code)},
                                                {"step", std::to_string(s + 1)},
                                                {"step_instruction", instructions[s]},
                                                {"chain", chain.empty() ? "    (no steps yet)" : chain}};
        const std::vector<ChatMessage> step_msgs{{Role::human, templates_.render(spec.template_refs[0], vars)}};
        std::vector<std::string> candidates;
        for (std::uint32_t c = 0; c < spec.tot_candidates; ++c) {
            candidates.push_back(call(t, step_msgs, spec.temperature, c).message.content);
        }
        std::string listing;
        for (std::uint32_t c = 0; c < spec.tot_candidates; ++c) {
            if (c) listing += "\n";
            listing += "    Candidate " + std::to_string(c + 1) + ":\n" + indent(candidates[c], "    ");
        }
        vars["candidates"] = listing;
        vars["count"] = std::to_string(spec.tot_candidates);
        const std::vector<ChatMessage> eval_msgs{{Role::human, templates_.render(spec.template_refs[1], vars)}};
        std::vector<std::optional<std::uint32_t>> votes;
        for (std::uint32_t e = 0; e < spec.tot_evaluators; ++e) {
            votes.push_back(parse_candidate_choice(call(t, eval_msgs, spec.temperature, e).message.content,
                                                   spec.tot_candidates));
        }
        const auto win = tot_winner(votes, spec.tot_candidates);
        if (!chain.empty()) chain += "\n";
        chain += "    Step " + std::to_string(s + 1) + ":\n" + indent(candidates[win], "    ");
    }
}

ScanResult StrategyEngine::run(const std::string& case_id, std::string_view source, const StrategySpec& spec) {
    ScanResult r;
    r.case_id = case_id;
    r.strategy = spec.id;
    r.model = profile_.model_name;
    const std::string code = prepare_for_llm(source, options_.package_override);
    try {
        switch (spec.protocol) {
        case Protocol::self_consistency: run_self_consistency(r.transcript, spec, code); break;
        case Protocol::tot: run_tot(r.transcript, spec, code); break;
        default: run_conversation(r.transcript, spec, code); break;
        }
    } catch (const OverflowError& e) {
        r.status = ScanStatus::skipped_overflow;
        r.error = e.what();
        log::warn(case_id + ": skipped, " + e.what());
        return r;
    } catch (const ConfigError&) {
        throw;
    } catch (const ProviderError& e) {
        throw CaseError(case_id, e.what(), true);
    } catch (const java::LexError& e) {
        throw CaseError(case_id, e.what());
    } catch (const Error& e) {
        throw CaseError(case_id, e.what());
    }
    auto d = decide(spec, r.transcript);
    r.verdicts = std::move(d.verdicts);
    r.reported_cwes = std::move(d.reported_cwes);
    r.final_decision = d.final_decision;
    r.low_confidence = d.low_confidence;
    r.diagnostics = std::move(d.diagnostics);
    for (const auto& msg : r.diagnostics) log::info(case_id + " " + std::string(to_string(spec.id)) + ": " + msg);
    return r;
}

} // namespace llmsast
