// Offline stand-in for a chat model. It pattern-matches Java sources and
// sinks per method, propagates taint along intra-class calls, and answers in
// the verdict-line format. Deterministic for a given request; a hash of the
// request key injects a small, temperature-dependent error rate so that
// sampling strategies have something to vote on.
#include "llmsast/digest.hpp"
#include "llmsast/java_lexer.hpp"
#include "llmsast/llm_gateway.hpp"
#include "llmsast/verdict_parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <set>

namespace llmsast {
namespace {

struct Method {
    std::string name;
    std::string body;
};

struct SinkRule {
    CweId cwe;
    const char* name;
    std::vector<const char*> any_of;  ///< at least one must occur
    std::vector<const char*> all_of;  ///< every one must occur
    std::vector<const char*> none_of; ///< neutralizers
};

const std::vector<SinkRule>& sink_rules() {
    static const std::vector<SinkRule> rules{
        {CweId(78), "OS Command Injection", {".exec(", "ProcessBuilder("}, {}, {}},
        {CweId(89), "SQL Injection", {"executeQuery(", "executeUpdate(", "execute(", "addBatch("},
         {"createStatement("}, {}},
        {CweId(23), "Relative Path Traversal", {"new File(", "FileInputStream(", "FileReader(", "FileOutputStream("},
         {"+"}, {"getCanonicalPath"}},
        {CweId(79), "Cross-site Scripting", {"getWriter().println(", "getWriter().print("}, {"+"},
         {"htmlEncode", "escapeHtml"}},
        {CweId(90), "LDAP Injection", {".search("}, {"DirContext"}, {"encodeForLDAP"}},
    };
    return rules;
}

constexpr std::array<const char*, 10> kSources{
    "getParameter(", "getQueryString(", "getCookies(", "getHeader(", "readLine(",
    "getenv(",       "getProperty(",    "getInputStream(", "nextToken(", "getString("};

bool has(const std::string& text, const char* needle) { return text.find(needle) != std::string::npos; }

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

/// The code under review: the last fenced block of the first human turn, or
/// the whole turn when it has no fences.
std::string extract_code(const std::vector<ChatMessage>& messages) {
    const ChatMessage* first = nullptr;
    for (const auto& m : messages) {
        if (m.role == Role::human) {
            first = &m;
            break;
        }
    }
    if (!first) return {};
    const std::string& t = first->content;
    std::vector<std::size_t> fences;
    for (auto p = t.find("```"); p != std::string::npos; p = t.find("```", p + 3)) fences.push_back(p);
    if (fences.size() < 2) return t;
    const std::size_t open = fences[fences.size() - 2] + 3, close = fences.back();
    std::string code = t.substr(open, close - open);
    if (code.rfind("java\n", 0) == 0) code.erase(0, 5);
    return code;
}

std::vector<Method> split_methods(const std::string& code) {
    std::vector<java::Token> toks;
    try {
        toks = java::lex(code);
    } catch (const java::LexError&) {
        return {{"", code}};
    }
    std::vector<Method> out;
    int depth = 0;
    std::string pending; // identifier directly before '(' at class-body depth
    std::string last_ident;
    bool saw_paren = false;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto& t = toks[i];
        if (java::is_trivia(t.kind)) continue;
        if (t.kind == java::TokenKind::identifier) last_ident = std::string(t.text);
        if (t.kind != java::TokenKind::punct) continue;
        const char c = t.text[0];
        if (depth == 1 && c == '(' && pending.empty()) {
            pending = last_ident;
            saw_paren = true;
        } else if (depth == 1 && (c == ';' || c == '=')) {
            pending.clear();
            saw_paren = false;
        } else if (c == '{') {
            if (depth == 1 && saw_paren && !pending.empty()) {
                int d = 0;
                std::size_t j = i;
                for (; j < toks.size(); ++j) {
                    if (toks[j].kind != java::TokenKind::punct) continue;
                    if (toks[j].text[0] == '{') ++d;
                    else if (toks[j].text[0] == '}' && --d == 0) break;
                }
                const std::size_t end = j < toks.size() ? toks[j].offset + 1 : code.size();
                out.push_back({pending, code.substr(t.offset, end - t.offset)});
                pending.clear();
                saw_paren = false;
                i = j;
                continue;
            }
            ++depth;
        } else if (c == '}') {
            --depth;
            pending.clear();
            saw_paren = false;
        }
    }
    if (out.empty()) out.push_back({"", code});
    return out;
}

struct Analysis {
    std::set<CweId> findings;   ///< tainted data reaches an unsafe sink
    std::set<CweId> suspicious; ///< unsafe sink without a known tainted source
    std::vector<std::string> sources;
};

Analysis analyze(const std::string& code) {
    const auto methods = split_methods(code);
    std::vector<bool> tainted(methods.size(), false);
    Analysis a;
    for (std::size_t i = 0; i < methods.size(); ++i) {
        for (const char* s : kSources) {
            if (has(methods[i].body, s)) {
                tainted[i] = true;
                a.sources.emplace_back(s, std::string_view(s).size() - 1);
            }
        }
    }
    // Taint flows from a caller into every sibling method it calls.
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < methods.size(); ++i) {
            if (!tainted[i]) continue;
            for (std::size_t j = 0; j < methods.size(); ++j) {
                if (tainted[j] || methods[j].name.empty()) continue;
                if (has(methods[i].body, (methods[j].name + "(").c_str())) {
                    tainted[j] = true;
                    changed = true;
                }
            }
        }
    }
    for (std::size_t i = 0; i < methods.size(); ++i) {
        const auto& body = methods[i].body;
        for (const auto& r : sink_rules()) {
            const bool any = std::any_of(r.any_of.begin(), r.any_of.end(), [&](const char* s) { return has(body, s); });
            const bool all = std::all_of(r.all_of.begin(), r.all_of.end(), [&](const char* s) { return has(body, s); });
            const bool safe =
                std::any_of(r.none_of.begin(), r.none_of.end(), [&](const char* s) { return has(body, s); });
            if (!any || !all || safe) continue;
            (tainted[i] ? a.findings : a.suspicious).insert(r.cwe);
        }
    }
    for (CweId c : a.findings) a.suspicious.erase(c);
    std::sort(a.sources.begin(), a.sources.end());
    a.sources.erase(std::unique(a.sources.begin(), a.sources.end()), a.sources.end());
    return a;
}

const char* cwe_name(CweId c) {
    for (const auto& r : sink_rules()) {
        if (r.cwe == c) return r.name;
    }
    if (c == CweId(22)) return "Path Traversal";
    return "Unknown";
}

std::string verdict_lines(const std::set<CweId>& cwes, const Analysis& a) {
    std::string out;
    const std::string src = a.sources.empty() ? "an external source" : a.sources.front() + "()";
    for (CweId c : cwes) {
        out += "vulnerability: YES | vulnerability type: " + c.str() + " | vulnerability name: " + cwe_name(c) +
               " | explanation: data read through " + src + " reaches the sink without neutralization.\n";
    }
    if (cwes.empty()) {
        out += "vulnerability: NO | vulnerability type: N/A | vulnerability name: N/A | explanation: no untrusted "
               "data reaches a dangerous sink.\n";
    }
    return out;
}

std::vector<std::string> split_candidates(const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    for (int k = 1;; ++k) {
        const std::string marker = "Candidate " + std::to_string(k) + ":";
        const auto at = text.find(marker, pos);
        if (at == std::string::npos) break;
        out.push_back(text.substr(at + marker.size()));
        pos = at + marker.size();
    }
    // Trim each candidate at the next marker.
    for (std::size_t k = 0; k + 1 < out.size(); ++k) {
        const std::string next = "Candidate " + std::to_string(k + 2) + ":";
        const auto at = out[k].find(next);
        if (at != std::string::npos) out[k].resize(at);
    }
    return out;
}

class HeuristicBackend final : public Backend {
public:
    RawCompletion complete(const std::vector<ChatMessage>& messages, const ModelProfile& profile,
                           const CompletionParams& params) override {
        const std::string key = record_replay_key(messages, profile, params);
        const std::uint64_t h = std::stoull(key.substr(0, 15), nullptr, 16);
        const double u = static_cast<double>(h % 1000000) / 1e6;
        const bool alt = (h >> 24) & 1;

        const Analysis a = analyze(extract_code(messages));
        const std::string last = messages.empty() ? std::string() : messages.back().content;
        const std::string ll = lower(last);

        std::string content;
        if (ll.find("best candidate") != std::string::npos) {
            const auto cands = split_candidates(last);
            std::size_t pick = cands.empty() ? 0 : h % cands.size();
            for (std::size_t k = 0; k < cands.size(); ++k) {
                const auto pos = positive_cwes(parse_verdicts(cands[k]).verdicts);
                if (!pos.empty() && pos == a.findings) {
                    pick = k;
                    break;
                }
            }
            content = "best candidate: " + std::to_string(pick + 1) + "\nreason: it follows the data flow most closely.";
        } else if (messages.size() > 1 && ll.find("vulnerability type") == std::string::npos &&
                   ll.find("vulnerability:") == std::string::npos) {
            content = "Looking at the code again: ";
            if (a.sources.empty()) content += "I see no external input source. ";
            else content += "input enters through " + a.sources.front() + "(). ";
            if (!a.findings.empty()) content += "That input reaches a sink that uses it unchecked. ";
            else if (!a.suspicious.empty()) content += "The dangerous sink only receives constant data. ";
            else content += "No dangerous sink is present. ";
            content += "The previous answer should state this flow explicitly.";
        } else {
            // Initial analysis, refinement, or the final reasoning step.
            const double rate = (messages.size() > 1 ? 0.04 : 0.08) + 0.12 * params.temperature;
            std::set<CweId> report = a.findings;
            if (u < rate) {
                if (!report.empty()) report.clear();
                else if (!a.suspicious.empty()) report.insert(*a.suspicious.begin());
            }
            if (report.count(CweId(23)) && alt) {
                report.erase(CweId(23));
                report.insert(CweId(22));
            }
            content = "Analysis:\n";
            content += "Sources: " + (a.sources.empty() ? std::string("none") : a.sources.front() + "()") + "\n";
            content += "Sinks checked: command execution, SQL statements, file access, HTML output.\n\n";
            if (ll.find("fixed code") != std::string::npos || ll.find("patch") != std::string::npos) {
                content += "```java\n// vulnerability: NO after validating the input\n```\n\n";
            }
            content += verdict_lines(report, a);
        }
        RawCompletion out;
        out.content = std::move(content);
        out.input_tokens = estimate_tokens(messages);
        out.output_tokens = (out.content.size() + 3) / 4;
        return out;
    }
};

} // namespace

std::unique_ptr<Backend> make_heuristic_backend() { return std::make_unique<HeuristicBackend>(); }

} // namespace llmsast
