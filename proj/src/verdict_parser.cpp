#include "llmsast/verdict_parser.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace llmsast {
namespace {

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

char to_lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), to_lower);
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (is_space(s.front()) || s.front() == '\n')) s.remove_prefix(1);
    while (!s.empty() && (is_space(s.back()) || s.back() == '\n')) s.remove_suffix(1);
    return s;
}

/// A response line with markdown emphasis removed. `raw_pos[i]` is the
/// offset in the original line of text[i].
struct CleanLine {
    std::string text;
    std::vector<std::size_t> raw_pos;
    std::string_view raw;
};

CleanLine clean_line(std::string_view raw) {
    CleanLine out;
    out.raw = raw;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] == '*' || raw[i] == '`') continue;
        out.text.push_back(raw[i]);
        out.raw_pos.push_back(i);
    }
    return out;
}

enum class Field { type, name, explanation, none };

Field classify_key(std::string_view key) {
    const std::string k = lower(trim(key));
    if (k.empty() || k.size() > 32) return Field::none;
    if (k.find("type") != std::string::npos || k == "cwe" || k == "cwe id" || k == "cwe_id") return Field::type;
    if (k.find("name") != std::string::npos) return Field::name;
    if (k == "explanation" || k == "details" || k == "detail" || k == "reason" || k == "description" ||
        k == "justification") {
        return Field::explanation;
    }
    return Field::none;
}

struct Anchor {
    std::size_t token_begin; ///< in CleanLine::text
    std::size_t token_end;
};

/// Positions of "vulnerability:" decision slots in a lower-cased line.
std::vector<Anchor> find_anchors(const std::string& lc) {
    static constexpr std::string_view kLabel = "vulnerability";
    std::vector<Anchor> out;
    std::size_t p = 0;
    while ((p = lc.find(kLabel, p)) != std::string::npos) {
        std::size_t j = p + kLabel.size();
        p = j;
        while (j < lc.size() && is_space(lc[j])) ++j;
        if (j >= lc.size() || lc[j] != ':') continue;
        ++j;
        while (j < lc.size() && is_space(lc[j])) ++j;
        std::size_t e = j;
        while (e < lc.size() && (is_alpha(lc[e]) || lc[e] == '/')) ++e;
        if (e == j) continue;
        out.push_back({j, e});
    }
    return out;
}

/// "<description>: YES | vulnerability type: ..." where a model put a name in
/// place of the "vulnerability" keyword.
std::optional<Anchor> find_described_anchor(const std::string& lc) {
    const auto type_pos = lc.find("vulnerability type");
    if (type_pos == std::string::npos) return std::nullopt;
    const auto colon = lc.find(':');
    if (colon == std::string::npos || colon >= type_pos) return std::nullopt;
    std::size_t j = colon + 1;
    while (j < lc.size() && is_space(lc[j])) ++j;
    std::size_t e = j;
    while (e < lc.size() && (is_alpha(lc[e]) || lc[e] == '/')) ++e;
    if (e == j) return std::nullopt;
    bool recognized = true;
    normalize_decision(std::string_view(lc).substr(j, e - j), &recognized);
    const std::string tok = lc.substr(j, e - j);
    if (!recognized && tok != "maybe" && tok != "possible") return std::nullopt;
    return Anchor{j, e};
}

void apply_field(Verdict& v, Field f, std::string_view value) {
    value = trim(value);
    switch (f) {
    case Field::type:
        if (!v.cwe) v.cwe = normalize_cwe_token(value, true);
        break;
    case Field::name:
        if (!value.empty() && !v.name) v.name = std::string(value);
        break;
    case Field::explanation:
    case Field::none:
        if (value.empty()) break;
        if (v.explanation) {
            *v.explanation += " | ";
            *v.explanation += value;
        } else {
            v.explanation = std::string(value);
        }
        break;
    }
}

/// Parses "| key: value | free text |" pieces following a decision token.
bool apply_segment(Verdict& v, std::string_view seg) {
    bool saw_type = false;
    std::size_t start = 0;
    while (start <= seg.size()) {
        const auto bar = seg.find('|', start);
        const std::string_view piece = trim(seg.substr(start, bar == std::string_view::npos ? seg.npos : bar - start));
        if (!piece.empty()) {
            const auto colon = piece.find(':');
            const Field f = colon == std::string_view::npos ? Field::none : classify_key(piece.substr(0, colon));
            if (f == Field::type) saw_type = true;
            apply_field(v, f, f == Field::none ? piece : piece.substr(colon + 1));
        }
        if (bar == std::string_view::npos) break;
        start = bar + 1;
    }
    return saw_type;
}

/// Strips list markers such as "-", "*", "1." from a cleaned line.
std::string_view strip_marker(std::string_view s) {
    s = trim(s);
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) s = trim(s.substr(1));
    return s;
}

} // namespace

std::string_view to_string(Decision d) { return d == Decision::yes ? "YES" : "NO"; }

std::optional<CweId> normalize_cwe_token(std::string_view token, bool allow_bare) {
    const std::string lc = lower(token);
    auto digits_at = [&](std::size_t j) -> std::optional<CweId> {
        std::size_t e = j;
        while (e < lc.size() && is_digit(lc[e])) ++e;
        if (e == j || (e < lc.size() && is_alpha(lc[e]))) return std::nullopt;
        std::size_t s = j;
        while (s + 1 < e && lc[s] == '0') ++s;
        if (e - s > 9) return std::nullopt;
        return CweId::parse(std::string_view(lc).substr(s, e - s));
    };

    std::size_t p = 0;
    while ((p = lc.find("cwe", p)) != std::string::npos) {
        std::size_t j = p + 3;
        p = j;
        while (j < lc.size() && is_space(lc[j])) ++j;
        if (j < lc.size() && (lc[j] == '-' || lc[j] == '_' || lc[j] == ':' || lc[j] == '#')) ++j;
        while (j < lc.size() && is_space(lc[j])) ++j;
        if (auto id = digits_at(j)) return id;
    }
    if (!allow_bare) return std::nullopt;
    std::size_t j = 0;
    while (j < lc.size() && (is_space(lc[j]) || lc[j] == '*' || lc[j] == '`' || lc[j] == '"' || lc[j] == '\'' ||
                             lc[j] == '(' || lc[j] == '[' || lc[j] == '<')) {
        ++j;
    }
    return digits_at(j);
}

Decision normalize_decision(std::string_view token, bool* recognized) {
    auto word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '/'; };
    while (!token.empty() && !word(token.front())) token.remove_prefix(1);
    while (!token.empty() && !word(token.back())) token.remove_suffix(1);
    // Decoration inside a word ("YE**S") leaves no real decision token.
    std::string t;
    for (char c : token) {
        if (!word(c)) {
            t.clear();
            break;
        }
        t.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    static constexpr std::array<std::string_view, 3> yes{"YES", "Y", "TRUE"};
    static constexpr std::array<std::string_view, 6> no{"NO", "N", "FALSE", "NONE", "N/A", "NA"};
    const bool is_yes = std::find(yes.begin(), yes.end(), t) != yes.end();
    if (recognized) *recognized = is_yes || std::find(no.begin(), no.end(), t) != no.end();
    return is_yes ? Decision::yes : Decision::no;
}

ParsedResponse parse_verdicts(std::string_view response) {
    ParsedResponse out;

    std::vector<std::string_view> lines;
    for (std::size_t start = 0; start <= response.size();) {
        const auto nl = response.find('\n', start);
        lines.push_back(response.substr(start, nl == std::string_view::npos ? response.npos : nl - start));
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }

    for (std::size_t li = 0; li < lines.size(); ++li) {
        const CleanLine cl = clean_line(lines[li]);
        const std::string lc = lower(cl.text);
        std::vector<Anchor> anchors = find_anchors(lc);
        if (anchors.empty()) {
            if (auto a = find_described_anchor(lc)) anchors.push_back(*a);
        }

        for (std::size_t k = 0; k < anchors.size(); ++k) {
            const Anchor& a = anchors[k];
            Verdict v;
            const std::size_t raw_b = cl.raw_pos[a.token_begin];
            const std::size_t raw_e = cl.raw_pos[a.token_end - 1] + 1;
            v.raw_decision_token = std::string(cl.raw.substr(raw_b, raw_e - raw_b));
            bool recognized = true;
            v.present = normalize_decision(v.raw_decision_token, &recognized);
            if (!recognized) {
                out.diagnostics.push_back({li + 1, "non-standard decision '" + v.raw_decision_token + "' scored as NO"});
                out.low_confidence = true;
            }

            const std::size_t seg_end = k + 1 < anchors.size() ? anchors[k + 1].token_begin : cl.text.size();
            std::string_view seg = std::string_view(cl.text).substr(a.token_end, seg_end - a.token_end);
            if (k + 1 < anchors.size()) {
                // Drop the trailing "vulnerability:" label that belongs to the next anchor.
                const auto label = lower(seg).rfind("vulnerability");
                if (label != std::string::npos) seg = seg.substr(0, label);
            }
            bool saw_type = apply_segment(v, seg);

            // Newline-separated fields: "vulnerability type: CWE-78" on the following lines.
            if (!saw_type && anchors.size() == 1) {
                std::size_t nj = li + 1;
                while (nj < lines.size()) {
                    const CleanLine next = clean_line(lines[nj]);
                    const std::string_view body = strip_marker(next.text);
                    if (body.empty() || !find_anchors(lower(body)).empty()) break;
                    const auto colon = body.find(':');
                    if (colon == std::string_view::npos) break;
                    const Field f = classify_key(body.substr(0, colon));
                    if (f == Field::none) break;
                    if (f == Field::type) saw_type = true;
                    apply_field(v, f, body.substr(colon + 1));
                    ++nj;
                }
                li = nj - 1;
            }

            if (v.present == Decision::yes && !v.cwe) {
                v.cwe = normalize_cwe_token(seg);
                if (!v.cwe) {
                    v.malformed = true;
                    out.low_confidence = true;
                    out.diagnostics.push_back({li + 1, "YES verdict without a CWE identifier"});
                }
            }
            out.verdicts.push_back(std::move(v));
        }
    }

    if (out.verdicts.empty()) {
        out.diagnostics.push_back({0, "no verdict line found"});
        const std::string lc = lower(response);
        for (std::size_t p = 0; (p = lc.find("yes", p)) != std::string::npos; p += 3) {
            const bool left = p == 0 || !is_alpha(lc[p - 1]);
            const bool right = p + 3 >= lc.size() || !is_alpha(lc[p + 3]);
            if (left && right) {
                out.low_confidence = true;
                out.diagnostics.push_back({0, "response says YES outside a verdict line"});
                break;
            }
        }
    }
    return out;
}

std::set<CweId> positive_cwes(const std::vector<Verdict>& verdicts) {
    std::set<CweId> out;
    for (const Verdict& v : verdicts) {
        if (v.present == Decision::yes && v.cwe) out.insert(*v.cwe);
    }
    return out;
}

} // namespace llmsast
