#include "llmsast/corpus_prep.hpp"

#include "llmsast/digest.hpp"
#include "llmsast/io.hpp"
#include "llmsast/java_lexer.hpp"
#include "llmsast/log.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace llmsast {
namespace {

using java::TokenKind;
using nlohmann::json;

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }

bool is_punct(const java::Token& t, char c) { return t.kind == TokenKind::punct && t.text.size() == 1 && t.text[0] == c; }

/// Marks tokens belonging to `package ...;` and `import ...;` declarations.
std::vector<bool> declaration_mask(const std::vector<java::Token>& toks) {
    std::vector<bool> mask(toks.size(), false);
    int depth = 0;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto& t = toks[i];
        if (is_punct(t, '{')) ++depth;
        if (is_punct(t, '}')) --depth;
        if (depth == 0 && t.kind == TokenKind::keyword && (t.text == "package" || t.text == "import")) {
            for (; i < toks.size(); ++i) {
                mask[i] = true;
                if (is_punct(toks[i], ';')) break;
            }
        }
    }
    return mask;
}

std::string with_case_of(std::string_view matched, std::string replacement) {
    if (matched.empty() || replacement.empty() || !is_alpha(matched[0]) || !is_alpha(replacement[0])) return replacement;
    replacement[0] = is_upper(matched[0]) ? static_cast<char>(std::toupper(static_cast<unsigned char>(replacement[0])))
                                          : static_cast<char>(std::tolower(static_cast<unsigned char>(replacement[0])));
    return replacement;
}

bool word_start(std::string_view s, std::size_t pos) {
    return pos == 0 || !is_alpha(s[pos - 1]) || (is_upper(s[pos]) && is_lower(s[pos - 1]));
}

bool word_end(std::string_view s, std::size_t end) {
    return end == s.size() || !is_alpha(s[end]) || (is_upper(s[end]) && is_lower(s[end - 1]));
}

const std::regex& leak_pattern() {
    static const std::regex re("good|bad|cwe[0-9]", std::regex::icase);
    return re;
}

} // namespace

// ---------------------------------------------------------------- comments

std::string strip_comments(std::string_view source) {
    const auto toks = java::lex(source);
    std::string out;
    out.reserve(source.size());

    auto trim_horizontal = [&out] {
        while (!out.empty() && (out.back() == ' ' || out.back() == '\t')) out.pop_back();
    };
    auto next_starts_line = [&](std::size_t i) {
        if (i + 1 >= toks.size()) return true;
        const auto& n = toks[i + 1];
        if (n.kind == TokenKind::line_comment) return true;
        if (n.kind != TokenKind::whitespace) return false;
        const auto p = n.text.find_first_not_of(" \t\f");
        return p == std::string_view::npos || n.text[p] == '\n' || n.text[p] == '\r';
    };

    for (std::size_t i = 0; i < toks.size(); ++i) {
        const auto& t = toks[i];
        if (t.kind == TokenKind::line_comment) {
            trim_horizontal();
            continue;
        }
        if (t.kind != TokenKind::block_comment) {
            out.append(t.text);
            continue;
        }
        std::string breaks;
        for (char ch : t.text) {
            if (ch == '\n' || ch == '\r') breaks += ch;
        }
        if (!breaks.empty() || next_starts_line(i)) {
            trim_horizontal();
            out += breaks;
        } else if (!out.empty() && java::is_ident_char(out.back()) && i + 1 < toks.size() &&
                   java::is_ident_char(toks[i + 1].text.front())) {
            out += ' ';
        }
    }
    return out;
}

// ---------------------------------------------------------------- lexicon

HintLexicon::HintLexicon(std::vector<Rule> rules) : rules_(std::move(rules)) {
    for (const Rule& r : rules_) {
        if (r.pattern.empty()) throw ConfigError("hint lexicon: empty pattern");
        if (r.replacement.empty() || std::isdigit(static_cast<unsigned char>(r.replacement[0])) ||
            !std::all_of(r.replacement.begin(), r.replacement.end(), java::is_ident_char) ||
            java::is_keyword(r.replacement) || java::is_keyword(lower(r.replacement))) {
            throw ConfigError("hint lexicon: replacement '" + r.replacement + "' is not identifier-safe");
        }
        try {
            compiled_.emplace_back(r.kind == Kind::regex ? r.pattern : std::string("x"),
                                   std::regex::ECMAScript | std::regex::icase);
        } catch (const std::regex_error& e) {
            throw ConfigError("hint lexicon: bad regex '" + r.pattern + "': " + e.what());
        }
    }
    for (const Rule& r : rules_) {
        for (const std::string& variant : {r.replacement, lower(r.replacement)}) {
            if (apply_once(variant) != variant) {
                throw ConfigError("hint lexicon: replacement '" + r.replacement + "' would be rewritten again");
            }
        }
    }
}

HintLexicon HintLexicon::defaults() {
    return HintLexicon({
        {Kind::substring, "goodtobad", "G2B"},
        {Kind::substring, "badtogood", "B2G"},
        {Kind::substring, "good", "process"},
        {Kind::substring, "bad", "handle"},
        {Kind::word, "vuln", "item"},
        {Kind::word, "flaw", "part"},
        {Kind::word, "fix", "adjust"},
        {Kind::regex, "cwe[_-]?[0-9]+", "Unit"},
    });
}

HintLexicon HintLexicon::parse(std::string_view tsv) {
    std::vector<Rule> rules;
    std::istringstream in{std::string(tsv)};
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        while (true) {
            const auto tab = line.find('\t', start);
            f.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (f.size() != 3) throw ParseError("hint lexicon: expected 3 tab-separated fields", row);
        Kind kind;
        if (f[0] == "substring") kind = Kind::substring;
        else if (f[0] == "word") kind = Kind::word;
        else if (f[0] == "regex") kind = Kind::regex;
        else throw ParseError("hint lexicon: unknown rule kind '" + f[0] + "'", row);
        rules.push_back({kind, f[1], f[2]});
    }
    return HintLexicon(std::move(rules));
}

HintLexicon HintLexicon::load(const std::filesystem::path& path) { return parse(read_file(path)); }

std::string HintLexicon::apply_once(std::string_view identifier) const {
    std::string cur(identifier);
    for (std::size_t r = 0; r < rules_.size(); ++r) {
        const Rule& rule = rules_[r];
        std::string next;
        if (rule.kind == Kind::regex) {
            std::size_t last = 0;
            for (auto it = std::sregex_iterator(cur.begin(), cur.end(), compiled_[r]); it != std::sregex_iterator();
                 ++it) {
                const auto pos = static_cast<std::size_t>(it->position());
                if (it->length() == 0) continue;
                next.append(cur, last, pos - last);
                next += with_case_of(it->str(), rule.replacement);
                last = pos + static_cast<std::size_t>(it->length());
            }
            next.append(cur, last, std::string::npos);
        } else {
            const std::string hay = lower(cur);
            const std::string needle = lower(rule.pattern);
            std::size_t last = 0;
            std::size_t pos = 0;
            while ((pos = hay.find(needle, pos)) != std::string::npos) {
                const std::size_t end = pos + needle.size();
                if (rule.kind == Kind::word && !(word_start(cur, pos) && word_end(cur, end))) {
                    ++pos;
                    continue;
                }
                next.append(cur, last, pos - last);
                next += with_case_of(std::string_view(cur).substr(pos, needle.size()), rule.replacement);
                last = pos = end;
            }
            next.append(cur, last, std::string::npos);
        }
        cur = std::move(next);
    }
    return cur;
}

std::string HintLexicon::apply(std::string_view identifier) const {
    std::string cur(identifier);
    // Replacements are validated to be fixed points, so this settles quickly.
    for (int round = 0; round < 8; ++round) {
        std::string next = apply_once(cur);
        if (next == cur) break;
        cur = std::move(next);
    }
    return cur;
}

// ---------------------------------------------------------------- renaming

std::string rename_hints(std::string_view source, const HintLexicon& lexicon,
                         const std::map<std::string, std::string>& fixed) {
    const auto toks = java::lex(source);
    const auto exempt = declaration_mask(toks);

    std::map<std::string, std::string, std::less<>> renamed;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i].kind != TokenKind::identifier || exempt[i]) continue;
        const std::string name(toks[i].text);
        if (renamed.count(name)) continue;
        auto f = fixed.find(name);
        renamed.emplace(name, f != fixed.end() ? f->second : lexicon.apply(name));
    }

    // Java keeps methods apart from variables and types, so a method renamed
    // onto a local's name ("good" -> "process" next to "Process process") is
    // legal. Names collide only when they share a role.
    enum : unsigned { as_method = 1, as_value = 2 };
    std::map<std::string, unsigned, std::less<>> roles;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i].kind != TokenKind::identifier || exempt[i]) continue;
        std::size_t j = i + 1;
        while (j < toks.size() && java::is_trivia(toks[j].kind)) ++j;
        const bool call = j < toks.size() && toks[j].kind == TokenKind::punct && toks[j].text == "(";
        roles[std::string(toks[i].text)] |= call ? as_method : as_value;
    }
    std::map<std::string, std::vector<std::string>> owners;
    for (const auto& [old_name, new_name] : renamed) {
        auto& prior = owners[new_name];
        for (const auto& other : prior) {
            if (roles[other] & roles[old_name]) {
                throw RenameError("rename collision: '" + other + "' and '" + old_name + "' both become '" +
                                  new_name + "'");
            }
        }
        prior.push_back(old_name);
    }

    std::string out;
    out.reserve(source.size());
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i].kind == TokenKind::identifier && !exempt[i]) {
            out += renamed.find(toks[i].text)->second;
        } else {
            out.append(toks[i].text);
        }
    }
    return out;
}

std::vector<std::string> hint_leaks(std::string_view source, bool include_package) {
    const auto toks = java::lex(source);
    const auto exempt = declaration_mask(toks);
    std::set<std::string> found;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (toks[i].kind != TokenKind::identifier || (exempt[i] && !include_package)) continue;
        const std::string name(toks[i].text);
        if (std::regex_search(name, leak_pattern())) found.insert(name);
    }
    return {found.begin(), found.end()};
}

// ---------------------------------------------------------------- splitting

bool is_multi_file_name(std::string_view stem) {
    static const std::regex re(R"(_[0-9]+[a-z]$|_(base|bad|good[A-Za-z0-9]*|helper)$)");
    return std::regex_search(stem.begin(), stem.end(), re);
}

std::optional<CweId> cwe_from_file_name(std::string_view file_name) {
    static const std::regex re(R"(^CWE([1-9][0-9]*)_)");
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_search(file_name.begin(), file_name.end(), m, re)) return std::nullopt;
    return CweId::parse(m[1].str());
}

SplitCase split_case(std::string_view file_name, std::string_view source) {
    std::string stem(file_name);
    if (auto slash = stem.find_last_of("/\\"); slash != std::string::npos) stem.erase(0, slash + 1);
    if (auto dot = stem.rfind('.'); dot != std::string::npos) stem.erase(dot);

    const auto cwe = cwe_from_file_name(stem);
    if (!cwe) throw FilteredCase(stem + ": file name carries no CWE number");
    if (is_multi_file_name(stem)) throw FilteredCase(stem + ": case spans multiple files");

    const auto toks = java::lex(source);

    // Locate the first top-level type declaration and its body.
    std::size_t body_open = toks.size();
    std::string class_name;
    int depth = 0;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (is_punct(toks[i], '{')) {
            if (depth == 0 && !class_name.empty()) {
                body_open = i;
                break;
            }
            ++depth;
        } else if (is_punct(toks[i], '}')) {
            --depth;
        } else if (depth == 0 && class_name.empty() && toks[i].kind == TokenKind::keyword &&
                   (toks[i].text == "class" || toks[i].text == "interface" || toks[i].text == "enum")) {
            for (std::size_t k = i + 1; k < toks.size(); ++k) {
                if (toks[k].kind == TokenKind::identifier) {
                    class_name = std::string(toks[k].text);
                    break;
                }
                if (!java::is_trivia(toks[k].kind)) break;
            }
        }
    }
    if (body_open == toks.size()) throw FilteredCase(stem + ": no top-level class found");

    struct Member {
        std::size_t begin, end; ///< byte range
        std::string name;
    };
    std::vector<Member> members;
    std::size_t body_close = toks.size();
    {
        int d = 0, paren = 0;
        bool assign = false, annotation_args = false, last_is_annotation = false;
        std::string last_ident, name;
        std::size_t member_begin = toks[body_open].offset + 1;
        auto finish = [&](std::size_t tok) {
            members.push_back({member_begin, toks[tok].offset + 1, name});
            member_begin = toks[tok].offset + 1;
            d = paren = 0;
            assign = annotation_args = last_is_annotation = false;
            last_ident.clear();
            name.clear();
        };
        for (std::size_t i = body_open + 1; i < toks.size(); ++i) {
            const auto& t = toks[i];
            if (java::is_trivia(t.kind)) continue;
            const bool top = d == 0 && paren == 0;
            if (t.kind == TokenKind::identifier && top) {
                last_is_annotation = i > 0 && [&] {
                    for (std::size_t k = i; k-- > body_open;) {
                        if (java::is_trivia(toks[k].kind)) continue;
                        return is_punct(toks[k], '@');
                    }
                    return false;
                }();
                last_ident = std::string(t.text);
                continue;
            }
            if (t.kind != TokenKind::punct) continue;
            const char c = t.text[0];
            if (c == '(' && d == 0) {
                if (paren == 0 && last_is_annotation) annotation_args = true;
                else if (paren == 0 && name.empty() && !assign) name = last_ident;
                ++paren;
            } else if (c == ')' && d == 0) {
                if (--paren == 0 && annotation_args) {
                    annotation_args = false;
                    last_is_annotation = false;
                }
            } else if (c == '=' && top) {
                if (name.empty()) name = last_ident;
                assign = true;
            } else if (c == ';' && top) {
                if (name.empty()) name = last_ident;
                finish(i);
            } else if (c == '{' && paren == 0) {
                if (d == 0 && name.empty() && !assign) name = last_ident;
                ++d;
            } else if (c == '}' && paren == 0) {
                if (d == 0) {
                    body_close = i;
                    break;
                }
                if (--d == 0 && !assign) finish(i);
            }
        }
    }
    if (body_close == toks.size()) throw FilteredCase(stem + ": unbalanced class body");

    std::string prefix(source.substr(0, toks[body_open].offset + 1));
    const std::size_t tail_from = members.empty() ? toks[body_open].offset + 1 : members.back().end;
    std::string suffix(source.substr(tail_from));

    std::string vuln = prefix, clean = prefix;
    bool any_bad = false, any_good = false;
    for (const Member& m : members) {
        const std::string text(source.substr(m.begin, m.end - m.begin));
        const std::string key = lower(m.name);
        if (key.rfind("bad", 0) == 0) {
            vuln += text;
            any_bad = true;
        } else if (key.rfind("good", 0) == 0) {
            clean += text;
            any_good = true;
        } else {
            vuln += text;
            clean += text;
        }
    }
    if (!any_bad) throw FilteredCase(stem + ": no bad* member");
    if (!any_good) throw FilteredCase(stem + ": only vulnerable code, no good* member");
    vuln += suffix;
    clean += suffix;
    return {class_name, *cwe, std::move(vuln), std::move(clean)};
}

// ---------------------------------------------------------------- selection

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    if (bound == 0) throw Error("uniform_below: bound must be positive");
    // Reject the lowest (2^64 mod bound) outputs so every residue is equally likely.
    const std::uint64_t threshold = (0 - bound) % bound;
    while (true) {
        const std::uint64_t x = rng();
        if (x >= threshold) return x % bound;
    }
}

CorpusManifest select_subset(const CorpusManifest& manifest, std::uint32_t per_cwe, std::uint64_t seed) {
    CorpusManifest out;
    out.seed = seed;
    out.per_cwe = per_cwe;
    if (per_cwe == 0) return out;

    std::map<CweId, std::pair<std::vector<const ManifestEntry*>, std::vector<const ManifestEntry*>>> groups;
    for (const auto& e : manifest.cases) {
        auto& g = groups[e.expected_cwe];
        (e.vulnerable ? g.first : g.second).push_back(&e);
    }

    std::mt19937_64 rng(seed);
    for (auto& [cwe, g] : groups) {
        for (auto* pool : {&g.first, &g.second}) {
            if (pool->size() < per_cwe) {
                throw SelectionError("select_subset: " + cwe.str() + " has only " + std::to_string(pool->size()) +
                                     (pool == &g.first ? " vulnerable" : " clean") + " cases, need " +
                                     std::to_string(per_cwe));
            }
            std::sort(pool->begin(), pool->end(), [](auto* a, auto* b) { return a->case_id < b->case_id; });
            for (std::size_t k = 0; k < per_cwe; ++k) {
                const std::size_t j = k + uniform_below(rng, pool->size() - k);
                std::swap((*pool)[k], (*pool)[j]);
                out.cases.push_back(*(*pool)[k]);
            }
        }
    }
    std::sort(out.cases.begin(), out.cases.end(), [](const auto& a, const auto& b) { return a.case_id < b.case_id; });
    return out;
}

// ---------------------------------------------------------------- manifest

std::map<CweId, std::pair<std::size_t, std::size_t>> CorpusManifest::counts() const {
    std::map<CweId, std::pair<std::size_t, std::size_t>> out;
    for (const auto& e : cases) {
        auto& c = out[e.expected_cwe];
        ++(e.vulnerable ? c.first : c.second);
    }
    return out;
}

const ManifestEntry* CorpusManifest::find(std::string_view case_id) const {
    auto it = std::lower_bound(cases.begin(), cases.end(), case_id,
                               [](const ManifestEntry& e, std::string_view id) { return e.case_id < id; });
    if (it != cases.end() && it->case_id == case_id) return &*it;
    for (const auto& e : cases) {
        if (e.case_id == case_id) return &e;
    }
    return nullptr;
}

std::string CorpusManifest::to_jsonl() const {
    std::string out = json{{"kind", "manifest"}, {"schema_version", 1}, {"seed", seed}, {"per_cwe", per_cwe}}.dump();
    out += '\n';
    for (const auto& e : cases) {
        out += json{{"case_id", e.case_id},
                    {"cwe", e.expected_cwe.str()},
                    {"vulnerable", e.vulnerable},
                    {"path", e.path},
                    {"digest", e.digest}}
                   .dump();
        out += '\n';
    }
    return out;
}

CorpusManifest CorpusManifest::from_jsonl(std::string_view text) {
    CorpusManifest m;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t row = 0;
    bool header = false;
    std::set<std::string> ids;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        try {
            const json j = json::parse(line);
            if (!header) {
                if (j.value("kind", "") != "manifest") throw ParseError("manifest: missing header line", row);
                if (j.value("schema_version", 0) != 1) throw ParseError("manifest: unsupported schema version", row);
                m.seed = j.at("seed").get<std::uint64_t>();
                m.per_cwe = j.at("per_cwe").get<std::uint32_t>();
                header = true;
                continue;
            }
            ManifestEntry e;
            e.case_id = j.at("case_id").get<std::string>();
            const auto cwe = CweId::parse(j.at("cwe").get<std::string>());
            if (!cwe) throw ParseError("manifest: bad cwe field", row);
            e.expected_cwe = *cwe;
            e.vulnerable = j.at("vulnerable").get<bool>();
            e.path = j.at("path").get<std::string>();
            e.digest = j.at("digest").get<std::string>();
            if (!ids.insert(e.case_id).second) throw ParseError("manifest: duplicate case_id " + e.case_id, row);
            m.cases.push_back(std::move(e));
        } catch (const json::exception& ex) {
            throw ParseError(std::string("manifest: ") + ex.what(), row);
        }
    }
    if (!header) throw ParseError("manifest: empty file", 0);
    std::sort(m.cases.begin(), m.cases.end(), [](const auto& a, const auto& b) { return a.case_id < b.case_id; });
    return m;
}

std::string CorpusManifest::digest() const { return sha256_hex(to_jsonl()); }

CorpusManifest load_manifest(const std::filesystem::path& path) { return CorpusManifest::from_jsonl(read_file(path)); }

void save_manifest(const CorpusManifest& m, const std::filesystem::path& path) { write_file(path, m.to_jsonl()); }

// ---------------------------------------------------------------- LLM input

std::string prepare_for_llm(std::string_view source, std::string_view package_override) {
    const auto toks = java::lex(source);
    const std::string decl = package_override.empty() ? "" : "package " + std::string(package_override) + ";";

    std::string out;
    out.reserve(source.size());
    std::size_t i = 0;
    std::size_t first = 0;
    while (first < toks.size() && java::is_trivia(toks[first].kind)) ++first;
    if (first < toks.size() && toks[first].kind == TokenKind::keyword && toks[first].text == "package") {
        for (; i < first; ++i) out.append(toks[i].text);
        std::size_t semi = first;
        while (semi < toks.size() && !is_punct(toks[semi], ';')) ++semi;
        out += decl;
        i = semi < toks.size() ? semi + 1 : semi;
        if (decl.empty() && i < toks.size() && toks[i].kind == TokenKind::whitespace) ++i;
    } else if (!decl.empty()) {
        out += decl;
        out += '\n';
    }
    for (; i < toks.size(); ++i) out.append(toks[i].text);

    // Second pass over the rebuilt text: drop blanks that open a line, except
    // inside text blocks and comments where they are content.
    const auto toks2 = java::lex(out);
    std::string result;
    result.reserve(out.size());
    bool at_line_start = true;
    for (const auto& t : toks2) {
        if (t.kind == TokenKind::whitespace) {
            for (char c : t.text) {
                if (c == '\n' || c == '\r') {
                    result += c;
                    at_line_start = true;
                } else if (!at_line_start) {
                    result += c;
                }
            }
            continue;
        }
        result.append(t.text);
        const auto nl = t.text.find_last_of('\n');
        at_line_start = false;
        if (nl != std::string_view::npos && nl + 1 == t.text.size()) at_line_start = true;
    }
    return result;
}

// ---------------------------------------------------------------- pipeline

PrepReport prepare_corpus(const std::filesystem::path& raw_root, const std::filesystem::path& out_root,
                          const PrepOptions& options) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(raw_root)) throw ConfigError("corpus directory not found: " + raw_root.string());

    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(raw_root)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".java") continue;
        if (!cwe_from_file_name(entry.path().filename().string())) continue;
        files.push_back(fs::relative(entry.path(), raw_root));
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.generic_string() < b.generic_string(); });

    PrepReport report;
    struct Pending {
        std::string dir;
        SplitCase split;
    };
    std::vector<Pending> pending;
    for (const auto& rel : files) {
        const std::string stem = rel.stem().string();
        try {
            if (is_multi_file_name(stem)) throw FilteredCase(stem + ": case spans multiple files");
            const std::string text = strip_comments(read_file(raw_root / rel));
            SplitCase split = split_case(rel.filename().string(), text);
            const std::map<std::string, std::string> probe{{split.class_name, "J00000"}};
            (void)rename_hints(split.vulnerable_source, options.lexicon, probe);
            (void)rename_hints(split.clean_source, options.lexicon, probe);
            pending.push_back({rel.parent_path().generic_string(), std::move(split)});
        } catch (const Error& e) {
            report.excluded.push_back({rel.generic_string(), e.what()});
            log::info(std::string("prep: excluded ") + e.what());
        }
    }

    // Each retained case yields two files; ids come from a seeded shuffle so
    // they carry no trace of the original ordering or label.
    std::vector<std::pair<std::size_t, bool>> halves;
    for (std::size_t k = 0; k < pending.size(); ++k) {
        halves.emplace_back(k, true);
        halves.emplace_back(k, false);
    }
    std::mt19937_64 rng(options.seed);
    for (std::size_t n = halves.size(); n > 1; --n) {
        std::swap(halves[n - 1], halves[uniform_below(rng, n)]);
    }

    report.all.seed = options.seed;
    for (std::size_t pos = 0; pos < halves.size(); ++pos) {
        const auto [k, vulnerable] = halves[pos];
        const Pending& p = pending[k];
        const std::string id = "J" + std::to_string(10000 + pos);
        const std::string text = rename_hints(vulnerable ? p.split.vulnerable_source : p.split.clean_source,
                                              options.lexicon, {{p.split.class_name, id}});
        const std::string rel = (p.dir.empty() ? "" : p.dir + "/") + id + ".java";
        write_file(out_root / rel, text);
        report.all.cases.push_back({id, p.split.cwe, vulnerable, rel, sha256_hex(text)});
    }
    std::sort(report.all.cases.begin(), report.all.cases.end(),
              [](const auto& a, const auto& b) { return a.case_id < b.case_id; });

    report.selected = options.per_cwe ? select_subset(report.all, *options.per_cwe, options.seed) : report.all;
    save_manifest(report.all, out_root / "all_cases.jsonl");
    save_manifest(report.selected, out_root / "manifest.jsonl");
    return report;
}

TestCase load_case(const std::filesystem::path& corpus_root, const ManifestEntry& entry) {
    return {entry.case_id, entry.expected_cwe, entry.vulnerable, entry.path, read_file(corpus_root / entry.path)};
}

} // namespace llmsast
