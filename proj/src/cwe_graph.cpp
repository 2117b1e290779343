#include "llmsast/cwe_graph.hpp"

#include "llmsast/csv.hpp"
#include "llmsast/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace llmsast {
namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

CweId parse_id_field(std::string_view text, std::size_t row, std::string_view column) {
    if (auto id = CweId::parse(trim(text))) return *id;
    throw ParseError("cwe import: bad " + std::string(column) + " '" + std::string(text) + "'", row);
}

void collect_descendants(const std::map<CweId, CweNode>& nodes, CweId from, std::set<CweId>& out) {
    std::vector<CweId> stack{from};
    while (!stack.empty()) {
        const CweId cur = stack.back();
        stack.pop_back();
        for (CweId child : nodes.at(cur).children) {
            if (out.insert(child).second) stack.push_back(child);
        }
    }
}

} // namespace

std::string_view to_string(Abstraction a) {
    switch (a) {
    case Abstraction::pillar: return "pillar";
    case Abstraction::class_: return "class";
    case Abstraction::base: return "base";
    case Abstraction::variant: return "variant";
    case Abstraction::compound: return "compound";
    }
    return "base";
}

std::optional<Abstraction> parse_abstraction(std::string_view text) {
    const std::string t = lower(trim(text));
    if (t == "pillar") return Abstraction::pillar;
    if (t == "class") return Abstraction::class_;
    if (t == "base") return Abstraction::base;
    if (t == "variant") return Abstraction::variant;
    if (t == "compound") return Abstraction::compound;
    return std::nullopt;
}

CweGraph CweGraph::from_rows(const std::vector<CweRow>& rows) {
    CweGraph g;
    for (const CweRow& r : rows) {
        if (r.id.number == 0) throw IntegrityError("cwe graph: invalid id CWE-0");
        auto [it, inserted] = g.nodes_.emplace(r.id, CweNode{r.id, r.name, r.abstraction, {}, {}});
        if (!inserted) throw IntegrityError("cwe graph: duplicate node " + r.id.str());
        it->second.parents.insert(r.parents.begin(), r.parents.end());
    }
    for (auto& [id, node] : g.nodes_) {
        if (node.parents.count(id)) throw IntegrityError("cwe graph: cycle through " + id.str());
        if (node.abstraction == Abstraction::pillar && !node.parents.empty()) {
            throw IntegrityError("cwe graph: pillar " + id.str() + " has a parent in the research view");
        }
        for (CweId p : node.parents) {
            auto parent = g.nodes_.find(p);
            if (parent == g.nodes_.end()) {
                throw IntegrityError("cwe graph: " + id.str() + " references missing parent " + p.str());
            }
            parent->second.children.insert(id);
        }
    }

    // Iterative three-colour DFS along parent edges.
    enum class Mark { white, grey, black };
    std::map<CweId, Mark> mark;
    for (const auto& [id, _] : g.nodes_) mark[id] = Mark::white;
    for (const auto& [root, _] : g.nodes_) {
        if (mark[root] != Mark::white) continue;
        std::vector<std::pair<CweId, std::set<CweId>::const_iterator>> stack;
        mark[root] = Mark::grey;
        stack.emplace_back(root, g.nodes_.at(root).parents.begin());
        while (!stack.empty()) {
            auto& [cur, it] = stack.back();
            if (it == g.nodes_.at(cur).parents.end()) {
                mark[cur] = Mark::black;
                stack.pop_back();
                continue;
            }
            const CweId next = *it++;
            if (mark[next] == Mark::grey) throw IntegrityError("cwe graph: cycle through " + next.str());
            if (mark[next] == Mark::white) {
                mark[next] = Mark::grey;
                stack.emplace_back(next, g.nodes_.at(next).parents.begin());
            }
        }
    }
    return g;
}

const CweNode* CweGraph::find(CweId id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
}

std::set<CweId> CweGraph::acceptable_set(CweId expected, const MatchPolicy& policy) const {
    const CweNode* node = find(expected);
    if (!node) throw LookupError("cwe graph: unknown CWE " + expected.str());

    std::set<CweId> out{expected};
    if (policy.accept_parent) {
        std::set<CweId> seen;
        std::vector<CweId> frontier(node->parents.begin(), node->parents.end());
        while (!frontier.empty()) {
            const CweId p = frontier.back();
            frontier.pop_back();
            if (!seen.insert(p).second) continue;
            const CweNode& pn = nodes_.at(p);
            if (!(policy.exclude_pillar_parent && pn.abstraction == Abstraction::pillar)) out.insert(p);
            if (policy.transitive_parents) frontier.insert(frontier.end(), pn.parents.begin(), pn.parents.end());
        }
    }
    if (policy.accept_children) {
        if (policy.transitive_children) {
            collect_descendants(nodes_, expected, out);
        } else {
            out.insert(node->children.begin(), node->children.end());
        }
    }
    return out;
}

namespace {

/// True when `ancestor` is reachable from `from` by ChildOf edges.
bool reaches_upward(const std::map<CweId, CweNode>& nodes, CweId from, CweId ancestor) {
    std::set<CweId> seen;
    std::vector<CweId> stack{from};
    while (!stack.empty()) {
        const CweId c = stack.back();
        stack.pop_back();
        for (CweId p : nodes.at(c).parents) {
            if (p == ancestor) return true;
            if (seen.insert(p).second) stack.push_back(p);
        }
    }
    return false;
}

} // namespace

// Walks upward from the two endpoints rather than materializing the
// acceptable set, so the two functions can be checked against each other.
bool CweGraph::matches(CweId expected, CweId reported, const MatchPolicy& policy) const {
    const CweNode* e = find(expected);
    if (!e) throw LookupError("cwe graph: unknown CWE " + expected.str());
    const CweNode* r = find(reported);
    if (!r) return false;
    if (expected == reported) return true;
    if (policy.accept_children) {
        const bool child = policy.transitive_children ? reaches_upward(nodes_, reported, expected)
                                                      : r->parents.count(expected) != 0;
        if (child) return true;
    }
    if (policy.accept_parent && !(policy.exclude_pillar_parent && r->abstraction == Abstraction::pillar)) {
        return policy.transitive_parents ? reaches_upward(nodes_, expected, reported)
                                         : e->parents.count(reported) != 0;
    }
    return false;
}

CweGraph import_research_view(std::string_view csv_text) {
    const auto rows = csv::parse(csv_text);
    if (rows.empty()) return {};

    const auto& header = rows.front().fields;
    const std::vector<std::string> expected{"id", "name", "abstraction", "parent_ids"};
    if (header.size() != expected.size() ||
        !std::equal(header.begin(), header.end(), expected.begin(),
                    [](const std::string& a, const std::string& b) { return lower(trim(a)) == b; })) {
        throw ParseError("cwe import: header must be id,name,abstraction,parent_ids", 1);
    }

    std::vector<CweRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& f = rows[i].fields;
        const std::size_t row = rows[i].record;
        if (f.size() != 4) {
            throw ParseError("cwe import: expected 4 columns, got " + std::to_string(f.size()), row);
        }
        CweRow r;
        r.id = parse_id_field(f[0], row, "id");
        r.name = std::string(trim(f[1]));
        auto abs = parse_abstraction(f[2]);
        if (!abs) throw ParseError("cwe import: unknown abstraction '" + f[2] + "'", row);
        r.abstraction = *abs;
        std::string_view rest = f[3];
        while (!rest.empty()) {
            const auto semi = rest.find(';');
            const std::string_view part = trim(rest.substr(0, semi));
            if (!part.empty()) r.parents.push_back(parse_id_field(part, row, "parent id"));
            if (semi == std::string_view::npos) break;
            rest.remove_prefix(semi + 1);
        }
        out.push_back(std::move(r));
    }
    return CweGraph::from_rows(out);
}

CweGraph import_mitre_export(std::string_view csv_text) {
    const auto rows = csv::parse(csv_text);
    if (rows.empty()) return {};

    const auto& header = rows.front().fields;
    auto column = [&](std::string_view name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (lower(trim(header[i])) == lower(name)) return i;
        }
        throw ParseError("cwe import: MITRE export lacks column '" + std::string(name) + "'", 1);
    };
    const std::size_t c_id = column("CWE-ID");
    const std::size_t c_name = column("Name");
    const std::size_t c_abs = column("Weakness Abstraction");
    const std::size_t c_rel = column("Related Weaknesses");
    const std::size_t needed = std::max({c_id, c_name, c_abs, c_rel}) + 1;

    std::vector<CweRow> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& f = rows[i].fields;
        const std::size_t row = rows[i].record;
        if (f.size() < needed) {
            throw ParseError("cwe import: expected at least " + std::to_string(needed) + " columns", row);
        }
        CweRow r;
        r.id = parse_id_field(f[c_id], row, "CWE-ID");
        r.name = std::string(trim(f[c_name]));
        auto abs = parse_abstraction(f[c_abs]);
        if (!abs) throw ParseError("cwe import: unknown abstraction '" + f[c_abs] + "'", row);
        r.abstraction = *abs;

        // Entries look like ::NATURE:ChildOf:CWE ID:74:VIEW ID:1000:ORDINAL:Primary::
        std::string_view rel = f[c_rel];
        std::size_t pos = 0;
        while ((pos = rel.find("NATURE:", pos)) != std::string_view::npos) {
            const std::size_t end = rel.find("::", pos);
            const std::string_view entry = rel.substr(pos, end == std::string_view::npos ? rel.npos : end - pos);
            pos = end == std::string_view::npos ? rel.size() : end;

            std::vector<std::string_view> parts;
            std::size_t start = 0;
            while (true) {
                const auto colon = entry.find(':', start);
                parts.push_back(entry.substr(start, colon == std::string_view::npos ? entry.npos : colon - start));
                if (colon == std::string_view::npos) break;
                start = colon + 1;
            }
            std::string_view nature, target, view;
            for (std::size_t k = 0; k + 1 < parts.size(); k += 2) {
                if (parts[k] == "NATURE") nature = parts[k + 1];
                else if (parts[k] == "CWE ID") target = parts[k + 1];
                else if (parts[k] == "VIEW ID") view = parts[k + 1];
            }
            if (nature == "ChildOf" && view == "1000") {
                r.parents.push_back(parse_id_field(target, row, "related CWE id"));
            }
        }
        out.push_back(std::move(r));
    }
    return CweGraph::from_rows(out);
}

CweGraph load_cwe_graph(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open CWE table " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    const std::string first_line = lower(text.substr(0, text.find('\n')));
    if (first_line.find("cwe-id") != std::string::npos) return import_mitre_export(text);
    return import_research_view(text);
}

} // namespace llmsast
