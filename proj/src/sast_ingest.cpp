#include "llmsast/sast_ingest.hpp"

#include "llmsast/csv.hpp"
#include "llmsast/error.hpp"
#include "llmsast/io.hpp"
#include "llmsast/log.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <regex>

namespace llmsast {
namespace {

int parse_int(const std::string& s, std::size_t row, std::string_view column) {
    int v = 0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || p != end) {
        throw ParseError("codeql csv: column '" + std::string(column) + "' is not a number: '" + s + "'", row);
    }
    return v;
}

std::string trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

std::string file_stem(std::string_view path) {
    auto slash = path.find_last_of("/\\");
    if (slash != std::string_view::npos) path.remove_prefix(slash + 1);
    auto dot = path.rfind('.');
    return std::string(path.substr(0, dot));
}

std::string normalize_path(std::string_view path) {
    std::string p(path);
    std::replace(p.begin(), p.end(), '\\', '/');
    while (!p.empty() && p.front() == '/') p.erase(0, 1);
    return p;
}

} // namespace

std::string_view to_string(SastTool t) { return t == SastTool::codeql ? "codeql" : "spotbugs"; }

std::vector<SastFinding> parse_codeql_csv(std::string_view report) {
    std::vector<SastFinding> out;
    for (const auto& row : csv::parse(report)) {
        const auto& f = row.fields;
        if (f.size() != 9) {
            throw ParseError("codeql csv: expected 9 columns, got " + std::to_string(f.size()), row.record);
        }
        SastFinding x;
        x.tool = SastTool::codeql;
        x.rule = f[0];
        x.description = f[1];
        x.severity = f[2];
        x.message = f[3];
        x.path = f[4];
        x.start_line = parse_int(f[5], row.record, "start line");
        x.start_column = parse_int(f[6], row.record, "start column");
        x.end_line = parse_int(f[7], row.record, "end line");
        x.end_column = parse_int(f[8], row.record, "end column");
        if (x.start_line < 1) throw ParseError("codeql csv: start line must be >= 1", row.record);
        out.push_back(std::move(x));
    }
    return out;
}

std::string render_codeql_csv_row(const SastFinding& f) {
    return csv::join_quoted({f.rule, f.description, f.severity, f.message, f.path, std::to_string(f.start_line),
                             std::to_string(f.start_column), std::to_string(f.end_line),
                             std::to_string(f.end_column)});
}

SpotbugsReport parse_spotbugs_text(std::string_view report) {
    static const std::regex line_re(R"(^\s*([A-Z])\s+([A-Z])\s+([A-Za-z0-9_]+):\s*(.*)$)");
    static const std::regex loc_re(R"(^([^\s:]+):\[lines?\s+([0-9]+)(?:-([0-9]+))?\]\s*$)");

    SpotbugsReport out;
    std::size_t line_no = 0;
    for (std::size_t start = 0; start <= report.size();) {
        const auto nl = report.find('\n', start);
        std::string line(report.substr(start, nl == std::string_view::npos ? report.npos : nl - start));
        start = nl == std::string_view::npos ? report.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;

        std::smatch m;
        const auto at = line.rfind(" At ");
        std::smatch loc;
        std::string tail = at == std::string::npos ? "" : line.substr(at + 4);
        if (at == std::string::npos || !std::regex_match(line.cbegin(), line.cbegin() + static_cast<long>(at), m, line_re) ||
            !std::regex_match(tail, loc, loc_re)) {
            out.diagnostics.push_back("spotbugs line " + std::to_string(line_no) + ": unrecognized, skipped");
            continue;
        }
        SastFinding x;
        x.tool = SastTool::spotbugs;
        x.severity = m[1];
        x.category = m[2];
        x.rule = m[3];
        x.message = trim(m[4].str());
        x.path = loc[1];
        x.start_line = std::stoi(loc[2]);
        x.end_line = loc[3].matched ? std::stoi(loc[3]) : x.start_line;
        if (x.start_line < 1) {
            out.diagnostics.push_back("spotbugs line " + std::to_string(line_no) + ": line number < 1, skipped");
            continue;
        }
        out.findings.push_back(std::move(x));
    }
    for (const auto& d : out.diagnostics) log::warn(d);
    return out;
}

RuleCweMap RuleCweMap::parse(std::string_view csv_text) {
    RuleCweMap map;
    const auto rows = csv::parse(csv_text);
    if (rows.empty()) return map;
    const auto& h = rows.front().fields;
    if (h.size() != 4 || trim(h[0]) != "tool" || trim(h[1]) != "rule" || trim(h[2]) != "cwe_list" ||
        trim(h[3]) != "provenance") {
        throw ParseError("rule map: header must be tool,rule,cwe_list,provenance", 1);
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& f = rows[i].fields;
        const std::size_t row = rows[i].record;
        if (f.size() != 4) throw ParseError("rule map: expected 4 columns", row);
        SastTool tool;
        if (trim(f[0]) == "codeql") tool = SastTool::codeql;
        else if (trim(f[0]) == "spotbugs") tool = SastTool::spotbugs;
        else throw ParseError("rule map: unknown tool '" + f[0] + "'", row);
        Entry e;
        std::string_view rest = f[2];
        while (true) {
            const auto semi = rest.find(';');
            const std::string part = trim(rest.substr(0, semi));
            if (!part.empty()) {
                auto id = CweId::parse(part);
                if (!id) throw ParseError("rule map: bad CWE '" + part + "'", row);
                e.cwes.insert(*id);
            }
            if (semi == std::string_view::npos) break;
            rest.remove_prefix(semi + 1);
        }
        if (e.cwes.empty()) throw ParseError("rule map: empty cwe_list for rule '" + f[1] + "'", row);
        e.provenance = trim(f[3]);
        if (map.find(tool, f[1])) throw ParseError("rule map: duplicate rule '" + f[1] + "'", row);
        map.add(tool, f[1], std::move(e));
    }
    return map;
}

RuleCweMap RuleCweMap::load(const std::filesystem::path& path) { return parse(read_file(path)); }

void RuleCweMap::add(SastTool tool, std::string rule, Entry entry) {
    if (entry.cwes.empty()) throw ConfigError("rule map: entry for '" + rule + "' has no CWE");
    entries_[{tool, std::move(rule)}] = std::move(entry);
}

const RuleCweMap::Entry* RuleCweMap::find(SastTool tool, std::string_view rule) const {
    auto it = entries_.find(std::pair<SastTool, std::string>(tool, std::string(rule)));
    return it == entries_.end() ? nullptr : &it->second;
}

std::set<CweId> RuleCweMap::all_cwes(SastTool tool) const {
    std::set<CweId> out;
    for (const auto& [key, e] : entries_) {
        if (key.first == tool) out.insert(e.cwes.begin(), e.cwes.end());
    }
    return out;
}

MappingResult map_findings(std::vector<SastFinding> findings, const RuleCweMap& rule_map,
                           const CorpusManifest& manifest) {
    MappingResult out;
    std::map<std::string, std::string> by_path;
    for (const auto& e : manifest.cases) by_path[normalize_path(e.path)] = e.case_id;

    for (auto& f : findings) {
        std::string case_id;
        const std::string stem = file_stem(f.path);
        if (manifest.find(stem)) {
            case_id = stem;
        } else {
            const std::string p = normalize_path(f.path);
            for (const auto& [mp, id] : by_path) {
                if (p == mp || (p.size() > mp.size() && p.compare(p.size() - mp.size(), mp.size(), mp) == 0 &&
                                p[p.size() - mp.size() - 1] == '/')) {
                    case_id = id;
                    break;
                }
            }
        }
        if (case_id.empty()) {
            ++out.orphans;
            out.diagnostics.push_back("orphan finding: " + f.path + " is not in the manifest");
            continue;
        }
        const auto* entry = rule_map.find(f.tool, f.rule);
        if (!entry) {
            ++out.unmapped;
            out.diagnostics.push_back("unmapped " + std::string(to_string(f.tool)) + " rule '" + f.rule + "' on " +
                                      case_id);
            continue;
        }
        f.cwe_candidates = entry->cwes;
        out.per_case[case_id].insert(entry->cwes.begin(), entry->cwes.end());
    }
    for (const auto& d : out.diagnostics) log::info(d);
    return out;
}

std::set<CweId> undetectable_cwes(const CorpusManifest& manifest, const RuleCweMap& rule_map, SastTool tool,
                                  const CweGraph& graph, const MatchPolicy& policy) {
    const auto mapped = rule_map.all_cwes(tool);
    std::set<CweId> out;
    for (const auto& [cwe, counts] : manifest.counts()) {
        if (!graph.contains(cwe)) {
            out.insert(cwe);
            continue;
        }
        const auto accept = graph.acceptable_set(cwe, policy);
        const bool reachable = std::any_of(mapped.begin(), mapped.end(), [&](CweId c) { return accept.count(c); });
        if (!reachable) out.insert(cwe);
    }
    return out;
}

} // namespace llmsast
