#pragma once

#include "llmsast/corpus_prep.hpp"
#include "llmsast/cwe_graph.hpp"
#include "llmsast/cwe_id.hpp"

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace llmsast {

enum class SastTool { codeql, spotbugs };

std::string_view to_string(SastTool t);

struct SastFinding {
    SastTool tool = SastTool::codeql;
    std::string rule; ///< CodeQL query name or SpotBugs bug abbreviation
    std::string description;
    std::string severity; ///< CodeQL severity, or SpotBugs priority letter
    std::string category; ///< SpotBugs category letter; empty for CodeQL
    std::string message;
    std::string path;
    int start_line = 1;
    int start_column = 0;
    int end_line = 0;
    int end_column = 0;
    std::set<CweId> cwe_candidates; ///< filled by map_findings' rule lookup

    bool operator==(const SastFinding&) const = default;
};

/// CodeQL CSV export: name, description, severity, message, path, start line,
/// start column, end line, end column. No header row.
/// Throws ParseError with the record index on a wrong column count, a bad
/// number, or an unbalanced quote.
std::vector<SastFinding> parse_codeql_csv(std::string_view report);

/// Inverse of one parse_codeql_csv row (all fields quoted, no newline).
std::string render_codeql_csv_row(const SastFinding& f);

struct SpotbugsReport {
    std::vector<SastFinding> findings;
    std::vector<std::string> diagnostics; ///< one per skipped non-blank line
};

/// Lines shaped "<P> <C> <RULE>: <message>  At <file>:[line <n>]".
SpotbugsReport parse_spotbugs_text(std::string_view report);

class RuleCweMap {
public:
    struct Entry {
        std::set<CweId> cwes;
        std::string provenance;
    };

    /// Columns tool,rule,cwe_list,provenance; cwe_list separated by ';'.
    static RuleCweMap parse(std::string_view csv_text);
    static RuleCweMap load(const std::filesystem::path& path);

    void add(SastTool tool, std::string rule, Entry entry);
    const Entry* find(SastTool tool, std::string_view rule) const;
    std::set<CweId> all_cwes(SastTool tool) const;
    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::pair<SastTool, std::string>, Entry, std::less<>> entries_;
};

struct MappingResult {
    std::map<std::string, std::set<CweId>> per_case; ///< case_id -> reported CWEs
    std::size_t unmapped = 0;                         ///< findings with an unknown rule
    std::size_t orphans = 0;                          ///< findings on files outside the manifest
    std::vector<std::string> diagnostics;
};

/// Resolves each finding's file to a case (file stem equals case_id, else the
/// corpus-relative path) and unions the mapped CWEs per case.
MappingResult map_findings(std::vector<SastFinding> findings, const RuleCweMap& rule_map,
                           const CorpusManifest& manifest);

/// Manifest CWEs that no mapped rule of `tool` can ever match.
std::set<CweId> undetectable_cwes(const CorpusManifest& manifest, const RuleCweMap& rule_map, SastTool tool,
                                  const CweGraph& graph, const MatchPolicy& policy = {});

} // namespace llmsast
