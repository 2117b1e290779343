#pragma once

#include "llmsast/cwe_id.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace llmsast {

enum class Abstraction { pillar, class_, base, variant, compound };

std::string_view to_string(Abstraction a);
std::optional<Abstraction> parse_abstraction(std::string_view text);

struct CweNode {
    CweId id;
    std::string name;
    Abstraction abstraction = Abstraction::base;
    std::set<CweId> parents;
    std::set<CweId> children;
};

/// Which relatives of the expected CWE count as a correct classification.
struct MatchPolicy {
    bool accept_parent = true;
    bool accept_children = true;
    bool transitive_children = true;
    bool transitive_parents = false;
    bool exclude_pillar_parent = true;
};

/// One input row of the research view: a weakness and its ChildOf targets.
struct CweRow {
    CweId id;
    std::string name;
    Abstraction abstraction = Abstraction::base;
    std::vector<CweId> parents;
};

/// The CWE-1000 "Research Concepts" hierarchy. Immutable once built.
class CweGraph {
public:
    CweGraph() = default;

    /// Validates the rows: unique ids, resolvable parents, pillars without
    /// parents, no cycles. Throws IntegrityError naming the offending CWE.
    static CweGraph from_rows(const std::vector<CweRow>& rows);

    const CweNode* find(CweId id) const;
    bool contains(CweId id) const { return nodes_.count(id) != 0; }
    std::size_t size() const { return nodes_.size(); }
    const std::map<CweId, CweNode>& nodes() const { return nodes_; }

    /// {expected} plus the accepted parents and children under `policy`.
    /// Throws LookupError when `expected` is not in the graph.
    std::set<CweId> acceptable_set(CweId expected, const MatchPolicy& policy = {}) const;

    /// Total over `reported`: ids absent from the graph never match. Throws
    /// LookupError for an unknown `expected`, like acceptable_set.
    bool matches(CweId expected, CweId reported, const MatchPolicy& policy = {}) const;

private:
    std::map<CweId, CweNode> nodes_;
};

/// Repo-native snapshot: header `id,name,abstraction,parent_ids`, parent ids
/// separated by ';'. Ids may be written as "89" or "CWE-89".
CweGraph import_research_view(std::string_view csv_text);

/// MITRE's CSV export of view 1000 (columns "CWE-ID", "Name",
/// "Weakness Abstraction", "Related Weaknesses"). Only ChildOf relations
/// tagged with VIEW ID 1000 are kept.
CweGraph import_mitre_export(std::string_view csv_text);

/// Reads a file in either format, chosen from its header.
CweGraph load_cwe_graph(const std::filesystem::path& path);

} // namespace llmsast
