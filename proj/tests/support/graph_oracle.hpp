#pragma once

#include "llmsast/cwe_graph.hpp"

#include <random>
#include <set>
#include <vector>

namespace testing {

/// Random CWE-like DAG with up to `max_nodes` nodes. Edges only point to
/// lower indices, so it is acyclic; pillars never get parents.
inline std::vector<llmsast::CweRow> random_graph_rows(std::mt19937_64& rng, std::size_t max_nodes) {
    using llmsast::Abstraction;
    const std::size_t n = 1 + rng() % max_nodes;
    std::vector<llmsast::CweRow> rows;
    for (std::size_t i = 0; i < n; ++i) {
        llmsast::CweRow r;
        r.id = llmsast::CweId(static_cast<std::uint32_t>(1 + i * 7 + rng() % 7));
        r.name = "node" + std::to_string(i);
        const bool pillar = i == 0 || rng() % 6 == 0;
        r.abstraction = pillar ? Abstraction::pillar
                               : static_cast<Abstraction>(1 + rng() % 4); // class_, base, variant, compound
        if (!pillar) {
            const std::size_t k = 1 + rng() % 3;
            for (std::size_t j = 0; j < k; ++j) {
                const auto& p = rows[rng() % rows.size()];
                bool dup = false;
                for (auto x : r.parents) dup |= x == p.id;
                if (!dup) r.parents.push_back(p.id);
            }
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

/// Acceptable set recomputed from a reachability matrix; shares no code with
/// CweGraph.
inline std::set<llmsast::CweId> oracle_acceptable(const std::vector<llmsast::CweRow>& rows, llmsast::CweId expected,
                                                  const llmsast::MatchPolicy& policy) {
    const std::size_t n = rows.size();
    auto index = [&](llmsast::CweId id) {
        for (std::size_t i = 0; i < n; ++i)
            if (rows[i].id == id) return i;
        return n;
    };
    // up[i][j]: j is a direct parent of i; closure by repeated squaring-free Warshall.
    std::vector<std::vector<bool>> direct(n, std::vector<bool>(n)), reach;
    for (std::size_t i = 0; i < n; ++i)
        for (auto p : rows[i].parents) direct[i][index(p)] = true;
    reach = direct;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (reach[i][k])
                for (std::size_t j = 0; j < n; ++j)
                    if (reach[k][j]) reach[i][j] = true;
    const std::size_t e = index(expected);
    std::set<llmsast::CweId> out{expected};
    for (std::size_t j = 0; j < n; ++j) {
        const bool is_parent = policy.transitive_parents ? reach[e][j] : direct[e][j];
        const bool pillar = rows[j].abstraction == llmsast::Abstraction::pillar;
        if (policy.accept_parent && is_parent && !(policy.exclude_pillar_parent && pillar)) out.insert(rows[j].id);
        const bool is_child = policy.transitive_children ? reach[j][e] : direct[j][e];
        if (policy.accept_children && is_child) out.insert(rows[j].id);
    }
    return out;
}

inline llmsast::MatchPolicy policy_from_bits(unsigned bits) {
    llmsast::MatchPolicy p;
    p.accept_parent = bits & 1;
    p.accept_children = bits & 2;
    p.transitive_children = bits & 4;
    p.transitive_parents = bits & 8;
    p.exclude_pillar_parent = bits & 16;
    return p;
}

} // namespace testing
