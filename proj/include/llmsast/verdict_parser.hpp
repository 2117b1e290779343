#pragma once

#include "llmsast/cwe_id.hpp"

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace llmsast {

enum class Decision { no, yes };

std::string_view to_string(Decision d);

/// One parsed verdict line ("vulnerability: YES | vulnerability type: CWE-78 | ...").
struct Verdict {
    Decision present = Decision::no;
    std::optional<CweId> cwe;
    std::optional<std::string> name;
    std::optional<std::string> explanation;
    std::string raw_decision_token; ///< as it appears in the response
    bool malformed = false;         ///< YES without a recognizable CWE

    bool operator==(const Verdict&) const = default;
};

struct ParseDiagnostic {
    std::size_t line = 0; ///< 1-based; 0 for response-wide findings
    std::string reason;

    bool operator==(const ParseDiagnostic&) const = default;
};

struct ParsedResponse {
    std::vector<Verdict> verdicts;
    std::vector<ParseDiagnostic> diagnostics;
    /// Set when a human should look: malformed or non-standard decisions, or a
    /// "yes" that did not sit in a verdict line.
    bool low_confidence = false;
};

/// Total: any text yields a (possibly empty) verdict list, never an exception.
ParsedResponse parse_verdicts(std::string_view response);

/// "CWE-89", "CWE_89", "cwe 89", "**CWE-089**" -> CWE-89. A bare number is
/// accepted only with `allow_bare`, i.e. when it sits in a CWE-typed field.
std::optional<CweId> normalize_cwe_token(std::string_view token, bool allow_bare = false);

/// YES, Y and TRUE (any case, edge decoration ignored) are yes; everything else,
/// including MAYBE and POSSIBLE, is no. `recognized` is cleared for tokens
/// outside the YES/NO families.
Decision normalize_decision(std::string_view token, bool* recognized = nullptr);

/// CWEs with at least one yes verdict. A yes and a no for the same CWE count
/// as yes; both stay in the verdict list for audit.
std::set<CweId> positive_cwes(const std::vector<Verdict>& verdicts);

} // namespace llmsast
