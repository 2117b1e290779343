#pragma once

#include "llmsast/cwe_graph.hpp"
#include "llmsast/error.hpp"
#include "llmsast/money.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace llmsast {

enum class Outcome { tp, fp, tn, fn };

std::string_view to_string(Outcome o);

/// The label side of a scored case.
struct CaseLabel {
    std::string case_id;
    CweId expected_cwe;
    bool vulnerable = false;
};

struct Classification {
    std::string case_id;
    CweId expected_cwe;
    Outcome outcome = Outcome::tn;
    std::optional<CweId> matched_cwe;
    /// Reported CWEs that do not match the target; ignored for the outcome.
    std::size_t unrelated_reports = 0;

    // Bookkeeping carried into aggregation.
    std::string strategy;
    Money cost;
    std::int64_t wall_time_ms = 0;
};

struct ConfusionMatrix {
    std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;

    std::uint64_t total() const { return tp + fp + tn + fn; }
    void add(Outcome o);
    ConfusionMatrix& operator+=(const ConfusionMatrix& o);
    bool operator==(const ConfusionMatrix&) const = default;
};

struct MetricSet {
    double accuracy = 0, precision = 0, recall = 0, f1 = 0;
    /// A zero denominator forced one of precision, recall or F1 to 0.
    bool degenerate = false;
};

class UndefinedMetricsError : public Error {
public:
    using Error::Error;
};

/// Throws ConfigError when the expected CWE is not in the graph.
Classification classify(const CaseLabel& label, const std::set<CweId>& reported, const CweGraph& graph,
                        const MatchPolicy& policy = {});

/// Throws UndefinedMetricsError for an all-zero matrix.
MetricSet metrics(const ConfusionMatrix& cm);

struct GroupSummary {
    ConfusionMatrix cm;
    Money cost;
    std::int64_t wall_time_ms = 0;
    std::size_t unrelated_reports = 0;
};

enum class GroupBy { overall, per_cwe, per_strategy };

/// "CWE-23" < "CWE-129": digit runs compare by value.
struct NaturalLess {
    bool operator()(const std::string& a, const std::string& b) const;
};

using Grouped = std::map<std::string, GroupSummary, NaturalLess>;

/// Overall uses the single key "overall"; per_cwe keys are "CWE-<n>".
Grouped aggregate(const std::vector<Classification>& items, GroupBy group_by);

struct ReportRow {
    std::string label;
    GroupSummary summary;
};

/// Aligned text table with the columns TP FP TN FN Accuracy Precision Recall
/// F1 Cost Time. Rows whose metrics are degenerate are marked with '*'.
std::string render_text_table(const std::vector<ReportRow>& rows, std::string_view title);
std::string render_csv_table(const std::vector<ReportRow>& rows);

} // namespace llmsast
