#include "llmsast/evaluator.hpp"

#include "llmsast/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace llmsast {
namespace {

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string seconds(std::int64_t ms) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3fs", static_cast<double>(ms) / 1000.0);
    return buf;
}

} // namespace

std::string_view to_string(Outcome o) {
    switch (o) {
    case Outcome::tp: return "TP";
    case Outcome::fp: return "FP";
    case Outcome::tn: return "TN";
    case Outcome::fn: return "FN";
    }
    return "TN";
}

void ConfusionMatrix::add(Outcome o) {
    switch (o) {
    case Outcome::tp: ++tp; break;
    case Outcome::fp: ++fp; break;
    case Outcome::tn: ++tn; break;
    case Outcome::fn: ++fn; break;
    }
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
}

Classification classify(const CaseLabel& label, const std::set<CweId>& reported, const CweGraph& graph,
                        const MatchPolicy& policy) {
    if (!graph.contains(label.expected_cwe)) {
        throw ConfigError("classify: " + label.case_id + " expects " + label.expected_cwe.str() +
                          ", which is not in the CWE graph");
    }
    const auto accept = graph.acceptable_set(label.expected_cwe, policy);
    Classification c;
    c.case_id = label.case_id;
    c.expected_cwe = label.expected_cwe;
    for (CweId r : reported) {
        if (accept.count(r)) {
            if (!c.matched_cwe) c.matched_cwe = r;
        } else {
            ++c.unrelated_reports;
        }
    }
    if (label.vulnerable) c.outcome = c.matched_cwe ? Outcome::tp : Outcome::fn;
    else c.outcome = c.matched_cwe ? Outcome::fp : Outcome::tn;
    return c;
}

MetricSet metrics(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw UndefinedMetricsError("metrics: empty confusion matrix");
    MetricSet m;
    const auto d = [](std::uint64_t n) { return static_cast<double>(n); };
    m.accuracy = d(cm.tp + cm.tn) / d(cm.total());
    if (cm.tp + cm.fp > 0) m.precision = d(cm.tp) / d(cm.tp + cm.fp);
    else m.degenerate = true;
    if (cm.tp + cm.fn > 0) m.recall = d(cm.tp) / d(cm.tp + cm.fn);
    else m.degenerate = true;
    if (m.precision + m.recall > 0) m.f1 = 2 * m.precision * m.recall / (m.precision + m.recall);
    else m.degenerate = true;
    return m;
}

bool NaturalLess::operator()(const std::string& a, const std::string& b) const {
    std::size_t i = 0, j = 0;
    auto digit = [](char c) { return c >= '0' && c <= '9'; };
    while (i < a.size() && j < b.size()) {
        if (digit(a[i]) && digit(b[j])) {
            std::size_t ie = i, je = j;
            while (ie < a.size() && digit(a[ie])) ++ie;
            while (je < b.size() && digit(b[je])) ++je;
            std::string_view na(a.data() + i, ie - i), nb(b.data() + j, je - j);
            while (na.size() > 1 && na.front() == '0') na.remove_prefix(1);
            while (nb.size() > 1 && nb.front() == '0') nb.remove_prefix(1);
            if (na.size() != nb.size()) return na.size() < nb.size();
            if (na != nb) return na < nb;
            i = ie;
            j = je;
        } else {
            if (a[i] != b[j]) return a[i] < b[j];
            ++i;
            ++j;
        }
    }
    if (a.size() - i != b.size() - j) return a.size() - i < b.size() - j;
    return a < b;
}

Grouped aggregate(const std::vector<Classification>& items, GroupBy group_by) {
    Grouped out;
    for (const auto& c : items) {
        std::string key;
        switch (group_by) {
        case GroupBy::overall: key = "overall"; break;
        case GroupBy::per_cwe: key = c.expected_cwe.str(); break;
        case GroupBy::per_strategy: key = c.strategy; break;
        }
        GroupSummary& g = out[key];
        g.cm.add(c.outcome);
        g.cost += c.cost;
        g.wall_time_ms += c.wall_time_ms;
        g.unrelated_reports += c.unrelated_reports;
    }
    return out;
}

std::string render_text_table(const std::vector<ReportRow>& rows, std::string_view title) {
    const std::vector<std::string> header{"Strategy", "TP", "FP", "TN", "FN", "Accuracy",
                                          "Precision", "Recall", "F1", "Cost", "Time"};
    std::vector<std::vector<std::string>> cells{header};
    bool any_flag = false;
    for (const auto& r : rows) {
        const auto& cm = r.summary.cm;
        std::vector<std::string> line{r.label, std::to_string(cm.tp), std::to_string(cm.fp), std::to_string(cm.tn),
                                      std::to_string(cm.fn)};
        if (cm.total() == 0) {
            line.insert(line.end(), {"-", "-", "-", "-"});
        } else {
            const MetricSet m = metrics(cm);
            line.insert(line.end(), {fixed3(m.accuracy), fixed3(m.precision), fixed3(m.recall), fixed3(m.f1)});
            if (m.degenerate) {
                line.back() += "*";
                any_flag = true;
            }
        }
        line.push_back("$" + r.summary.cost.str_cents());
        line.push_back(seconds(r.summary.wall_time_ms));
        cells.push_back(std::move(line));
    }

    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& line : cells) {
        for (std::size_t k = 0; k < line.size(); ++k) width[k] = std::max(width[k], line[k].size());
    }
    std::ostringstream out;
    if (!title.empty()) out << title << '\n';
    for (std::size_t r = 0; r < cells.size(); ++r) {
        for (std::size_t k = 0; k < cells[r].size(); ++k) {
            const std::string& s = cells[r][k];
            if (k == 0) out << s << std::string(width[k] - s.size(), ' ');
            else out << "  " << std::string(width[k] - s.size(), ' ') << s;
        }
        out << '\n';
        if (r == 0) {
            std::size_t total = 0;
            for (std::size_t w : width) total += w + 2;
            out << std::string(total - 2, '-') << '\n';
        }
    }
    if (any_flag) out << "* zero denominator: metric reported as 0\n";
    out << "Time is wall-clock of this run and not reproducible.\n";
    return out.str();
}

std::string render_csv_table(const std::vector<ReportRow>& rows) {
    std::string out = "label,tp,fp,tn,fn,accuracy,precision,recall,f1,degenerate,cost_usd,time_ms_nonreproducible\n";
    for (const auto& r : rows) {
        const auto& cm = r.summary.cm;
        std::vector<std::string> f{r.label, std::to_string(cm.tp), std::to_string(cm.fp), std::to_string(cm.tn),
                                   std::to_string(cm.fn)};
        if (cm.total() == 0) {
            f.insert(f.end(), {"", "", "", "", ""});
        } else {
            const MetricSet m = metrics(cm);
            f.insert(f.end(), {fixed3(m.accuracy), fixed3(m.precision), fixed3(m.recall), fixed3(m.f1),
                               m.degenerate ? "1" : "0"});
        }
        f.push_back(r.summary.cost.str());
        f.push_back(std::to_string(r.summary.wall_time_ms));
        out += csv::join(f);
        out += '\n';
    }
    return out;
}

} // namespace llmsast
