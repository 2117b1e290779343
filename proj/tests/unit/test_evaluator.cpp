#include "test_support.hpp"

#include "llmsast/csv.hpp"
#include "llmsast/evaluator.hpp"

#include <doctest.h>

#include <cmath>

using namespace llmsast;

namespace {

const CweGraph& snapshot() {
    static const CweGraph g = load_cwe_graph(testing::source_dir() / "data" / "cwe1000_snapshot.csv");
    return g;
}

} // namespace

TEST_CASE("classification outcomes") {
    const auto& g = snapshot();
    auto c = [&](bool vulnerable, std::set<CweId> reported) {
        return classify({"J1", CweId(22), vulnerable}, reported, g);
    };
    CHECK(c(true, {CweId(22)}).outcome == Outcome::tp);
    CHECK(c(true, {CweId(23)}).outcome == Outcome::tp);
    CHECK(c(true, {CweId(23)}).matched_cwe == CweId(23));
    CHECK(c(true, {CweId(89)}).outcome == Outcome::fn);
    CHECK(c(true, {}).outcome == Outcome::fn);
    CHECK(c(false, {CweId(36)}).outcome == Outcome::fp);
    CHECK(c(false, {CweId(89)}).outcome == Outcome::tn);
    CHECK(c(false, {}).outcome == Outcome::tn);
    const auto mixed = c(true, {CweId(22), CweId(89), CweId(79)});
    CHECK(mixed.outcome == Outcome::tp);
    CHECK(mixed.unrelated_reports == 2);
    CHECK_THROWS_AS(classify({"J1", CweId(999999), true}, {}, g), ConfigError);
}

TEST_CASE("metrics match exact fractions") {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 5000; ++i) {
        ConfusionMatrix cm{rng() % 300, rng() % 300, rng() % 300, rng() % 300};
        if (cm.total() == 0) continue;
        const MetricSet m = metrics(cm);
        const double tp = double(cm.tp), fp = double(cm.fp), fn = double(cm.fn);
        CHECK(m.accuracy == doctest::Approx(double(cm.tp + cm.tn) / double(cm.total())).epsilon(1e-12));
        const double p = cm.tp + cm.fp ? tp / (tp + fp) : 0, r = cm.tp + cm.fn ? tp / (tp + fn) : 0;
        CHECK(m.precision == doctest::Approx(p).epsilon(1e-12));
        CHECK(m.recall == doctest::Approx(r).epsilon(1e-12));
        // F1 = 2TP / (2TP + FP + FN): an integer-only form of the harmonic mean.
        const double f1 = cm.tp ? 2 * tp / (2 * tp + fp + fn) : 0;
        CHECK(m.f1 == doctest::Approx(f1).epsilon(1e-12));
        CHECK(m.degenerate == (cm.tp + cm.fp == 0 || cm.tp + cm.fn == 0 || cm.tp == 0));
    }
}

TEST_CASE("degenerate and empty matrices") {
    const MetricSet m = metrics({0, 0, 17, 17});
    CHECK(m.accuracy == doctest::Approx(0.5));
    CHECK(m.precision == 0);
    CHECK(m.recall == 0);
    CHECK(m.f1 == 0);
    CHECK(m.degenerate);
    CHECK_THROWS_AS(metrics({}), UndefinedMetricsError);
}

TEST_CASE("aggregation groups and sums exactly") {
    const auto& g = snapshot();
    std::vector<Classification> items;
    for (int i = 0; i < 9; ++i) {
        const CweId cwe = i % 3 == 0 ? CweId(129) : i % 3 == 1 ? CweId(23) : CweId(89);
        auto c = classify({"J" + std::to_string(i), cwe, i % 2 == 0}, {cwe}, g);
        c.strategy = i < 5 ? "p_b" : "p_dfa";
        c.cost = Money::from_micros(333333);
        c.wall_time_ms = 10;
        items.push_back(c);
    }
    const auto overall = aggregate(items, GroupBy::overall);
    REQUIRE(overall.size() == 1);
    CHECK(overall.begin()->first == "overall");
    CHECK(overall.at("overall").cm.total() == 9);
    CHECK(overall.at("overall").cost.micros() == 9 * 333333);
    CHECK(overall.at("overall").wall_time_ms == 90);

    const auto per_cwe = aggregate(items, GroupBy::per_cwe);
    std::vector<std::string> keys;
    for (auto& [k, v] : per_cwe) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"CWE-23", "CWE-89", "CWE-129"});
    const auto per_strategy = aggregate(items, GroupBy::per_strategy);
    CHECK(per_strategy.at("p_b").cm.total() == 5);
    CHECK(per_strategy.at("p_dfa").cm.total() == 4);
}

TEST_CASE("natural ordering") {
    NaturalLess less;
    CHECK(less("CWE-23", "CWE-129"));
    CHECK_FALSE(less("CWE-129", "CWE-23"));
    CHECK(less("a", "b"));
    CHECK_FALSE(less("CWE-23", "CWE-23"));
}

TEST_CASE("tables") {
    GroupSummary s;
    s.cm = {160, 88, 201, 129};
    s.cost = *Money::parse("13.4");
    s.wall_time_ms = 4 * 3600 * 1000;
    GroupSummary z;
    z.cm = {0, 0, 17, 17};
    const std::string text = render_text_table({{"p_cot-8s", s}, {"p_x", z}}, "Results");
    CHECK(text.find("0.625") != std::string::npos);
    CHECK(text.find("0.645") != std::string::npos);
    CHECK(text.find("0.554") != std::string::npos);
    CHECK(text.find("0.596") != std::string::npos);
    CHECK(text.find("$13.40") != std::string::npos);
    CHECK(text.find('*') != std::string::npos);
    CHECK(text.find("not reproducible") != std::string::npos);

    const auto rows = csv::parse(render_csv_table({{"p_cot-8s", s}}));
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].fields[0] == "p_cot-8s");
    CHECK(rows[1].fields[1] == "160");
    CHECK(std::find(rows[1].fields.begin(), rows[1].fields.end(), "13.400000") != rows[1].fields.end());
}
