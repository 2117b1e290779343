// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include "test_support.hpp"
#include "graph_oracle.hpp"

#include "llmsast/app.hpp"
#include "llmsast/corpus_prep.hpp"
#include "llmsast/csv.hpp"
#include "llmsast/cwe_graph.hpp"
#include "llmsast/digest.hpp"
#include "llmsast/evaluator.hpp"
#include "llmsast/io.hpp"
#include "llmsast/java_lexer.hpp"
#include "llmsast/sast_ingest.hpp"
#include "llmsast/strategy_engine.hpp"
#include "llmsast/verdict_parser.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <regex>
#include <sstream>

using namespace llmsast;
namespace fs = std::filesystem;

namespace {

constexpr double kMetricTolerance = 0.001;

struct CriterionResult {
    bool pass = true;
    std::string detail;
};

/// Collects failures; the first few are kept for the report line.
struct Check {
    CriterionResult o;
    int failures = 0;
    void expect(bool ok, const std::string& what) {
        if (ok) return;
        o.pass = false;
        if (failures++ < 3) o.detail += (o.detail.empty() ? "" : "; ") + what;
    }
    CriterionResult done(std::string summary) {
        if (o.pass) o.detail = std::move(summary);
        else if (failures > 3) o.detail += "; +" + std::to_string(failures - 3) + " more";
        return o;
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const CweGraph& snapshot() {
    static const CweGraph g = load_cwe_graph(testing::source_dir() / "data" / "cwe1000_snapshot.csv");
    return g;
}

const TemplateLibrary& templates() {
    static const TemplateLibrary t = TemplateLibrary::load(testing::source_dir() / "templates");
    return t;
}

const StrategyRegistry& registry() {
    static const StrategyRegistry r =
        StrategyRegistry::load(testing::source_dir() / "templates" / "registry.json", templates());
    return r;
}

// ---------------------------------------------------------------- 1

CriterionResult metric_oracle() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = csv::parse(read_file(testing::source_dir() / "tests" / "data" / "published_tables.csv"));
    std::size_t n = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& f = rows[i].fields;
        const ConfusionMatrix cm{std::stoull(f[2]), std::stoull(f[3]), std::stoull(f[4]), std::stoull(f[5])};
        const MetricSet m = metrics(cm);
        const double got[4] = {m.accuracy, m.precision, m.recall, m.f1};
        for (int k = 0; k < 4; ++k) {
            const double printed = std::stod(f[6 + k]);
            c.expect(std::fabs(got[k] - printed) <= kMetricTolerance,
                     "table " + f[0] + " " + f[1] + " column " + std::to_string(k) + ": " + std::to_string(got[k]) +
                         " vs " + f[6 + k]);
        }
        ++n;
    }
    const double secs = seconds_since(t0);
    c.expect(n >= 40, "only " + std::to_string(n) + " rows");
    c.expect(secs < 1.0, "took " + std::to_string(secs) + " s");
    return c.done(std::to_string(n) + " table rows within +-0.001 in " + std::to_string(secs) + " s");
}

// ---------------------------------------------------------------- 2

CriterionResult matcher_fixtures() {
    Check c;
    const auto& g = snapshot();
    c.expect(g.matches(CweId(22), CweId(23)), "23 should match 22");
    c.expect(g.matches(CweId(22), CweId(36)), "36 should match 22");
    c.expect(!g.matches(CweId(476), CweId(710)), "710 must not match 476");
    c.expect(!g.matches(CweId(523), CweId(319)), "319 must not match 523");

    std::mt19937_64 rng(20240601);
    int graphs = 0;
    for (; graphs < 1000; ++graphs) {
        const auto rows = testing::random_graph_rows(rng, 50);
        const CweGraph rg = CweGraph::from_rows(rows);
        const MatchPolicy policy = testing::policy_from_bits(static_cast<unsigned>(rng() % 32));
        for (const auto& e : rows) {
            const auto set = rg.acceptable_set(e.id, policy);
            const auto expect = testing::oracle_acceptable(rows, e.id, policy);
            c.expect(set == expect, "graph " + std::to_string(graphs) + ": acceptable_set differs from oracle");
            for (const auto& r : rows) {
                c.expect(rg.matches(e.id, r.id, policy) == (set.count(r.id) > 0),
                         "graph " + std::to_string(graphs) + ": matches(" + e.id.str() + ", " + r.id.str() +
                             ") disagrees with acceptable_set");
            }
        }
    }
    return c.done("fixtures hold; matches == acceptable_set == oracle on " + std::to_string(graphs) +
                  " random graphs");
}

// ---------------------------------------------------------------- 3

CriterionResult verdict_corpus() {
    Check c;
    struct Golden {
        const char* file;
        const char* case_id;
        CweId cwe;
        bool vulnerable;
        llmsast::Outcome expect;
    };
    const Golden goldens[] = {
        {"gpt4_cot8s_J20736.txt", "J20736", CweId(78), true, llmsast::Outcome::tp},
        {"claude3opus_cot8s_J20736.txt", "J20736", CweId(78), true, llmsast::Outcome::tp},
        {"gpt4_cot8s_J23877.txt", "J23877", CweId(89), false, llmsast::Outcome::fp},
        {"claude3opus_cot8s_J23877.txt", "J23877", CweId(89), false, llmsast::Outcome::fp},
    };
    std::vector<std::string> seeds;
    for (const auto& gl : goldens) {
        const std::string text = testing::read_golden(gl.file);
        seeds.push_back(text);
        const auto parsed = parse_verdicts(text);
        const auto cls = classify({gl.case_id, gl.cwe, gl.vulnerable}, positive_cwes(parsed.verdicts), snapshot());
        c.expect(cls.outcome == gl.expect, std::string(gl.file) + " classified wrongly");
    }
    c.expect(parse_verdicts(seeds[2]).verdicts.size() == 2, "GPT-4 dual verdict not split");

    const std::regex yes_family(R"((^|[^A-Za-z])(yes|y|true)([^A-Za-z]|$))", std::regex::icase);
    const std::vector<std::string> chunks{"vulnerability: ", "YES", "NO", " | ", "CWE-", "\n", "maybe", "**"};
    std::mt19937_64 rng(99);
    int crashes = 0, bad_positive = 0;
    for (int i = 0; i < 10000; ++i) {
        std::string s = seeds[rng() % seeds.size()];
        const int edits = 1 + static_cast<int>(rng() % 12);
        for (int e = 0; e < edits; ++e) {
            const std::size_t pos = rng() % (s.size() + 1);
            switch (rng() % 4) {
            case 0: s.insert(pos, 1, static_cast<char>(rng() % 256)); break;
            case 1:
                if (pos < s.size()) s.erase(pos, 1 + rng() % 16);
                break;
            case 2:
                if (pos < s.size()) s[pos] = "YyNn|:\n-_ "[rng() % 11];
                break;
            default: s.insert(pos, chunks[rng() % chunks.size()]);
            }
        }
        try {
            const auto r = parse_verdicts(s);
            for (const auto& v : r.verdicts) {
                if (v.present == Decision::yes && !std::regex_search(v.raw_decision_token, yes_family)) ++bad_positive;
            }
            if (!positive_cwes(r.verdicts).empty() && !std::regex_search(s, yes_family)) ++bad_positive;
        } catch (...) {
            ++crashes;
        }
    }
    c.expect(crashes == 0, std::to_string(crashes) + " fuzz inputs threw");
    c.expect(bad_positive == 0, std::to_string(bad_positive) + " positives without a YES-family token");
    return c.done("4 goldens give TP, TP, FP, FP; 10000 fuzzed responses clean");
}

// ---------------------------------------------------------------- 4, 5, 6

const char* kSource = "public class J1 {\n"
                      "    public void handle(String data) throws Exception {\n"
                      "        Runtime.getRuntime().exec(\"ls \" + data);\n"
                      "    }\n"
                      "}\n";

std::map<std::string, std::vector<FewShotExample>> few_shot_sets() {
    std::map<std::string, std::vector<FewShotExample>> out;
    for (const char* set : {"fs20", "fs6"}) {
        out[set] = load_few_shot_examples(testing::source_dir() / "templates" / "few_shot" / (std::string(set) + ".json"));
    }
    return out;
}

struct MockRun {
    std::size_t calls = 0;
    ScanResult result;
    std::vector<testing::ScriptedBackend::Request> requests;
};

MockRun run_mock(const StrategySpec& spec, testing::ScriptedBackend::Script script, std::string package = "testcases",
                 std::string_view source = kSource) {
    VirtualClock clock;
    auto backend = std::make_shared<testing::ScriptedBackend>(std::move(script));
    Gateway gw({}, backend, clock);
    StrategyEngine::Options opts;
    opts.package_override = std::move(package);
    opts.few_shot = few_shot_sets();
    StrategyEngine engine(templates(), gw, testing::mock_profile(), opts);
    MockRun m;
    m.result = engine.run("J1", source, spec);
    m.calls = backend->calls();
    m.requests = backend->requests();
    return m;
}

std::string verdict_text(const std::set<CweId>& cwes) {
    if (cwes.empty()) return "vulnerability: NO | vulnerability type: N/A | vulnerability name: N/A | explanation: -";
    std::string out;
    for (CweId c : cwes) out += "vulnerability: YES | vulnerability type: " + c.str() + " | vulnerability name: x | explanation: y\n";
    return out;
}

CriterionResult call_budgets() {
    Check c;
    const std::map<Protocol, std::size_t> budget{{Protocol::single, 1},       {Protocol::short_refine, 2},
                                                 {Protocol::short_rci, 2},    {Protocol::rci, 3},
                                                 {Protocol::self_refine, 3},  {Protocol::self_consistency, 3},
                                                 {Protocol::tot, 48}};
    std::map<Protocol, int> seen;
    for (StrategyId id : all_strategy_ids()) {
        const auto& spec = registry().get(id);
        const auto m = run_mock(spec, [](const auto&, std::size_t) { return verdict_text({CweId(78)}); });
        c.expect(m.calls == budget.at(spec.protocol), std::string(to_string(id)) + " made " +
                                                          std::to_string(m.calls) + " calls");
        ++seen[spec.protocol];
    }
    c.expect(seen.size() == budget.size(), "not every protocol is exercised by the registry");
    return c.done("all 25 strategies: single 1, short 2, rci/self-refine 3, self-consistency 3, tot 48");
}

CriterionResult sc_votes() {
    Check c;
    const std::vector<std::set<CweId>> answers{{}, {CweId(78)}, {CweId(89)}, {CweId(78), CweId(89)}};
    int patterns = 0;
    for (StrategyId id : {StrategyId::b_sc, StrategyId::cot_8s_sc}) {
        for (const auto& a : answers)
            for (const auto& b : answers)
                for (const auto& d : answers) {
                    const std::vector<std::set<CweId>> pattern{a, b, d};
                    const auto m = run_mock(registry().get(id), [&](const auto& r, std::size_t) {
                        return verdict_text(pattern.at(r.run_index));
                    });
                    std::set<CweId> expect;
                    for (CweId cwe : {CweId(78), CweId(89)}) {
                        const auto votes = std::count_if(pattern.begin(), pattern.end(),
                                                         [&](const auto& s) { return s.count(cwe) > 0; });
                        if (votes >= 2) expect.insert(cwe);
                    }
                    c.expect(m.result.reported_cwes == expect, "pattern " + std::to_string(patterns));
                    c.expect(m.result.final_decision == !expect.empty(), "decision for pattern " + std::to_string(patterns));
                    ++patterns;
                }
    }
    return c.done(std::to_string(patterns) + " vote patterns follow the >=2 of 3 rule");
}

CriterionResult template_goldens() {
    Check c;
    const std::string source = "class A {\n    void m() {}\n}\n";
    const std::string code = prepare_for_llm(source, "");
    const std::pair<StrategyId, const char*> cases[] = {
        {StrategyId::dfa, "p_dfa.txt"}, {StrategyId::dfa_rci, "p_dfa_rci.txt"}, {StrategyId::cot_8s, "p_cot_8s.txt"}};
    for (const auto& [id, file] : cases) {
        const auto m = run_mock(registry().get(id), [](const auto&, std::size_t) { return std::string("<response>"); },
                                "", source);
        std::string rendered;
        for (const auto& step : m.result.transcript.steps()) {
            std::string human = step.sent.back().content;
            for (auto pos = human.find(code); pos != std::string::npos; pos = human.find(code, pos + 6)) {
                human.replace(pos, code.size(), "{code}");
            }
            rendered += "Human: " + human + "\nAI: " + step.response.content + "\n";
        }
        c.expect(rendered == testing::read_golden(file), std::string(file) + " differs");
    }
    return c.done("p_dfa, p_dfa_rci and p_cot_8s match the published texts");
}

// ---------------------------------------------------------------- 7

CriterionResult corpus_prep() {
    Check c;
    testing::TempDir a("acc-prep-a"), b("acc-prep-b");
    const fs::path raw = testing::source_dir() / "data" / "mini_corpus" / "raw";
    const auto t0 = std::chrono::steady_clock::now();
    PrepOptions opts;
    opts.seed = 2024;
    const PrepReport r = prepare_corpus(raw, a.path(), opts);
    const PrepReport r2 = prepare_corpus(raw, b.path(), opts);
    const double secs = seconds_since(t0);

    const std::regex hint(R"(good|bad|cwe[0-9]+|juliet)", std::regex::icase);
    std::size_t leaks = 0;
    for (const auto& e : r.all.cases) {
        const std::string text = load_case(a.path(), e).source_text;
        if (std::regex_search(prepare_for_llm(text, "testcases"), hint)) ++leaks;
    }
    c.expect(r.all.cases.size() >= 50, "only " + std::to_string(r.all.cases.size()) + " cases");
    c.expect(leaks == 0, std::to_string(leaks) + " files still carry hint tokens");
    const auto counts = r.all.counts();
    c.expect(counts.size() == 3, "expected 3 CWEs");
    for (const auto& [cwe, vc] : counts) c.expect(vc.first == vc.second, cwe.str() + " is unbalanced");
    c.expect(r.all.digest() == r2.all.digest(), "same seed, different manifest");
    c.expect(read_file(a / "manifest.jsonl") == read_file(b / "manifest.jsonl"), "manifest bytes differ");

    CorpusManifest synthetic;
    for (int k = 0; k < 17; ++k) {
        for (int i = 0; i < 25; ++i) {
            for (bool vuln : {true, false}) {
                char id[32];
                std::snprintf(id, sizeof id, "S%02d%02d%c", k, i, vuln ? 'v' : 'c');
                synthetic.cases.push_back({id, CweId(100 + k), vuln, std::string(id) + ".java", std::string(64, '0')});
            }
        }
    }
    std::sort(synthetic.cases.begin(), synthetic.cases.end(),
              [](const auto& x, const auto& y) { return x.case_id < y.case_id; });
    const auto sel = select_subset(synthetic, 17, 5);
    c.expect(sel.cases.size() == 578, "selection has " + std::to_string(sel.cases.size()) + " entries");
    c.expect(select_subset(synthetic, 17, 5) == sel, "selection not reproducible");
    c.expect(secs < 10.0, "prep took " + std::to_string(secs) + " s");
    return c.done(std::to_string(r.all.cases.size()) + " cases hint-free and balanced, 578 selected, digests equal, " +
                  std::to_string(secs) + " s for two runs");
}

// ---------------------------------------------------------------- 8

CriterionResult sast_goldens() {
    Check c;
    const auto cq1 = parse_codeql_csv(testing::read_golden("codeql_J20736.csv"));
    const auto cq2 = parse_codeql_csv(testing::read_golden("codeql_J23877.csv"));
    c.expect(cq1.size() == 1 && cq1[0].rule == "Uncontrolled command line" && cq1[0].start_line == 31 &&
                 cq1[0].start_column == 53 && cq1[0].end_column == 68,
             "codeql J20736 fields");
    c.expect(cq2.size() == 2 && cq2[0].start_line == 24 && cq2[1].start_line == 62, "codeql J23877 fields");
    const auto sb1 = parse_spotbugs_text(testing::read_golden("spotbugs_J20736.txt")).findings;
    const auto sb2 = parse_spotbugs_text(testing::read_golden("spotbugs_J23877.txt")).findings;
    c.expect(sb1.size() == 1 && sb1[0].rule == "SECCI" && sb1[0].severity == "H" && sb1[0].start_line == 31,
             "spotbugs J20736 fields");
    c.expect(sb2.size() == 1 && sb2[0].rule == "SQL" && sb2[0].severity == "M" && sb2[0].start_line == 62,
             "spotbugs J23877 fields");

    const RuleCweMap rules = RuleCweMap::load(testing::source_dir() / "config" / "rule_cwe_map.csv");
    CorpusManifest m;
    m.cases = {{"J20736", CweId(78), true, "CWE78_OS_Command_Injection/J20736.java", "d1"},
               {"J23877", CweId(89), false, "CWE89_SQL_Injection/s02/J23877.java", "d2"}};
    for (const auto* findings : {&cq1, &sb1}) {
        std::vector<SastFinding> all = *findings;
        for (const auto& f : findings == &cq1 ? cq2 : sb2) all.push_back(f);
        const auto mapped = map_findings(all, rules, m);
        const std::string tool = findings == &cq1 ? "codeql" : "spotbugs";
        auto judged = [&](const std::string& id, CweId cwe, bool vuln) {
            auto it = mapped.per_case.find(id);
            const std::set<CweId> rep = it == mapped.per_case.end() ? std::set<CweId>{} : it->second;
            c.expect(rep.count(cwe) > 0, tool + " " + id + " lacks a " + cwe.str() + " report");
            return classify({id, cwe, vuln}, rep, snapshot()).outcome;
        };
        c.expect(judged("J20736", CweId(78), true) == llmsast::Outcome::tp, tool + " J20736 not TP");
        c.expect(judged("J23877", CweId(89), false) == llmsast::Outcome::fp, tool + " J23877 not FP");
    }
    return c.done("CodeQL and SpotBugs goldens parse; J20736 -> CWE-78 TP, J23877 -> CWE-89 FP");
}

// ---------------------------------------------------------------- 9

struct PipelineRun {
    std::string report;
    std::string csv;
    Money archive_cost;
};

PipelineRun replay_pipeline(const fs::path& corpus, const fs::path& store, const fs::path& work) {
    std::ostringstream log;
    VirtualClock clock;
    app::ScanArgs s;
    s.corpus_root = corpus;
    s.manifest = corpus / "manifest.jsonl";
    s.model = "heuristic";
    s.mode = ReplayMode::replay;
    s.replay_dir = store;
    s.concurrency = 4;
    std::vector<ScoredFile> scored;
    PipelineRun out;
    for (StrategyId id : {StrategyId::b, StrategyId::cot_8s, StrategyId::b_sc}) {
        s.strategy = id;
        s.out_dir = work / std::string(to_string(id));
        out.archive_cost += app::cmd_scan(s, nullptr, clock, log).archive_cost;
        app::EvalArgs e;
        e.archive = s.out_dir / "results.ndjson";
        e.manifest = s.manifest;
        e.out = work / (std::string(to_string(id)) + ".scored.json");
        app::cmd_eval(e, log);
        scored.push_back(parse_scored_json(read_file(e.out)));
    }
    out.report = app::render_report(scored, true, &out.csv);
    return out;
}

CriterionResult determinism() {
    Check c;
    testing::TempDir dir("acc-e2e");
    app::PrepArgs p;
    p.raw_root = testing::source_dir() / "data" / "mini_corpus" / "raw";
    p.out_root = dir / "corpus";
    p.seed = 3;
    std::ostringstream log;
    app::cmd_prep(p, log);

    // Record once with the offline backend.
    VirtualClock clock;
    app::ScanArgs s;
    s.corpus_root = p.out_root;
    s.manifest = p.out_root / "manifest.jsonl";
    s.model = "heuristic";
    s.mode = ReplayMode::record;
    s.replay_dir = dir / "store";
    Money recorded;
    for (StrategyId id : {StrategyId::b, StrategyId::cot_8s, StrategyId::b_sc}) {
        s.strategy = id;
        s.out_dir = dir / "record" / std::string(to_string(id));
        recorded += app::cmd_scan(s, nullptr, clock, log).archive_cost;
    }

    const auto r1 = replay_pipeline(p.out_root, dir / "store", dir / "run1");
    const auto r2 = replay_pipeline(p.out_root, dir / "store", dir / "run2");
    c.expect(r1.report == r2.report, "report text differs between replays");
    c.expect(r1.csv == r2.csv, "report csv differs between replays");
    c.expect(r1.archive_cost == recorded, "replayed cost " + r1.archive_cost.str() + " != recorded " + recorded.str());

    // Every archived cost is the exact sum of its steps, each priced from tokens.
    const auto profile = load_model_profiles(testing::source_dir() / "config" / "models.json").at("heuristic");
    std::int64_t oracle_total = 0;
    for (StrategyId id : {StrategyId::b, StrategyId::cot_8s, StrategyId::b_sc}) {
        const fs::path out = dir / "run1" / std::string(to_string(id));
        for (const auto& rec : load_archive(out / "results.ndjson").records) {
            const Transcript t = parse_transcript_json(read_file(out / "transcripts" / (rec.case_id + ".json")));
            std::int64_t sum = 0;
            for (const auto& step : t.steps()) {
                const std::int64_t num = static_cast<std::int64_t>(step.usage.input_tokens) * profile.input_price.micros() +
                                         static_cast<std::int64_t>(step.usage.output_tokens) * profile.output_price.micros();
                sum += (num + 500) / 1000;
            }
            c.expect(sum == rec.cost.micros(), rec.case_id + " cost is not the sum of its steps");
            oracle_total += sum;
        }
    }
    c.expect(oracle_total == r1.archive_cost.micros(), "archive totals differ from the token oracle");
    c.expect(r1.report.find("Results overview") != std::string::npos, "report lacks the overview");
    return c.done("two replays of 3 strategies give identical tables; total $" + r1.archive_cost.str() +
                  " equals the per-step token oracle");
}

// ---------------------------------------------------------------- 10

CriterionResult live_smoke() {
    const char* flag = std::getenv("LLMSAST_LIVE_SMOKE");
    if (!flag || std::string(flag) != "1") return {true, "skipped (set LLMSAST_LIVE_SMOKE=1 to run one paid call)"};
    Check c;
    const char* model_env = std::getenv("LLMSAST_LIVE_MODEL");
    const std::string model = model_env ? model_env : "gpt-4o-mini";
    const auto profiles = load_model_profiles(testing::source_dir() / "config" / "models.json");
    const auto& profile = profiles.at(model);
    SteadyClock clock;
    Gateway gw({}, std::shared_ptr<Backend>(make_default_router()), clock);
    StrategyEngine engine(templates(), gw, profile, {});
    const auto r = engine.run("J1", kSource, registry().get(StrategyId::b));
    c.expect(r.status == ScanStatus::ok, "status " + std::string(to_string(r.status)));
    c.expect(r.transcript.size() == 1, "expected one call");
    if (r.transcript.size() == 1) {
        const auto& u = r.transcript.steps()[0].usage;
        c.expect(u.input_tokens > 0 && u.output_tokens > 0, "usage metadata missing");
    }
    return c.done(model + " answered one p_b request for $" + gw.live_spend().str());
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<CriterionResult()>>> criteria{
        {"metric oracle over the published tables", metric_oracle},
        {"CWE matcher fixtures and random-graph equivalence", matcher_fixtures},
        {"verdict parser goldens and fuzzing", verdict_corpus},
        {"strategy call budgets", call_budgets},
        {"self-consistency majority vote", sc_votes},
        {"prompt template goldens", template_goldens},
        {"corpus preparation on the mini corpus", corpus_prep},
        {"SAST ingest goldens", sast_goldens},
        {"end-to-end replay determinism and exact costs", determinism},
        {"live smoke", live_smoke},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        CriterionResult o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
                  << "): " << o.detail << std::endl;
    }
    return failed ? 1 : 0;
}
