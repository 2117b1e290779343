// llmsast: prepare a corpus, scan it with a prompting strategy or ingest SAST
// output, then score and compare.
//
// Exit status: 0 success; 1 the scan finished with failed cases, hit the
// spend ceiling or was aborted; 2 bad usage or invalid input.

#include "llmsast/app.hpp"
#include "llmsast/io.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace llmsast;
namespace fs = std::filesystem;

namespace {

MatchPolicy policy_from(bool no_parents, bool no_children, bool direct_children, bool transitive_parents,
                        bool allow_pillar) {
    MatchPolicy p;
    p.accept_parent = !no_parents;
    p.accept_children = !no_children;
    p.transitive_children = !direct_children;
    p.transitive_parents = transitive_parents;
    p.exclude_pillar_parent = !allow_pillar;
    return p;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App cli{"Vulnerability detection with prompted language models, scored against SAST baselines"};
    cli.require_subcommand(1);

    // prep
    app::PrepArgs prep;
    std::uint32_t per_cwe = 0;
    std::string lexicon;
    auto* c_prep = cli.add_subcommand("prep", "Normalize a raw Juliet-style corpus and write a manifest");
    c_prep->add_option("--raw", prep.raw_root, "Raw corpus root")->required();
    c_prep->add_option("--out", prep.out_root, "Output root")->required();
    c_prep->add_option("--seed", prep.seed, "Sampling seed");
    c_prep->add_option("--per-cwe", per_cwe, "Cases per CWE and label (0 keeps all)");
    c_prep->add_option("--lexicon", lexicon, "Hint lexicon TSV");

    // scan
    app::ScanArgs scan;
    std::string strategy, mode = "live", replay_dir, max_spend;
    int max_attempts = scan.retry.max_attempts;
    auto* c_scan = cli.add_subcommand("scan", "Run one prompting strategy over a prepared corpus");
    c_scan->add_option("--corpus", scan.corpus_root, "Prepared corpus root")->required();
    c_scan->add_option("--manifest", scan.manifest, "Manifest produced by prep")->required();
    c_scan->add_option("--strategy", strategy, "Strategy id, e.g. p_cot_8s or cot_8s")->required();
    c_scan->add_option("--model", scan.model, "Model profile name")->capture_default_str();
    c_scan->add_option("--models", scan.models_file, "Model profiles JSON");
    c_scan->add_option("--templates", scan.templates_dir, "Template directory");
    c_scan->add_option("--out", scan.out_dir, "Archive directory")->required();
    c_scan->add_option("--concurrency", scan.concurrency, "Parallel cases")->capture_default_str();
    c_scan->add_option("--rate-limit", scan.rate_limit, "Requests per second (0 = unlimited)");
    c_scan->add_option("--mode", mode, "live, record or replay")->capture_default_str();
    c_scan->add_option("--replay-dir", replay_dir, "Replay store directory");
    c_scan->add_option("--max-spend", max_spend, "Stop once live spend reaches this many dollars");
    c_scan->add_option("--label", scan.label, "Row label in reports");
    c_scan->add_option("--package-override", scan.package_override, "Package declaration shown to the model")
        ->capture_default_str();
    c_scan->add_option("--max-attempts", max_attempts, "Attempts per request on transient errors");

    // ingest
    app::IngestArgs ingest;
    auto add_ingest = [&](const char* name, SastTool tool, const char* help) {
        auto* c = cli.add_subcommand(name, help);
        c->add_option("--report", ingest.report, "Tool output file")->required();
        c->add_option("--manifest", ingest.manifest, "Manifest produced by prep")->required();
        c->add_option("--rule-map", ingest.rule_map, "Rule to CWE mapping CSV");
        c->add_option("--graph", ingest.graph, "CWE hierarchy snapshot CSV");
        c->add_option("--out", ingest.out_dir, "Archive directory")->required();
        c->add_option("--label", ingest.label, "Row label in reports");
        c->callback([&ingest, tool] { ingest.tool = tool; });
        return c;
    };
    auto* c_codeql = add_ingest("ingest-codeql", SastTool::codeql, "Convert a CodeQL CSV into an archive");
    auto* c_spotbugs = add_ingest("ingest-spotbugs", SastTool::spotbugs, "Convert SpotBugs text output into an archive");

    // eval
    app::EvalArgs eval;
    bool no_parents = false, no_children = false, direct_children = false, transitive_parents = false,
         allow_pillar = false;
    auto* c_eval = cli.add_subcommand("eval", "Score an archive against the manifest");
    c_eval->add_option("--archive", eval.archive, "results.ndjson")->required();
    c_eval->add_option("--manifest", eval.manifest, "Manifest produced by prep")->required();
    c_eval->add_option("--graph", eval.graph, "CWE hierarchy snapshot CSV");
    c_eval->add_option("--out", eval.out, "Scored output file")->required();
    c_eval->add_flag("--no-parents", no_parents, "Do not accept parents of the expected CWE");
    c_eval->add_flag("--no-children", no_children, "Do not accept descendants of the expected CWE");
    c_eval->add_flag("--direct-children", direct_children, "Accept only direct children");
    c_eval->add_flag("--transitive-parents", transitive_parents, "Accept all ancestors, not only direct parents");
    c_eval->add_flag("--allow-pillar", allow_pillar, "Accept pillar-level parents");

    // report
    app::ReportArgs report;
    bool overview_only = false;
    std::string csv_out;
    auto* c_report = cli.add_subcommand("report", "Compare scored files side by side");
    c_report->add_option("scored", report.scored, "Scored files")->required();
    c_report->add_flag("--overview-only", overview_only, "Skip per-CWE tables");
    c_report->add_option("--csv", csv_out, "Also write the tables as CSV");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = cli.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (c_prep->parsed()) {
            if (per_cwe) prep.per_cwe = per_cwe;
            if (!lexicon.empty()) prep.lexicon = fs::path(lexicon);
            app::cmd_prep(prep, std::cout);
            return 0;
        }
        if (c_scan->parsed()) {
            auto id = parse_strategy_id(strategy);
            if (!id) throw ConfigError("unknown strategy '" + strategy + "'");
            scan.strategy = *id;
            auto m = parse_replay_mode(mode);
            if (!m) throw ConfigError("unknown mode '" + mode + "'");
            scan.mode = *m;
            if (!replay_dir.empty()) scan.replay_dir = fs::path(replay_dir);
            if (!max_spend.empty()) {
                auto money = Money::parse(max_spend);
                if (!money) throw ConfigError("invalid --max-spend '" + max_spend + "'");
                scan.max_spend = *money;
            }
            if (max_attempts < 1) throw ConfigError("--max-attempts must be at least 1");
            scan.retry.max_attempts = max_attempts;
            SteadyClock clock;
            const auto sum = app::cmd_scan(scan, nullptr, clock, std::cout);
            return (sum.errors || sum.budget_stopped || sum.aborted) ? 1 : 0;
        }
        if (c_codeql->parsed() || c_spotbugs->parsed()) {
            app::cmd_ingest(ingest, std::cout);
            return 0;
        }
        if (c_eval->parsed()) {
            eval.policy = policy_from(no_parents, no_children, direct_children, transitive_parents, allow_pillar);
            app::cmd_eval(eval, std::cout);
            return 0;
        }
        if (c_report->parsed()) {
            report.per_cwe = !overview_only;
            if (!csv_out.empty()) report.csv_out = fs::path(csv_out);
            std::cout << app::cmd_report(report);
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
