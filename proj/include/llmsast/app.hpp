#pragma once

#include "llmsast/archive.hpp"
#include "llmsast/corpus_prep.hpp"
#include "llmsast/cwe_graph.hpp"
#include "llmsast/llm_gateway.hpp"
#include "llmsast/sast_ingest.hpp"
#include "llmsast/strategy_engine.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

/// The operations behind the command-line subcommands. Each writes its
/// human-readable progress to `out` and throws on configuration errors.
namespace llmsast::app {

/// Directory holding config/, templates/ and data/ of the source tree.
std::filesystem::path default_data_root();

/// Exclusive lock on an output directory (`<dir>/.lock`, created with
/// O_EXCL). Released on destruction.
class DirLock {
public:
    explicit DirLock(const std::filesystem::path& dir);
    ~DirLock();
    DirLock(const DirLock&) = delete;
    DirLock& operator=(const DirLock&) = delete;

private:
    std::filesystem::path path_;
};

// ---------------------------------------------------------------- prep

struct PrepArgs {
    std::filesystem::path raw_root;
    std::filesystem::path out_root;
    std::uint64_t seed = 0;
    std::optional<std::uint32_t> per_cwe;
    std::optional<std::filesystem::path> lexicon; ///< default: built-in rules
};

PrepReport cmd_prep(const PrepArgs& args, std::ostream& out);

// ---------------------------------------------------------------- scan

struct ScanArgs {
    std::filesystem::path corpus_root;
    std::filesystem::path manifest;
    StrategyId strategy = StrategyId::b;
    std::string model = "heuristic";
    std::filesystem::path models_file;    ///< default: <data>/config/models.json
    std::filesystem::path templates_dir;  ///< default: <data>/templates
    std::filesystem::path out_dir;
    std::size_t concurrency = 1;
    double rate_limit = 0;
    ReplayMode mode = ReplayMode::live;
    std::optional<std::filesystem::path> replay_dir;
    std::optional<Money> max_spend;
    std::string label; ///< default: "p_<strategy> [<model>]"
    RetryPolicy retry;
    std::string package_override = "testcases"; ///< package shown to the model; empty drops it
};

struct ScanSummary {
    std::size_t total = 0;          ///< cases in the manifest
    std::size_t resumed = 0;        ///< already in the archive, not rerun
    std::size_t completed = 0;      ///< run in this invocation with status ok
    std::size_t overflow = 0;
    std::size_t errors = 0;
    bool budget_stopped = false;
    bool aborted = false;           ///< a terminal provider error stopped the run
    std::uint64_t gateway_calls = 0; ///< transcript steps produced in this invocation
    std::uint64_t network_calls = 0;
    std::uint64_t replay_hits = 0;
    Money live_spend;
    Money archive_cost;             ///< total cost recorded in the final archive
};

/// `backend` and `clock` are injectable for tests; pass nullptr for the
/// default provider router.
ScanSummary cmd_scan(const ScanArgs& args, std::shared_ptr<Backend> backend, Clock& clock, std::ostream& out);

std::string default_label(StrategyId strategy, const std::string& model);

// ---------------------------------------------------------------- ingest

struct IngestArgs {
    SastTool tool = SastTool::codeql;
    std::filesystem::path report;
    std::filesystem::path manifest;
    std::filesystem::path rule_map; ///< default: <data>/config/rule_cwe_map.csv
    std::filesystem::path graph;    ///< default: <data>/data/cwe1000_snapshot.csv
    std::filesystem::path out_dir;
    std::string label; ///< default: "CodeQL" / "SpotBugs"
};

struct IngestSummary {
    std::size_t findings = 0;
    std::size_t unmapped = 0;
    std::size_t orphans = 0;
    std::size_t cases_with_reports = 0;
    std::set<CweId> undetectable;
};

IngestSummary cmd_ingest(const IngestArgs& args, std::ostream& out);

// ---------------------------------------------------------------- eval

struct EvalArgs {
    std::filesystem::path archive;
    std::filesystem::path manifest;
    std::filesystem::path graph; ///< default: <data>/data/cwe1000_snapshot.csv
    MatchPolicy policy;
    std::filesystem::path out; ///< scored file
};

ScoredFile cmd_eval(const EvalArgs& args, std::ostream& out);

/// Scores an archive in memory. Missing, overflowed and failed cases are
/// counted and left out of the matrix.
ScoredFile score_archive(const Archive& archive, const CorpusManifest& manifest, const CweGraph& graph,
                         const MatchPolicy& policy);

// ---------------------------------------------------------------- report

struct ReportArgs {
    std::vector<std::filesystem::path> scored;
    bool per_cwe = true;
    std::optional<std::filesystem::path> csv_out;
};

/// Overview table (one row per scored file) plus per-CWE breakdowns.
/// Throws ConfigError naming the differences when the files were scored
/// against different manifests.
std::string cmd_report(const ReportArgs& args);

std::string render_report(const std::vector<ScoredFile>& files, bool per_cwe, std::string* csv = nullptr);

} // namespace llmsast::app
