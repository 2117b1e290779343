#include "llmsast/app.hpp"

#include "llmsast/digest.hpp"
#include "llmsast/evaluator.hpp"
#include "llmsast/io.hpp"
#include "llmsast/log.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <fcntl.h>
#include <fstream>
#include <mutex>
#include <thread>
#include <unistd.h>

namespace llmsast::app {

namespace fs = std::filesystem;

std::filesystem::path default_data_root() {
    if (const char* env = std::getenv("LLMSAST_DATA_ROOT"); env && *env) return env;
    return LLMSAST_DATA_DIR;
}

namespace {

fs::path or_default(const fs::path& p, const fs::path& fallback) { return p.empty() ? fallback : p; }

fs::path graph_path(const fs::path& p) { return or_default(p, default_data_root() / "data" / "cwe1000_snapshot.csv"); }

void require_file(const fs::path& p, std::string_view what) {
    if (!fs::is_regular_file(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
}

} // namespace

// ---------------------------------------------------------------- lock

DirLock::DirLock(const fs::path& dir) : path_(dir / ".lock") {
    fs::create_directories(dir);
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
        if (errno == EEXIST) {
            throw ConfigError("output directory is locked: " + path_.string() +
                              " exists (another run is active, or remove the stale lock)");
        }
        throw ConfigError("cannot create lock " + path_.string() + ": " + std::strerror(errno));
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
}

DirLock::~DirLock() {
    std::error_code ec;
    fs::remove(path_, ec);
}

// ---------------------------------------------------------------- prep

PrepReport cmd_prep(const PrepArgs& args, std::ostream& out) {
    if (!fs::is_directory(args.raw_root)) throw ConfigError("raw corpus directory not found: " + args.raw_root.string());
    PrepOptions opts;
    opts.seed = args.seed;
    opts.per_cwe = args.per_cwe;
    if (args.lexicon) opts.lexicon = HintLexicon::load(*args.lexicon);
    DirLock lock(args.out_root);
    PrepReport r = prepare_corpus(args.raw_root, args.out_root, opts);
    out << "normalized " << r.all.cases.size() << " files, excluded " << r.excluded.size() << "\n";
    for (const auto& x : r.excluded) out << "  excluded " << x.path << ": " << x.reason << "\n";
    for (const auto& [cwe, counts] : r.selected.counts()) {
        out << "  " << cwe.str() << ": " << counts.first << " vulnerable, " << counts.second << " clean\n";
    }
    out << "selected " << r.selected.cases.size() << " cases, manifest digest " << r.selected.digest() << "\n";
    return r;
}

// ---------------------------------------------------------------- scan

std::string default_label(StrategyId strategy, const std::string& model) {
    std::string s(to_string(strategy));
    std::replace(s.begin(), s.end(), '_', '-');
    return "p_" + s + " [" + model + "]";
}

ScanSummary cmd_scan(const ScanArgs& args, std::shared_ptr<Backend> backend, Clock& clock, std::ostream& out) {
    if (args.concurrency < 1) throw ConfigError("concurrency must be at least 1");
    const fs::path data = default_data_root();
    const fs::path templates_dir = or_default(args.templates_dir, data / "templates");
    require_file(args.manifest, "manifest");
    const CorpusManifest manifest = load_manifest(args.manifest);
    const TemplateLibrary templates = TemplateLibrary::load(templates_dir);
    const StrategyRegistry registry = StrategyRegistry::load(templates_dir / "registry.json", templates);
    const StrategySpec& spec = registry.get(args.strategy);
    const auto profiles = load_model_profiles(or_default(args.models_file, data / "config" / "models.json"));
    auto pit = profiles.find(args.model);
    if (pit == profiles.end()) throw ConfigError("unknown model profile '" + args.model + "'");
    const ModelProfile& profile = pit->second;

    StrategyEngine::Options eng_opts;
    eng_opts.package_override = args.package_override;
    if (spec.few_shot_set) {
        eng_opts.few_shot[*spec.few_shot_set] =
            load_few_shot_examples(templates_dir / "few_shot" / (*spec.few_shot_set + ".json"));
    }

    if (!backend) backend = make_default_router();
    Gateway::Options gw_opts;
    gw_opts.mode = args.mode;
    gw_opts.replay_dir = args.replay_dir;
    gw_opts.rate_limit_per_second = args.rate_limit;
    gw_opts.retry = args.retry;
    Gateway gateway(gw_opts, backend, clock);
    StrategyEngine engine(templates, gateway, profile, eng_opts);

    DirLock lock(args.out_dir);
    const fs::path archive_path = args.out_dir / "results.ndjson";
    ArchiveHeader header;
    header.source = "llm";
    header.label = args.label.empty() ? default_label(args.strategy, args.model) : args.label;
    header.strategy = std::string(to_string(args.strategy));
    header.model = args.model;
    header.manifest_digest = manifest.digest();

    ScanSummary sum;
    sum.total = manifest.cases.size();
    std::set<std::string> done;
    if (fs::exists(archive_path)) {
        const Archive existing = load_archive(archive_path);
        if (!(existing.header == header)) {
            throw ConfigError("archive " + archive_path.string() +
                              " belongs to a different run (strategy, model, label or manifest differ)");
        }
        for (const auto& r : existing.records) {
            const auto* e = manifest.find(r.case_id);
            if (e && e->digest == r.case_digest && r.status != ScanStatus::error) done.insert(r.case_id);
        }
        // Rewrite so a torn trailing line from an interrupted run is dropped.
        write_archive(archive_path, existing);
    } else {
        write_file(archive_path, header_line(header) + "\n");
    }
    sum.resumed = done.size();

    std::vector<const ManifestEntry*> pending;
    for (const auto& e : manifest.cases) {
        if (!done.count(e.case_id)) pending.push_back(&e);
    }
    out << "scan " << header.label << ": " << pending.size() << " to run, " << sum.resumed << " resumed\n";

    std::ofstream archive_out(archive_path, std::ios::binary | std::ios::app);
    if (!archive_out) throw ConfigError("cannot append to " + archive_path.string());

    std::mutex mu;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    std::exception_ptr fatal;
    std::size_t finished = 0;

    auto budget_hit = [&] {
        return args.max_spend && args.mode != ReplayMode::replay && !(gateway.live_spend() < *args.max_spend);
    };

    auto worker = [&] {
        while (!stop) {
            if (budget_hit()) {
                std::lock_guard g(mu);
                sum.budget_stopped = true;
                stop = true;
                break;
            }
            const std::size_t i = next++;
            if (i >= pending.size()) break;
            const ManifestEntry& entry = *pending[i];
            ScanResult result;
            try {
                const TestCase tc = load_case(args.corpus_root, entry);
                if (sha256_hex(tc.source_text) != entry.digest) {
                    throw IntegrityError(entry.case_id + ": file digest does not match the manifest");
                }
                result = engine.run(entry.case_id, tc.source_text, spec);
            } catch (const CaseError& e) {
                result = ScanResult{};
                result.case_id = entry.case_id;
                result.strategy = spec.id;
                result.model = profile.model_name;
                result.status = ScanStatus::error;
                result.error = e.what();
                if (e.terminal()) {
                    std::lock_guard g(mu);
                    sum.aborted = true;
                    stop = true;
                }
            } catch (...) {
                std::lock_guard g(mu);
                if (!fatal) fatal = std::current_exception();
                stop = true;
                break;
            }
            if (result.transcript.size()) {
                write_file(args.out_dir / "transcripts" / (entry.case_id + ".json"),
                           transcript_json(result.transcript) + "\n");
            }
            const ArchiveRecord rec = record_from_scan(result, entry.digest);
            std::lock_guard g(mu);
            archive_out << record_line(rec) << '\n';
            archive_out.flush();
            sum.gateway_calls += rec.calls;
            switch (rec.status) {
            case ScanStatus::ok: ++sum.completed; break;
            case ScanStatus::skipped_overflow: ++sum.overflow; break;
            case ScanStatus::error: ++sum.errors; log::error(rec.error); break;
            }
            ++finished;
            out << "[" << finished << "/" << pending.size() << "] " << rec.case_id << " " << to_string(rec.status)
                << (rec.final_decision ? " positive" : " negative") << " $" << rec.cost.str()
                << " live total $" << gateway.live_spend().str() << "\n";
        }
    };

    std::vector<std::thread> pool;
    const std::size_t n = std::min(args.concurrency, std::max<std::size_t>(pending.size(), 1));
    for (std::size_t k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    archive_out.close();

    // Canonical form: sorted, one record per case.
    const Archive final_archive = load_archive(archive_path);
    write_archive(archive_path, final_archive);
    if (fatal) std::rethrow_exception(fatal);

    for (const auto& r : final_archive.records) sum.archive_cost += r.cost;
    sum.network_calls = gateway.network_calls();
    sum.replay_hits = gateway.replay_hits();
    sum.live_spend = gateway.live_spend();
    out << "done: " << sum.completed << " ok, " << sum.overflow << " skipped-overflow, " << sum.errors
        << " errors; calls " << sum.gateway_calls << " (network " << sum.network_calls << ", replayed "
        << sum.replay_hits << "); live spend $" << sum.live_spend.str() << "; archive cost $"
        << sum.archive_cost.str() << "\n";
    if (sum.budget_stopped) out << "stopped: spend ceiling reached, archive is partial\n";
    if (sum.aborted) out << "stopped: provider refused the requests\n";
    return sum;
}

// ---------------------------------------------------------------- ingest

IngestSummary cmd_ingest(const IngestArgs& args, std::ostream& out) {
    const fs::path data = default_data_root();
    require_file(args.report, "report");
    require_file(args.manifest, "manifest");
    const CorpusManifest manifest = load_manifest(args.manifest);
    const RuleCweMap rules = RuleCweMap::load(or_default(args.rule_map, data / "config" / "rule_cwe_map.csv"));
    const CweGraph graph = load_cwe_graph(graph_path(args.graph));

    const std::string text = read_file(args.report);
    std::vector<SastFinding> findings;
    if (args.tool == SastTool::codeql) {
        findings = parse_codeql_csv(text);
    } else {
        auto rep = parse_spotbugs_text(text);
        findings = std::move(rep.findings);
    }
    IngestSummary sum;
    sum.findings = findings.size();
    const MappingResult mapped = map_findings(findings, rules, manifest);
    sum.unmapped = mapped.unmapped;
    sum.orphans = mapped.orphans;
    sum.undetectable = undetectable_cwes(manifest, rules, args.tool, graph);

    Archive a;
    a.header.source = std::string(to_string(args.tool));
    a.header.label = !args.label.empty() ? args.label : args.tool == SastTool::codeql ? "CodeQL" : "SpotBugs";
    a.header.manifest_digest = manifest.digest();
    for (const auto& e : manifest.cases) {
        ArchiveRecord r;
        r.case_id = e.case_id;
        r.case_digest = e.digest;
        if (auto it = mapped.per_case.find(e.case_id); it != mapped.per_case.end()) {
            r.reported_cwes = it->second;
            ++sum.cases_with_reports;
        }
        r.final_decision = !r.reported_cwes.empty();
        a.records.push_back(std::move(r));
    }
    DirLock lock(args.out_dir);
    write_archive(args.out_dir / "results.ndjson", a);

    out << a.header.label << ": " << sum.findings << " findings, " << sum.unmapped << " unmapped, " << sum.orphans
        << " outside the manifest; " << sum.cases_with_reports << " cases with reports\n";
    if (!sum.undetectable.empty()) {
        out << "structurally undetectable (no mapped rule can match):";
        for (CweId c : sum.undetectable) out << " " << c.str();
        out << "\n";
    }
    return sum;
}

// ---------------------------------------------------------------- eval

ScoredFile score_archive(const Archive& archive, const CorpusManifest& manifest, const CweGraph& graph,
                         const MatchPolicy& policy) {
    ScoredFile s;
    s.label = archive.header.label;
    s.source = archive.header.source;
    s.manifest_digest = manifest.digest();
    for (const auto& e : manifest.cases) {
        const ArchiveRecord* r = archive.find(e.case_id);
        if (!r) {
            ++s.missing;
            continue;
        }
        if (r->status == ScanStatus::skipped_overflow) {
            ++s.excluded_overflow;
            continue;
        }
        if (r->status == ScanStatus::error) {
            ++s.excluded_error;
            continue;
        }
        ScoredRow row;
        row.vulnerable = e.vulnerable;
        row.c = classify({e.case_id, e.expected_cwe, e.vulnerable}, r->reported_cwes, graph, policy);
        row.c.strategy = s.label;
        row.c.cost = r->cost;
        row.c.wall_time_ms = r->wall_time_ms;
        s.rows.push_back(std::move(row));
    }
    return s;
}

ScoredFile cmd_eval(const EvalArgs& args, std::ostream& out) {
    require_file(args.archive, "archive");
    require_file(args.manifest, "manifest");
    const Archive archive = load_archive(args.archive);
    const CorpusManifest manifest = load_manifest(args.manifest);
    if (archive.header.manifest_digest != manifest.digest()) {
        throw ConfigError("archive " + args.archive.string() + " was produced for a different manifest");
    }
    const CweGraph graph = load_cwe_graph(graph_path(args.graph));
    ScoredFile s = score_archive(archive, manifest, graph, args.policy);
    write_file(args.out, scored_json(s));
    out << render_report({s}, false);
    return s;
}

// ---------------------------------------------------------------- report

namespace {

std::vector<Classification> classifications(const ScoredFile& s) {
    std::vector<Classification> v;
    v.reserve(s.rows.size());
    for (const auto& r : s.rows) v.push_back(r.c);
    return v;
}

void check_same_manifest(const std::vector<ScoredFile>& files) {
    for (std::size_t k = 1; k < files.size(); ++k) {
        if (files[k].manifest_digest == files[0].manifest_digest) continue;
        std::set<std::string> a, b;
        for (const auto& r : files[0].rows) a.insert(r.c.case_id);
        for (const auto& r : files[k].rows) b.insert(r.c.case_id);
        std::vector<std::string> only_a, only_b;
        std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(only_a));
        std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(only_b));
        auto sample = [](const std::vector<std::string>& v) {
            std::string s;
            for (std::size_t i = 0; i < v.size() && i < 5; ++i) s += (i ? ", " : "") + v[i];
            if (v.size() > 5) s += ", ...";
            return s;
        };
        throw ConfigError("refusing to compare results scored against different manifests:\n  " + files[0].label +
                          ": manifest " + files[0].manifest_digest.substr(0, 12) + ", " + std::to_string(a.size()) +
                          " scored cases\n  " + files[k].label + ": manifest " +
                          files[k].manifest_digest.substr(0, 12) + ", " + std::to_string(b.size()) +
                          " scored cases\n  only in the first: " + std::to_string(only_a.size()) + " [" +
                          sample(only_a) + "]\n  only in the second: " + std::to_string(only_b.size()) + " [" +
                          sample(only_b) + "]");
    }
}

} // namespace

std::string render_report(const std::vector<ScoredFile>& files, bool per_cwe, std::string* csv) {
    check_same_manifest(files);
    std::vector<ReportRow> overview;
    std::vector<ReportRow> csv_rows;
    std::string notes;
    for (const auto& f : files) {
        const auto g = aggregate(classifications(f), GroupBy::overall);
        ReportRow row{f.label, g.empty() ? GroupSummary{} : g.begin()->second};
        overview.push_back(row);
        csv_rows.push_back(row);
        if (f.excluded_overflow || f.excluded_error || f.missing) {
            notes += f.label + ": not scored: " + std::to_string(f.excluded_overflow) + " skipped-overflow, " +
                     std::to_string(f.excluded_error) + " errors, " + std::to_string(f.missing) + " missing\n";
        }
    }
    std::string text = render_text_table(overview, "Results overview");
    text += notes;
    if (per_cwe) {
        for (const auto& f : files) {
            std::vector<ReportRow> rows;
            for (const auto& [key, summary] : aggregate(classifications(f), GroupBy::per_cwe)) {
                rows.push_back({key, summary});
                csv_rows.push_back({f.label + " " + key, summary});
            }
            text += "\n" + render_text_table(rows, "Per-CWE results: " + f.label);
        }
    }
    if (csv) *csv = render_csv_table(csv_rows);
    return text;
}

std::string cmd_report(const ReportArgs& args) {
    if (args.scored.empty()) throw ConfigError("report needs at least one scored file");
    std::vector<ScoredFile> files;
    for (const auto& p : args.scored) {
        require_file(p, "scored file");
        files.push_back(parse_scored_json(read_file(p)));
    }
    std::string csv;
    std::string text = render_report(files, args.per_cwe, &csv);
    if (args.csv_out) write_file(*args.csv_out, csv);
    return text;
}

} // namespace llmsast::app
