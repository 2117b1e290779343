#pragma once

#include "llmsast/cwe_id.hpp"
#include "llmsast/evaluator.hpp"
#include "llmsast/llm_gateway.hpp"
#include "llmsast/money.hpp"
#include "llmsast/strategy_engine.hpp"
#include "llmsast/verdict_parser.hpp"

#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace llmsast {

inline constexpr int kArchiveSchemaVersion = 1;

/// First line of a result archive.
struct ArchiveHeader {
    int schema_version = kArchiveSchemaVersion;
    std::string source;   ///< "llm", "codeql" or "spotbugs"
    std::string label;    ///< row label in reports
    std::string strategy; ///< empty for SAST archives
    std::string model;    ///< empty for SAST archives
    std::string manifest_digest;

    bool operator==(const ArchiveHeader&) const = default;
};

/// One case's outcome. Scoring works from these alone, so a different match
/// policy never needs the model again.
struct ArchiveRecord {
    std::string case_id;
    std::string case_digest;
    ScanStatus status = ScanStatus::ok;
    std::string error;
    std::set<CweId> reported_cwes;
    bool final_decision = false;
    bool low_confidence = false;
    std::vector<Verdict> verdicts;
    std::vector<std::string> diagnostics;
    std::uint64_t calls = 0;
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
    Money cost;
    std::int64_t wall_time_ms = 0;
    std::string transcript_digest; ///< empty when there is no transcript

    bool operator==(const ArchiveRecord&) const = default;
};

/// Newline-delimited JSON: the header, then records. On load the last record
/// of a case wins, and records come back sorted by case_id.
struct Archive {
    ArchiveHeader header;
    std::vector<ArchiveRecord> records;

    const ArchiveRecord* find(std::string_view case_id) const;
};

std::string header_line(const ArchiveHeader& h);
std::string record_line(const ArchiveRecord& r);
Archive parse_archive(std::string_view text);
Archive load_archive(const std::filesystem::path& path);
/// Sorted by case_id, one record per case.
void write_archive(const std::filesystem::path& path, const Archive& archive);

ArchiveRecord record_from_scan(const ScanResult& r, std::string case_digest);

std::string transcript_json(const Transcript& t);
Transcript parse_transcript_json(std::string_view text);
std::string transcript_digest(const Transcript& t);

// ---------------------------------------------------------------- scored

struct ScoredRow {
    Classification c;
    bool vulnerable = false;
};

/// Output of scoring one archive against a manifest.
struct ScoredFile {
    std::string label;
    std::string source;
    std::string manifest_digest;
    std::vector<ScoredRow> rows; ///< sorted by case_id
    std::size_t excluded_overflow = 0;
    std::size_t excluded_error = 0;
    std::size_t missing = 0;
};

std::string scored_json(const ScoredFile& s);
ScoredFile parse_scored_json(std::string_view text);

} // namespace llmsast
