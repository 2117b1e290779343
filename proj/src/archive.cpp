#include "llmsast/archive.hpp"

#include "llmsast/digest.hpp"
#include "llmsast/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>

namespace llmsast {

using nlohmann::json;

namespace {

json cwe_json(const std::optional<CweId>& c) { return c ? json(c->str()) : json(nullptr); }

std::optional<CweId> cwe_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    auto c = CweId::parse(j.get<std::string>());
    if (!c) throw IntegrityError("archive: bad CWE " + j.dump());
    return c;
}

json opt_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

std::optional<std::string> opt_string_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<std::string>();
}

Money money_from(const json& j) {
    auto m = Money::parse(j.get<std::string>());
    if (!m) throw IntegrityError("archive: bad amount " + j.dump());
    return *m;
}

json verdict_json(const Verdict& v) {
    return {{"present", to_string(v.present)},        {"cwe", cwe_json(v.cwe)},
            {"name", opt_string(v.name)},             {"explanation", opt_string(v.explanation)},
            {"raw_decision", v.raw_decision_token},   {"malformed", v.malformed}};
}

Verdict verdict_from(const json& j) {
    Verdict v;
    v.present = j.at("present").get<std::string>() == to_string(Decision::yes) ? Decision::yes : Decision::no;
    v.cwe = cwe_from(j.at("cwe"));
    v.name = opt_string_from(j.at("name"));
    v.explanation = opt_string_from(j.at("explanation"));
    v.raw_decision_token = j.at("raw_decision").get<std::string>();
    v.malformed = j.at("malformed").get<bool>();
    return v;
}

json usage_json(const UsageRecord& u) {
    return {{"input_tokens", u.input_tokens},
            {"output_tokens", u.output_tokens},
            {"wall_time_ms", u.wall_time_ms},
            {"cost", u.cost.str()}};
}

UsageRecord usage_from(const json& j) {
    return {j.at("input_tokens").get<std::uint64_t>(), j.at("output_tokens").get<std::uint64_t>(),
            j.at("wall_time_ms").get<std::int64_t>(), money_from(j.at("cost"))};
}

json message_json(const ChatMessage& m) { return {{"role", to_string(m.role)}, {"content", m.content}}; }

ChatMessage message_from(const json& j) {
    auto role = parse_role(j.at("role").get<std::string>());
    if (!role) throw IntegrityError("transcript: bad role " + j.at("role").dump());
    return {*role, j.at("content").get<std::string>()};
}

template <class F>
auto guarded(std::string_view what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw IntegrityError(std::string(what) + ": " + e.what());
    }
}

} // namespace

const ArchiveRecord* Archive::find(std::string_view case_id) const {
    auto it = std::lower_bound(records.begin(), records.end(), case_id,
                               [](const ArchiveRecord& r, std::string_view id) { return r.case_id < id; });
    return it != records.end() && it->case_id == case_id ? &*it : nullptr;
}

std::string header_line(const ArchiveHeader& h) {
    const json j{{"kind", "header"},         {"schema_version", h.schema_version}, {"source", h.source},
                 {"label", h.label},         {"strategy", h.strategy},             {"model", h.model},
                 {"manifest_digest", h.manifest_digest}};
    return j.dump();
}

std::string record_line(const ArchiveRecord& r) {
    json cwes = json::array();
    for (CweId c : r.reported_cwes) cwes.push_back(c.str());
    json verdicts = json::array();
    for (const auto& v : r.verdicts) verdicts.push_back(verdict_json(v));
    const json j{{"kind", "result"},
                 {"case_id", r.case_id},
                 {"case_digest", r.case_digest},
                 {"status", to_string(r.status)},
                 {"error", r.error},
                 {"reported_cwes", cwes},
                 {"final_decision", r.final_decision},
                 {"low_confidence", r.low_confidence},
                 {"verdicts", verdicts},
                 {"diagnostics", r.diagnostics},
                 {"calls", r.calls},
                 {"input_tokens", r.input_tokens},
                 {"output_tokens", r.output_tokens},
                 {"cost", r.cost.str()},
                 {"wall_time_ms", r.wall_time_ms},
                 {"transcript_digest", r.transcript_digest}};
    return j.dump();
}

Archive parse_archive(std::string_view text) {
    Archive a;
    bool have_header = false;
    std::map<std::string, ArchiveRecord> latest;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        const std::string_view line = text.substr(start, nl - start);
        start = nl + 1;
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception&) {
            // A torn final line is what an interrupted append leaves behind.
            if (start >= text.size()) break;
            throw IntegrityError("archive line " + std::to_string(line_no) + " is not JSON");
        }
        guarded("archive line " + std::to_string(line_no), [&] {
            const auto kind = j.at("kind").get<std::string>();
            if (kind == "header") {
                if (have_header) throw IntegrityError("archive has two headers");
                a.header.schema_version = j.at("schema_version").get<int>();
                if (a.header.schema_version != kArchiveSchemaVersion) {
                    throw IntegrityError("archive schema_version " + std::to_string(a.header.schema_version) +
                                         " is not supported");
                }
                a.header.source = j.at("source").get<std::string>();
                a.header.label = j.at("label").get<std::string>();
                a.header.strategy = j.at("strategy").get<std::string>();
                a.header.model = j.at("model").get<std::string>();
                a.header.manifest_digest = j.at("manifest_digest").get<std::string>();
                have_header = true;
                return;
            }
            if (kind != "result") throw IntegrityError("unknown record kind '" + kind + "'");
            if (!have_header) throw IntegrityError("archive record before header");
            ArchiveRecord r;
            r.case_id = j.at("case_id").get<std::string>();
            r.case_digest = j.at("case_digest").get<std::string>();
            auto st = parse_scan_status(j.at("status").get<std::string>());
            if (!st) throw IntegrityError("bad status");
            r.status = *st;
            r.error = j.at("error").get<std::string>();
            for (const auto& c : j.at("reported_cwes")) r.reported_cwes.insert(*cwe_from(c));
            r.final_decision = j.at("final_decision").get<bool>();
            r.low_confidence = j.at("low_confidence").get<bool>();
            for (const auto& v : j.at("verdicts")) r.verdicts.push_back(verdict_from(v));
            r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
            r.calls = j.at("calls").get<std::uint64_t>();
            r.input_tokens = j.at("input_tokens").get<std::uint64_t>();
            r.output_tokens = j.at("output_tokens").get<std::uint64_t>();
            r.cost = money_from(j.at("cost"));
            r.wall_time_ms = j.at("wall_time_ms").get<std::int64_t>();
            r.transcript_digest = j.at("transcript_digest").get<std::string>();
            latest[r.case_id] = std::move(r);
        });
    }
    if (!have_header) throw IntegrityError("archive has no header");
    for (auto& [id, r] : latest) a.records.push_back(std::move(r));
    return a;
}

Archive load_archive(const std::filesystem::path& path) { return parse_archive(read_file(path)); }

void write_archive(const std::filesystem::path& path, const Archive& archive) {
    std::map<std::string, const ArchiveRecord*> sorted;
    for (const auto& r : archive.records) sorted[r.case_id] = &r;
    std::string out = header_line(archive.header) + "\n";
    for (const auto& [id, r] : sorted) out += record_line(*r) + "\n";
    write_file(path, out);
}

ArchiveRecord record_from_scan(const ScanResult& r, std::string case_digest) {
    ArchiveRecord a;
    a.case_id = r.case_id;
    a.case_digest = std::move(case_digest);
    a.status = r.status;
    a.error = r.error;
    a.reported_cwes = r.reported_cwes;
    a.final_decision = r.final_decision;
    a.low_confidence = r.low_confidence;
    a.verdicts = r.verdicts;
    a.diagnostics = r.diagnostics;
    a.calls = r.transcript.size();
    a.input_tokens = r.transcript.total_input_tokens();
    a.output_tokens = r.transcript.total_output_tokens();
    a.cost = r.transcript.total_cost();
    a.wall_time_ms = r.transcript.total_wall_time_ms();
    if (r.transcript.size()) a.transcript_digest = transcript_digest(r.transcript);
    return a;
}

std::string transcript_json(const Transcript& t) {
    json steps = json::array();
    for (const auto& s : t.steps()) {
        json sent = json::array();
        for (const auto& m : s.sent) sent.push_back(message_json(m));
        steps.push_back({{"sent", sent},
                         {"response", message_json(s.response)},
                         {"usage", usage_json(s.usage)},
                         {"replay_key", s.replay_key}});
    }
    return json{{"schema_version", kArchiveSchemaVersion}, {"steps", steps}}.dump();
}

Transcript parse_transcript_json(std::string_view text) {
    return guarded("transcript", [&] {
        const json j = json::parse(text);
        Transcript t;
        for (const auto& s : j.at("steps")) {
            TranscriptStep step;
            for (const auto& m : s.at("sent")) step.sent.push_back(message_from(m));
            step.response = message_from(s.at("response"));
            step.usage = usage_from(s.at("usage"));
            step.replay_key = s.at("replay_key").get<std::string>();
            t.append(std::move(step));
        }
        return t;
    });
}

std::string transcript_digest(const Transcript& t) { return sha256_hex(transcript_json(t)); }

// ---------------------------------------------------------------- scored

std::string scored_json(const ScoredFile& s) {
    std::string out = json{{"kind", "scored"},
                           {"schema_version", kArchiveSchemaVersion},
                           {"label", s.label},
                           {"source", s.source},
                           {"manifest_digest", s.manifest_digest},
                           {"excluded_overflow", s.excluded_overflow},
                           {"excluded_error", s.excluded_error},
                           {"missing", s.missing}}
                          .dump() +
                      "\n";
    for (const auto& r : s.rows) {
        out += json{{"case_id", r.c.case_id},
                    {"expected_cwe", r.c.expected_cwe.str()},
                    {"vulnerable", r.vulnerable},
                    {"outcome", to_string(r.c.outcome)},
                    {"matched_cwe", cwe_json(r.c.matched_cwe)},
                    {"unrelated_reports", r.c.unrelated_reports},
                    {"cost", r.c.cost.str()},
                    {"wall_time_ms", r.c.wall_time_ms}}
                   .dump();
        out += "\n";
    }
    return out;
}

ScoredFile parse_scored_json(std::string_view text) {
    ScoredFile s;
    bool have_header = false;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        const std::string_view line = text.substr(start, nl - start);
        start = nl + 1;
        if (line.empty()) continue;
        guarded("scored file", [&] {
            const json j = json::parse(line);
            if (!have_header) {
                if (j.value("kind", "") != "scored") throw IntegrityError("not a scored file");
                if (j.at("schema_version").get<int>() != kArchiveSchemaVersion) {
                    throw IntegrityError("scored file schema_version is not supported");
                }
                s.label = j.at("label").get<std::string>();
                s.source = j.at("source").get<std::string>();
                s.manifest_digest = j.at("manifest_digest").get<std::string>();
                s.excluded_overflow = j.at("excluded_overflow").get<std::size_t>();
                s.excluded_error = j.at("excluded_error").get<std::size_t>();
                s.missing = j.at("missing").get<std::size_t>();
                have_header = true;
                return;
            }
            ScoredRow r;
            r.c.case_id = j.at("case_id").get<std::string>();
            r.c.expected_cwe = *cwe_from(j.at("expected_cwe"));
            r.vulnerable = j.at("vulnerable").get<bool>();
            const auto o = j.at("outcome").get<std::string>();
            if (o == "TP") r.c.outcome = Outcome::tp;
            else if (o == "FP") r.c.outcome = Outcome::fp;
            else if (o == "TN") r.c.outcome = Outcome::tn;
            else if (o == "FN") r.c.outcome = Outcome::fn;
            else throw IntegrityError("bad outcome " + o);
            r.c.matched_cwe = cwe_from(j.at("matched_cwe"));
            r.c.unrelated_reports = j.at("unrelated_reports").get<std::size_t>();
            r.c.cost = money_from(j.at("cost"));
            r.c.wall_time_ms = j.at("wall_time_ms").get<std::int64_t>();
            r.c.strategy = s.label;
            s.rows.push_back(std::move(r));
        });
    }
    if (!have_header) throw IntegrityError("scored file has no header");
    return s;
}

} // namespace llmsast
