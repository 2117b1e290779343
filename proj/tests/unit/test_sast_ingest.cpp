#include "test_support.hpp"

#include "llmsast/evaluator.hpp"
#include "llmsast/sast_ingest.hpp"

#include <doctest.h>

using namespace llmsast;

namespace {

RuleCweMap default_map() { return RuleCweMap::load(testing::source_dir() / "config" / "rule_cwe_map.csv"); }

const CweGraph& snapshot() {
    static const CweGraph g = load_cwe_graph(testing::source_dir() / "data" / "cwe1000_snapshot.csv");
    return g;
}

CorpusManifest two_case_manifest() {
    CorpusManifest m;
    m.cases = {{"J20736", CweId(78), true, "CWE78_OS_Command_Injection/J20736.java", "d1"},
               {"J23877", CweId(89), false, "CWE89_SQL_Injection/s02/J23877.java", "d2"}};
    return m;
}

} // namespace

TEST_CASE("CodeQL golden row parses to its quoted fields") {
    const auto f = parse_codeql_csv(testing::read_golden("codeql_J20736.csv"));
    REQUIRE(f.size() == 1);
    CHECK(f[0].tool == SastTool::codeql);
    CHECK(f[0].rule == "Uncontrolled command line");
    CHECK(f[0].description ==
          "Using externally controlled strings in a command line is vulnerable to malicious changes in the strings.");
    CHECK(f[0].severity == "error");
    CHECK(f[0].message == "This command line depends on a [[\"user-provided value\"|"
                          "\"relative:///src/testcases/CWE78_OS_Command_Injection/J20736.java:13:65:13:88\"]].");
    CHECK(f[0].path == "/src/testcases/CWE78_OS_Command_Injection/J20736.java");
    CHECK(f[0].start_line == 31);
    CHECK(f[0].start_column == 53);
    CHECK(f[0].end_line == 31);
    CHECK(f[0].end_column == 68);
    CHECK(render_codeql_csv_row(f[0]) + "\n" == testing::read_golden("codeql_J20736.csv"));
}

TEST_CASE("CodeQL golden with two findings on one file") {
    const auto f = parse_codeql_csv(testing::read_golden("codeql_J23877.csv"));
    REQUIRE(f.size() == 2);
    CHECK(f[0].rule == "Query built by concatenation with a possibly-untrusted string");
    CHECK(f[0].start_line == 24);
    CHECK(f[1].start_line == 62);
    CHECK(f[1].end_column == 114);
    CHECK(f[0].path == "/src/testcases/CWE89_SQL_Injection/s02/J23877.java");
}

TEST_CASE("CodeQL parse errors carry the record") {
    CHECK_THROWS_AS(parse_codeql_csv("\"a\",\"b\"\n"), ParseError);
    CHECK_THROWS_AS(parse_codeql_csv("\"a\",\"b\",\"c\",\"d\",\"e\",\"x\",\"1\",\"1\",\"1\"\n"), ParseError);
    CHECK_THROWS_AS(parse_codeql_csv("\"unterminated\n"), ParseError);
}

TEST_CASE("SpotBugs golden lines parse to their fields") {
    const auto a = parse_spotbugs_text(testing::read_golden("spotbugs_J20736.txt"));
    REQUIRE(a.findings.size() == 1);
    CHECK(a.findings[0].tool == SastTool::spotbugs);
    CHECK(a.findings[0].severity == "H");
    CHECK(a.findings[0].category == "S");
    CHECK(a.findings[0].rule == "SECCI");
    CHECK(a.findings[0].message == "This usage of java/lang/Runtime.exec(Ljava/lang/String;)Ljava/lang/Process; "
                                   "can be vulnerable to Command Injection");
    CHECK(a.findings[0].path == "J20736.java");
    CHECK(a.findings[0].start_line == 31);

    const auto b = parse_spotbugs_text(testing::read_golden("spotbugs_J23877.txt"));
    REQUIRE(b.findings.size() == 1);
    CHECK(b.findings[0].severity == "M");
    CHECK(b.findings[0].rule == "SQL");
    CHECK(b.findings[0].start_line == 62);
    CHECK(b.findings[0].path == "J23877.java");

    const auto junk = parse_spotbugs_text("Warnings generated: 2\n\nnot a finding\n");
    CHECK(junk.findings.empty());
    CHECK(junk.diagnostics.size() == 2);
}

TEST_CASE("golden reports map to the published judgments") {
    const auto rules = default_map();
    const auto manifest = two_case_manifest();
    const auto& g = snapshot();

    std::vector<SastFinding> cq = parse_codeql_csv(testing::read_golden("codeql_J20736.csv"));
    for (auto& f : parse_codeql_csv(testing::read_golden("codeql_J23877.csv"))) cq.push_back(f);
    const auto cqm = map_findings(cq, rules, manifest);
    CHECK(cqm.per_case.at("J20736").count(CweId(78)));
    CHECK(cqm.per_case.at("J23877").count(CweId(89)));
    CHECK(classify({"J20736", CweId(78), true}, cqm.per_case.at("J20736"), g).outcome == Outcome::tp);
    CHECK(classify({"J23877", CweId(89), false}, cqm.per_case.at("J23877"), g).outcome == Outcome::fp);

    std::vector<SastFinding> sb = parse_spotbugs_text(testing::read_golden("spotbugs_J20736.txt")).findings;
    for (auto& f : parse_spotbugs_text(testing::read_golden("spotbugs_J23877.txt")).findings) sb.push_back(f);
    const auto sbm = map_findings(sb, rules, manifest);
    CHECK(sbm.per_case.at("J20736") == std::set<CweId>{CweId(78)});
    CHECK(sbm.per_case.at("J23877") == std::set<CweId>{CweId(89)});
    CHECK(classify({"J20736", CweId(78), true}, sbm.per_case.at("J20736"), g).outcome == Outcome::tp);
    CHECK(classify({"J23877", CweId(89), false}, sbm.per_case.at("J23877"), g).outcome == Outcome::fp);
}

TEST_CASE("unmapped rules and orphan files are counted") {
    SastFinding unknown;
    unknown.tool = SastTool::spotbugs;
    unknown.rule = "NOT_A_RULE";
    unknown.path = "J20736.java";
    SastFinding orphan;
    orphan.tool = SastTool::spotbugs;
    orphan.rule = "SQL";
    orphan.path = "J99999.java";
    const auto m = map_findings({unknown, orphan}, default_map(), two_case_manifest());
    CHECK(m.unmapped == 1);
    CHECK(m.orphans == 1);
    CHECK(m.per_case.empty());
}

TEST_CASE("rule map file and undetectable CWEs") {
    const auto rules = default_map();
    CHECK(rules.find(SastTool::codeql, "Uncontrolled command line")->cwes == std::set<CweId>{CweId(78), CweId(88)});
    CHECK(rules.find(SastTool::spotbugs, "SECCI")->provenance == "observed");
    CHECK_FALSE(rules.find(SastTool::codeql, "SECCI"));
    CorpusManifest m;
    m.cases = {{"J1", CweId(78), true, "a", "x"}, {"J2", CweId(549), true, "b", "y"}};
    const auto missing = undetectable_cwes(m, rules, SastTool::codeql, snapshot());
    CHECK(missing == std::set<CweId>{CweId(549)});
    CHECK_THROWS_AS(RuleCweMap::parse("tool,rule,cwe_list,provenance\nnope,x,1,y\n"), ParseError);
}
