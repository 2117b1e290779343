#include "test_support.hpp"

#include "llmsast/corpus_prep.hpp"
#include "llmsast/digest.hpp"
#include "llmsast/java_lexer.hpp"

#include <doctest.h>

#include <map>
#include <regex>

using namespace llmsast;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> significant(std::string_view src) {
    std::vector<std::string> out;
    for (const auto& t : java::lex(src)) {
        if (!java::is_trivia(t.kind)) out.emplace_back(t.text);
    }
    return out;
}

const char* kCase = R"(/* header
 * CWE: 89 SQL Injection
 */
package testcases.CWE89_SQL_Injection.s01;

import testcasesupport.*;

public class CWE89_SQL_Injection__Environment_01 extends AbstractTestCase
{
    private int count = 0; // shared

    public void bad() throws Throwable
    {
        String data = System.getenv("ADD"); /* FLAW */
        badSink(data);
    }

    private void badSink(String data) { IO.writeLine("bad " + data); }

    public void good() throws Throwable
    {
        goodG2B();
    }

    private void goodG2B() throws Throwable
    {
        String data = "foo";
        IO.writeLine(data);
    }

    public static void main(String[] args) { mainFromConsole(args); }
}
)";

} // namespace

TEST_CASE("strip_comments removes comments and keeps line structure and literals") {
    const std::string src = "int a; // x\n/* one\ntwo */ String s = \"/* not */\"; char c = '/';\n";
    const std::string out = strip_comments(src);
    CHECK(out.find("one") == std::string::npos);
    CHECK(out.find("\"/* not */\"") != std::string::npos);
    CHECK(std::count(out.begin(), out.end(), '\n') == std::count(src.begin(), src.end(), '\n'));
    for (const auto& t : java::lex(out)) {
        CHECK(t.kind != java::TokenKind::line_comment);
        CHECK(t.kind != java::TokenKind::block_comment);
    }
}

TEST_CASE("default lexicon rewrites hint names") {
    const HintLexicon lx = HintLexicon::defaults();
    CHECK(lx.apply("goodG2B") == "processG2B");
    CHECK(lx.apply("goodB2G") == "processB2G");
    CHECK(lx.apply("bad") == "handle");
    CHECK(lx.apply("badSink") == "handleSink");
    CHECK(lx.apply("Good") == "Process");
    CHECK(lx.apply("data") == "data");
    CHECK(lx.apply("helperGoodToBad") == "helperG2B");
    CHECK_FALSE(lx.has_hint("processG2B"));
    for (std::string id : {"CWE89_SQL_Injection__Environment_01", "cwe_23", "myCwe-78x"}) {
        CHECK(std::regex_search(lx.apply(id), std::regex("cwe[_-]?[0-9]", std::regex::icase)) == false);
    }
}

TEST_CASE("lexicon file format and validation") {
    const HintLexicon lx = HintLexicon::parse("# comment\nsubstring\tsecure\tplain\nword\tvuln\titem\n");
    CHECK(lx.rules().size() == 2);
    CHECK(lx.apply("isSecure") == "isPlain");
    CHECK(lx.apply("vulnCount") == "itemCount");
    CHECK(lx.apply("vulnerable") == "vulnerable"); // word rule needs a whole segment
    CHECK_THROWS_AS(HintLexicon::parse("substring\tgood\tgoodness\n"), ConfigError);
    CHECK_THROWS_AS(HintLexicon::parse("substring\tgood\tnot-an-identifier\n"), ConfigError);
    CHECK_THROWS_AS(HintLexicon::parse("bogus\ta\tb\n"), ParseError);
}

TEST_CASE("bundled lexicon file equals the built-in defaults") {
    const HintLexicon file = HintLexicon::load(testing::source_dir() / "config" / "hint_lexicon.tsv");
    CHECK(file.rules() == HintLexicon::defaults().rules());
}

TEST_CASE("rename_hints is consistent and leaves package and imports alone") {
    const std::string src = strip_comments(kCase);
    const std::string out = rename_hints(src, HintLexicon::defaults(),
                                         {{"CWE89_SQL_Injection__Environment_01", "J00001"}});
    CHECK(out.find("package testcases.CWE89_SQL_Injection.s01;") != std::string::npos);
    CHECK(out.find("class J00001") != std::string::npos);
    CHECK(out.find("handleSink(data)") != std::string::npos);
    CHECK(out.find("void handleSink(") != std::string::npos);
    CHECK(out.find("processG2B();") != std::string::npos);
    CHECK(hint_leaks(out).empty());
    // Same token structure apart from identifier text.
    const auto a = java::lex(src), b = java::lex(out);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].kind == b[i].kind);
}

TEST_CASE("rename collisions") {
    // Two variables folding onto one name is refused.
    CHECK_THROWS_AS(rename_hints("class A { int badX; int handleX; }", HintLexicon::defaults()), RenameError);
    // A method may share a variable's new name.
    const std::string ok =
        rename_hints("class A { void good() { Process process = null; process.waitFor(); } }", HintLexicon::defaults());
    CHECK(ok.find("void process()") != std::string::npos);
    CHECK(ok.find("Process process = null") != std::string::npos);
}

TEST_CASE("hint_leaks sees identifiers only") {
    CHECK(hint_leaks("class A { String s = \"good bad CWE89\"; }").empty());
    CHECK(hint_leaks("class A { int goodVar; int cwe89; }") == std::vector<std::string>{"cwe89", "goodVar"});
    CHECK(hint_leaks("package testcases.CWE89_X; class A {}").empty());
    CHECK(hint_leaks("package testcases.CWE89_X; class A {}", true).size() == 1);
}

TEST_CASE("split_case separates bad and good members") {
    const auto s = split_case("CWE89_SQL_Injection__Environment_01.java", strip_comments(kCase));
    CHECK(s.cwe == CweId(89));
    CHECK(s.class_name == "CWE89_SQL_Injection__Environment_01");
    CHECK(s.vulnerable_source.find("void bad()") != std::string::npos);
    CHECK(s.vulnerable_source.find("badSink(String") != std::string::npos);
    CHECK(s.vulnerable_source.find("goodG2B") == std::string::npos);
    CHECK(s.clean_source.find("void goodG2B()") != std::string::npos);
    CHECK(s.clean_source.find("badSink") == std::string::npos);
    for (const auto* text : {&s.vulnerable_source, &s.clean_source}) {
        CHECK(text->find("private int count = 0;") != std::string::npos);
        CHECK(text->find("mainFromConsole") != std::string::npos);
        // Braces stay balanced.
        CHECK(std::count(text->begin(), text->end(), '{') == std::count(text->begin(), text->end(), '}'));
    }
}

TEST_CASE("split_case filters cases without a pair") {
    CHECK_THROWS_AS(split_case("CWE89_X_01.java", "class CWE89_X_01 { public void bad() {} }"), FilteredCase);
    CHECK_THROWS_AS(split_case("CWE89_X_01.java", "class CWE89_X_01 { public void good() {} }"), FilteredCase);
    CHECK(is_multi_file_name("CWE89_SQL_Injection__Environment_61a"));
    CHECK(is_multi_file_name("CWE89_SQL_Injection__Environment_81_bad"));
    CHECK(is_multi_file_name("CWE89_SQL_Injection__Environment_81_goodG2B"));
    CHECK(is_multi_file_name("CWE89_SQL_Injection__Environment_81_base"));
    CHECK_FALSE(is_multi_file_name("CWE89_SQL_Injection__Environment_01"));
    CHECK(cwe_from_file_name("CWE23_Relative_Path_Traversal__Property_05.java") == CweId(23));
    CHECK_FALSE(cwe_from_file_name("Main.java"));
}

TEST_CASE("prepare_for_llm swaps the package and strips indentation only") {
    const std::string src = "package testcases.CWE89_SQL_Injection;\n\nclass J1 {\n    int x = 1;\n\tString s = \"  keep  \";\n}\n";
    const std::string out = prepare_for_llm(src, "testcases");
    CHECK(out.rfind("package testcases;\n", 0) == 0);
    CHECK(out.find("\nint x = 1;") != std::string::npos);
    CHECK(out.find("\"  keep  \"") != std::string::npos);
    // Token-diff oracle: everything after the package declaration is unchanged.
    auto a = significant(src), b = significant(out);
    a.erase(a.begin(), a.begin() + 5); // package testcases . CWE89_SQL_Injection ;
    b.erase(b.begin(), b.begin() + 3); // package testcases ;
    CHECK(a == b);

    const std::string bare = prepare_for_llm("class A {}\n", "testcases");
    CHECK(bare == "package testcases;\nclass A {}\n");
    const std::string dropped = prepare_for_llm(src, "");
    CHECK(dropped.find("package") == std::string::npos);
    auto expect = significant(src);
    expect.erase(expect.begin(), expect.begin() + 5); // package a . b ;
    CHECK(significant(dropped) == expect);
}

TEST_CASE("uniform_below covers its range evenly") {
    std::mt19937_64 rng(3);
    std::map<std::uint64_t, int> hist;
    for (int i = 0; i < 60000; ++i) hist[uniform_below(rng, 6)]++;
    REQUIRE(hist.size() == 6);
    for (auto& [k, v] : hist) CHECK(std::abs(v - 10000) < 500);
    CHECK_THROWS(uniform_below(rng, 0));
}

namespace {

CorpusManifest synthetic(std::size_t cwes, std::size_t per_side) {
    CorpusManifest m;
    int n = 0;
    for (std::size_t c = 0; c < cwes; ++c) {
        for (int v = 0; v < 2; ++v) {
            for (std::size_t k = 0; k < per_side; ++k) {
                const std::string id = "J" + std::to_string(10000 + n++);
                m.cases.push_back({id, CweId(static_cast<std::uint32_t>(20 + c)), v == 1, id + ".java", sha256_hex(id)});
            }
        }
    }
    std::sort(m.cases.begin(), m.cases.end(), [](auto& a, auto& b) { return a.case_id < b.case_id; });
    return m;
}

} // namespace

TEST_CASE("select_subset: 17 per side over 17 CWEs gives 578") {
    const CorpusManifest all = synthetic(17, 25);
    const CorpusManifest s = select_subset(all, 17, 99);
    CHECK(s.cases.size() == 578);
    for (const auto& [cwe, counts] : s.counts()) {
        CHECK(counts.first == 17);
        CHECK(counts.second == 17);
    }
    CHECK(select_subset(all, 17, 99) == s);
    CHECK(select_subset(all, 17, 100).digest() != s.digest());
    for (const auto& e : s.cases) CHECK(all.find(e.case_id));
    CHECK_THROWS_AS(select_subset(synthetic(3, 5), 6, 1), SelectionError);
}

TEST_CASE("manifest JSON lines round trip") {
    CorpusManifest m = synthetic(2, 3);
    m.seed = 42;
    m.per_cwe = 3;
    const CorpusManifest back = CorpusManifest::from_jsonl(m.to_jsonl());
    CHECK(back == m);
    CHECK(back.digest() == m.digest());
    std::string dup = m.to_jsonl();
    dup += dup.substr(dup.find('\n') + 1, dup.find('\n', dup.find('\n') + 1) - dup.find('\n'));
    CHECK_THROWS_AS(CorpusManifest::from_jsonl(dup), ParseError);
}

TEST_CASE("mini corpus: balanced, hint-free and reproducible") {
    testing::TempDir a("prep-a"), b("prep-b");
    const fs::path raw = testing::source_dir() / "data" / "mini_corpus" / "raw";
    PrepOptions opts;
    opts.seed = 7;
    const PrepReport r = prepare_corpus(raw, a.path(), opts);
    CHECK(r.all.cases.size() == 60);
    CHECK(r.excluded.size() == 9);
    const auto counts = r.all.counts();
    CHECK(counts.size() == 3);
    for (const auto& [cwe, c] : counts) {
        CHECK(c.first == 10);
        CHECK(c.second == 10);
    }
    for (const auto& e : r.all.cases) {
        const TestCase tc = load_case(a.path(), e);
        CHECK(sha256_hex(tc.source_text) == e.digest);
        CHECK(hint_leaks(tc.source_text).empty());
        CHECK(hint_leaks(prepare_for_llm(tc.source_text, "testcases"), true).empty());
        for (const auto& t : java::lex(tc.source_text)) {
            CHECK(t.kind != java::TokenKind::line_comment);
            CHECK(t.kind != java::TokenKind::block_comment);
        }
    }
    const PrepReport r2 = prepare_corpus(raw, b.path(), opts);
    CHECK(r2.all.digest() == r.all.digest());
    CHECK(read_file(a / "manifest.jsonl") == read_file(b / "manifest.jsonl"));
}
