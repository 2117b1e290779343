#include "llmsast/csv.hpp"
#include "llmsast/cwe_id.hpp"
#include "llmsast/digest.hpp"
#include "llmsast/error.hpp"
#include "llmsast/java_lexer.hpp"
#include "llmsast/money.hpp"

#include <doctest.h>

#include <random>

using namespace llmsast;

TEST_CASE("money parses decimal text without floating point") {
    CHECK(Money::parse("0.03")->micros() == 30000);
    CHECK(Money::parse("12")->micros() == 12000000);
    CHECK(Money::parse("-0.5")->micros() == -500000);
    CHECK(Money::parse("0.000001")->micros() == 1);
    CHECK_FALSE(Money::parse("0.0000001"));
    CHECK_FALSE(Money::parse("abc"));
    CHECK_FALSE(Money::parse(""));
    CHECK_FALSE(Money::parse("1.2.3"));
}

TEST_CASE("money formatting") {
    CHECK(Money::from_micros(25000).str() == "0.025000");
    CHECK(Money::from_micros(25000).str_cents() == "0.03");
    CHECK(Money::from_micros(24999).str_cents() == "0.02");
    CHECK(Money::from_micros(4380000).str_cents() == "4.38");
    CHECK(Money::from_micros(-1500000).str() == "-1.500000");
}

TEST_CASE("token cost: 1000 in and 500 out at 0.01/0.03 per 1k is 0.025") {
    const Money c = token_cost(1000, 500, *Money::parse("0.01"), *Money::parse("0.03"));
    CHECK(c.micros() == 25000);
    CHECK(c.str() == "0.025000");
}

TEST_CASE("token cost matches an integer oracle and sums exactly") {
    std::mt19937_64 rng(11);
    std::int64_t total = 0;
    Money sum;
    for (int i = 0; i < 2000; ++i) {
        const std::uint64_t in = rng() % 200000, out = rng() % 20000;
        const std::int64_t pin = 1 + static_cast<std::int64_t>(rng() % 100000);
        const std::int64_t pout = 1 + static_cast<std::int64_t>(rng() % 100000);
        // micros = round_half_up((in*pin + out*pout) / 1000)
        const std::int64_t num = static_cast<std::int64_t>(in) * pin + static_cast<std::int64_t>(out) * pout;
        const std::int64_t expect = (num + 500) / 1000;
        const Money c = token_cost(in, out, Money::from_micros(pin), Money::from_micros(pout));
        REQUIRE(c.micros() == expect);
        total += expect;
        sum += c;
    }
    CHECK(sum.micros() == total);
}

TEST_CASE("sha256 known vectors") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("cwe id parsing is strict") {
    CHECK(CweId::parse("CWE-89")->number == 89);
    CHECK(CweId::parse("89")->number == 89);
    CHECK_FALSE(CweId::parse("CWE-089"));
    CHECK_FALSE(CweId::parse("CWE-0"));
    CHECK_FALSE(CweId::parse("cwe89x"));
    CHECK(CweId(22).str() == "CWE-22");
    CHECK(CweId(22) < CweId(129));
}

TEST_CASE("csv reader handles quotes, commas and newlines") {
    const auto rows = csv::parse("a,\"b,c\",\"say \"\"hi\"\"\"\n\n\"multi\nline\",x,\r\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].fields == std::vector<std::string>{"a", "b,c", "say \"hi\""});
    CHECK(rows[1].fields == std::vector<std::string>{"multi\nline", "x", ""});
    CHECK(rows[1].record == 2);
    CHECK(rows[1].line == 3);
    CHECK_THROWS_AS(csv::parse("\"open"), ParseError);
    CHECK_THROWS_AS(csv::parse("\"a\"b"), ParseError);
}

TEST_CASE("csv escape round trip") {
    const std::vector<std::string> fields{"plain", "with,comma", "with \"quote\"", "two\nlines", ""};
    const auto back = csv::parse(csv::join(fields) + "\n");
    REQUIRE(back.size() == 1);
    CHECK(back[0].fields == fields);
    const auto quoted = csv::parse(csv::join_quoted(fields) + "\n");
    CHECK(quoted[0].fields == fields);
}

TEST_CASE("lexer tokens concatenate back to the input") {
    const std::string src = "class A { String s = \"x // y\"; char c = '\\''; /* c\n */ int n = 0x1F; // end\n"
                            "String t = \"\"\"\n  block \"q\"\n  \"\"\"; }";
    const auto toks = java::lex(src);
    std::string joined;
    for (const auto& t : toks) joined += t.text;
    CHECK(joined == src);
    int comments = 0;
    for (const auto& t : toks) comments += t.kind == java::TokenKind::line_comment || t.kind == java::TokenKind::block_comment;
    CHECK(comments == 2);
}

TEST_CASE("lexer reports unterminated constructs") {
    CHECK_THROWS_AS(java::lex("/* open"), java::LexError);
    CHECK_THROWS_AS(java::lex("String s = \"open;"), java::LexError);
    CHECK_THROWS_AS(java::lex("char c = 'x"), java::LexError);
}
