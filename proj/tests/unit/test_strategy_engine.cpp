#include "test_support.hpp"

#include "llmsast/corpus_prep.hpp"
#include "llmsast/strategy_engine.hpp"

#include <doctest.h>

using namespace llmsast;

namespace {

const TemplateLibrary& templates() {
    static const TemplateLibrary lib = TemplateLibrary::load(testing::source_dir() / "templates");
    return lib;
}

const StrategyRegistry& registry() {
    static const StrategyRegistry reg =
        StrategyRegistry::load(testing::source_dir() / "templates" / "registry.json", templates());
    return reg;
}

StrategyEngine::Options engine_options(std::string package = "testcases") {
    StrategyEngine::Options o;
    o.package_override = std::move(package);
    for (const char* set : {"fs20", "fs6"}) {
        o.few_shot[set] = load_few_shot_examples(testing::source_dir() / "templates" / "few_shot" / (std::string(set) + ".json"));
    }
    return o;
}

const char* kSource = "package juliet.testcases.CWE78;\n"
                      "public class J1 {\n"
                      "    public void handle(String data) throws Exception {\n"
                      "        Runtime.getRuntime().exec(\"ls \" + data);\n"
                      "    }\n"
                      "}\n";

std::uint32_t protocol_budget(Protocol p) {
    switch (p) {
    case Protocol::single: return 1;
    case Protocol::short_refine:
    case Protocol::short_rci: return 2;
    case Protocol::rci:
    case Protocol::self_refine:
    case Protocol::self_consistency: return 3;
    case Protocol::tot: return 48;
    }
    return 0;
}

/// Runs `spec` on kSource against a scripted backend.
struct Harness {
    VirtualClock clock;
    std::shared_ptr<testing::ScriptedBackend> backend;
    Gateway gateway;
    StrategyEngine engine;

    explicit Harness(testing::ScriptedBackend::Script script, std::string package = "testcases")
        : backend(std::make_shared<testing::ScriptedBackend>(std::move(script))),
          gateway({}, backend, clock),
          engine(templates(), gateway, testing::mock_profile(), engine_options(std::move(package))) {}
};

std::string verdict(const std::set<CweId>& cwes) {
    if (cwes.empty()) return "vulnerability: NO | vulnerability type: N/A | vulnerability name: N/A | explanation: -";
    std::string out;
    for (CweId c : cwes) out += "vulnerability: YES | vulnerability type: " + c.str() + " | vulnerability name: x | explanation: y\n";
    return out;
}

} // namespace

TEST_CASE("registry covers every strategy with valid protocols") {
    CHECK(registry().all().size() == 25);
    CHECK(all_strategy_ids().size() == 25);
    for (StrategyId id : all_strategy_ids()) {
        CAPTURE(to_string(id));
        CHECK(parse_strategy_id(to_string(id)) == id);
        const auto& spec = registry().get(id);
        CHECK(spec.expected_calls() == protocol_budget(spec.protocol));
    }
    CHECK(registry().get(StrategyId::b_sc).temperature == 0.0);
    CHECK(registry().get(StrategyId::cot_8s_sc).temperature == doctest::Approx(0.7));
    CHECK(registry().get(StrategyId::tot_8s).temperature == doctest::Approx(0.7));
    CHECK(registry().get(StrategyId::cot_8s_sc).protocol == Protocol::self_consistency);
    CHECK(registry().get(StrategyId::tot_8s).protocol == Protocol::tot);
    CHECK(registry().get(StrategyId::fs20).few_shot_set == std::optional<std::string>("fs20"));
    CHECK_FALSE(parse_strategy_id("p_nope"));
}

TEST_CASE("registry rejects broken entries") {
    CHECK_THROWS_AS(StrategyRegistry::parse("{", templates()), ConfigError);
    CHECK_THROWS_AS(StrategyRegistry::parse(R"({"schema_version": 2, "strategies": {}})", templates()), ConfigError);
    CHECK_THROWS_AS(StrategyRegistry::parse(R"({"schema_version": 1, "strategies": {}})", templates()), ConfigError);
    StrategySpec s;
    s.protocol = Protocol::rci;
    s.template_refs = {"b"};
    CHECK_THROWS_AS(validate_spec(s), ConfigError);
    s.protocol = Protocol::self_consistency;
    s.samples = 5;
    CHECK_THROWS_AS(validate_spec(s), ConfigError);
}

TEST_CASE("templates render in a single pass") {
    CHECK(render_template("a {x} b", {{"x", "{x}"}}) == "a {x} b");
    CHECK(render_template("{ x } {1} {}", {}) == "{ x } {1} {}");
    CHECK_THROWS_AS(render_template("{missing}", {}), ConfigError);
    CHECK_THROWS_AS(templates().get("nope"), LookupError);
}

TEST_CASE("every strategy makes exactly its protocol's calls") {
    for (StrategyId id : all_strategy_ids()) {
        const auto& spec = registry().get(id);
        CAPTURE(to_string(id));
        Harness h([](const auto& r, std::size_t) {
            if (r.messages.back().content.find("best candidate") != std::string::npos) return std::string("best candidate: 1");
            return verdict({CweId(78)});
        });
        const auto result = h.engine.run("J1", kSource, spec);
        CHECK(result.status == ScanStatus::ok);
        CHECK(h.backend->calls() == protocol_budget(spec.protocol));
        CHECK(result.transcript.size() == protocol_budget(spec.protocol));
        CHECK(result.reported_cwes == std::set<CweId>{CweId(78)});
        for (const auto& req : h.backend->requests()) CHECK(req.temperature == spec.temperature);

        const auto reqs = h.backend->requests();
        switch (spec.protocol) {
        case Protocol::rci:
        case Protocol::self_refine:
            REQUIRE(reqs.size() == 3);
            CHECK(reqs[0].messages.size() == 1);
            CHECK(reqs[1].messages.size() == 3);
            CHECK(reqs[2].messages.size() == 5);
            CHECK(reqs[1].messages[1].role == Role::ai);
            break;
        case Protocol::short_refine:
        case Protocol::short_rci: CHECK(reqs[1].messages.size() == 3); break;
        case Protocol::self_consistency:
            for (std::uint32_t i = 0; i < 3; ++i) {
                CHECK(reqs[i].run_index == i);
                CHECK(reqs[i].messages == reqs[0].messages);
            }
            break;
        default: break;
        }
        // The model never sees the original package.
        for (const auto& req : reqs) CHECK(req.messages[0].content.find("juliet") == std::string::npos);
    }
}

TEST_CASE("self-consistency takes a per-CWE majority over all sample patterns") {
    const std::vector<std::set<CweId>> answers{{}, {CweId(78)}, {CweId(89)}, {CweId(78), CweId(89)}};
    const auto& spec = registry().get(StrategyId::b_sc);
    for (std::size_t a = 0; a < answers.size(); ++a)
        for (std::size_t b = 0; b < answers.size(); ++b)
            for (std::size_t c = 0; c < answers.size(); ++c) {
                const std::vector<std::set<CweId>> pattern{answers[a], answers[b], answers[c]};
                Harness h([&](const auto& r, std::size_t) { return verdict(pattern[r.run_index]); });
                const auto result = h.engine.run("J1", kSource, spec);
                std::set<CweId> expect;
                for (CweId cwe : {CweId(78), CweId(89)}) {
                    int votes = 0;
                    for (const auto& s : pattern) votes += s.count(cwe) ? 1 : 0;
                    if (votes >= 2) expect.insert(cwe);
                }
                CHECK(result.reported_cwes == expect);
                CHECK(result.final_decision == !expect.empty());
                CHECK(majority_cwes(pattern) == expect);
            }
}

TEST_CASE("tree of thoughts winner over every vote triple") {
    const std::vector<std::optional<std::uint32_t>> options{std::nullopt, 0u, 1u, 2u};
    for (const auto& a : options)
        for (const auto& b : options)
            for (const auto& c : options) {
                const std::vector<std::optional<std::uint32_t>> votes{a, b, c};
                std::array<int, 3> tally{};
                for (const auto& v : votes)
                    if (v) ++tally[*v];
                std::uint32_t expect = 0;
                for (std::uint32_t k = 0; k < 3; ++k)
                    if (tally[k] > tally[expect]) expect = k;
                CHECK(tot_winner(votes, 3) == expect);
            }
}

TEST_CASE("tree of thoughts final answer comes from the winning candidate") {
    const auto& spec = registry().get(StrategyId::tot_8s);
    const std::vector<std::set<CweId>> per_candidate{{CweId(89)}, {CweId(78)}, {}};
    Harness h([&](const auto& r, std::size_t) {
        if (r.messages.back().content.find("best candidate") != std::string::npos) {
            return r.run_index == 0 ? std::string("no idea") : std::string("best candidate: 2");
        }
        return verdict(per_candidate[r.run_index]);
    });
    const auto result = h.engine.run("J1", kSource, spec);
    CHECK(result.reported_cwes == std::set<CweId>{CweId(78)});
    // Later steps see the chain of winners.
    const auto reqs = h.backend->requests();
    CHECK(reqs.back().messages[0].content.find("Step 7:") != std::string::npos);
}

TEST_CASE("candidate choice parsing") {
    CHECK(parse_candidate_choice("Best candidate: 2 because", 3) == 1u);
    CHECK(parse_candidate_choice("**best candidate** = 3", 3) == 2u);
    CHECK_FALSE(parse_candidate_choice("best candidate: 4", 3));
    CHECK_FALSE(parse_candidate_choice("best candidate: 0", 3));
    CHECK_FALSE(parse_candidate_choice("candidate 1 is best", 3));
    CHECK(parse_candidate_choice("best candidate: 9\nbest candidate: 1", 3) == 0u);
}

namespace {

/// Replays a conversation in the golden "Human: ...\nAI: ..." layout, with
/// the prepared code swapped back to the template placeholder.
std::string render_as_golden(const ScanResult& r, const std::string& code) {
    std::string out;
    for (const auto& step : r.transcript.steps()) {
        std::string human = step.sent.back().content;
        for (auto pos = human.find(code); pos != std::string::npos; pos = human.find(code, pos + 6)) {
            human.replace(pos, code.size(), "{code}");
        }
        out += "Human: " + human + "\nAI: " + step.response.content + "\n";
    }
    return out;
}

} // namespace

TEST_CASE("prompts reproduce the published templates") {
    const std::string source = "class A {\n    void m() {}\n}\n";
    const std::string code = prepare_for_llm(source, "");
    const std::vector<std::pair<StrategyId, const char*>> cases{
        {StrategyId::dfa, "p_dfa.txt"}, {StrategyId::dfa_rci, "p_dfa_rci.txt"}, {StrategyId::cot_8s, "p_cot_8s.txt"}};
    for (const auto& [id, file] : cases) {
        CAPTURE(file);
        Harness h([](const auto&, std::size_t) { return std::string("<response>"); }, "");
        const auto r = h.engine.run("J1", source, registry().get(id));
        CHECK(render_as_golden(r, code) == testing::read_golden(file));
    }
}

TEST_CASE("few-shot prompts embed balanced example sets") {
    const auto fs20 = engine_options().few_shot.at("fs20");
    const auto fs6 = engine_options().few_shot.at("fs6");
    CHECK(fs20.size() == 20);
    CHECK(fs6.size() == 6);
    for (const auto* set : {&fs20, &fs6}) {
        const auto vulnerable = std::count_if(set->begin(), set->end(), [](const auto& e) { return e.vulnerable; });
        CHECK(static_cast<std::size_t>(vulnerable) * 2 == set->size());
    }
    const auto msgs = build_few_shot_prompt(fs6, "class Q {}", templates(), "fs", "b");
    REQUIRE(msgs.size() == 1);
    for (int i = 1; i <= 6; ++i) CHECK(msgs[0].content.find("Example " + std::to_string(i) + ":") != std::string::npos);
    CHECK(msgs[0].content.find("Example 7:") == std::string::npos);
    CHECK(msgs[0].content.find("class Q {}") != std::string::npos);

    const auto fallback = build_few_shot_prompt({}, "class Q {}", templates(), "fs", "b");
    CHECK(fallback[0].content == templates().render("b", {{"code", "class Q {}"}}));
    auto unbalanced = fs6;
    unbalanced.pop_back();
    CHECK_THROWS_AS(build_few_shot_prompt(unbalanced, "x", templates(), "fs", "b"), ConfigError);
}

TEST_CASE("api sequence extraction") {
    const auto seq = extract_api_sequence(
        "class A {\n"
        "  @Override public void run(String x) throws Exception {\n"
        "    String d = request.getParameter(\"q\");\n"
        "    Runtime.getRuntime().exec(\"ls \" + d);\n"
        "    java.util.List<String> l = new java.util.ArrayList<String>();\n"
        "    int[] a = new int[3];\n"
        "    helper(d).trim();\n"
        "    return;\n"
        "  }\n"
        "}\n");
    CHECK(seq == std::vector<std::string>{"request.getParameter", "Runtime.getRuntime", "exec", "new java.util.ArrayList",
                                          "helper", "trim"});
    CHECK(extract_api_sequence("").empty());
}

TEST_CASE("fenced blocks are removed before parsing fix prompts") {
    CHECK(strip_fenced_blocks("a\n```java\nvulnerability: YES\n```\nb") == "a\nb\n");
    CHECK(strip_fenced_blocks("a\n```x```\nb") == "a\nb\n");
    CHECK(strip_fenced_blocks("a\n```\nnever closed") == "a\n");
}

TEST_CASE("decide re-derives the engine's result and checks the step count") {
    for (StrategyId id : {StrategyId::b, StrategyId::b_rci, StrategyId::b_sc, StrategyId::cot_8s_sc}) {
        const auto& spec = registry().get(id);
        Harness h([](const auto&, std::size_t n) { return verdict(n % 2 ? std::set<CweId>{CweId(89)} : std::set<CweId>{}); });
        const auto result = h.engine.run("J1", kSource, spec);
        const auto d = decide(spec, result.transcript);
        CHECK(d.reported_cwes == result.reported_cwes);
        CHECK(d.final_decision == result.final_decision);
        Transcript shorter;
        CHECK_THROWS_AS(decide(spec, shorter), IntegrityError);
    }
}

TEST_CASE("engine error mapping") {
    struct Throwing final : Backend {
        int kind;
        explicit Throwing(int k) : kind(k) {}
        RawCompletion complete(const std::vector<ChatMessage>&, const ModelProfile&, const CompletionParams&) override {
            if (kind == 0) throw ProviderError("invalid key");
            throw ProtocolError("garbled");
        }
    };
    VirtualClock clock;
    const auto& spec = registry().get(StrategyId::b);
    {
        Gateway gw({}, std::make_shared<Throwing>(0), clock);
        StrategyEngine e(templates(), gw, testing::mock_profile(), engine_options());
        try {
            e.run("J7", kSource, spec);
            FAIL("expected CaseError");
        } catch (const CaseError& err) {
            CHECK(err.case_id() == "J7");
            CHECK(err.terminal());
        }
    }
    {
        Gateway gw({}, std::make_shared<Throwing>(1), clock);
        StrategyEngine e(templates(), gw, testing::mock_profile(), engine_options());
        try {
            e.run("J7", kSource, spec);
            FAIL("expected CaseError");
        } catch (const CaseError& err) {
            CHECK_FALSE(err.terminal());
        }
    }
    {
        Gateway gw({}, std::make_shared<Throwing>(1), clock);
        StrategyEngine e(templates(), gw, testing::mock_profile(50), engine_options());
        const auto r = e.run("J7", kSource, spec);
        CHECK(r.status == ScanStatus::skipped_overflow);
        CHECK(r.transcript.size() == 0);
    }
}
