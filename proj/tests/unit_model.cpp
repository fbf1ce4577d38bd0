#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <anno/digest.hpp>
#include <anno/error.hpp>
#include <anno/model.hpp>
#include <anno/util.hpp>

using namespace anno;

TEST_CASE("ascii helpers") {
    CHECK(ascii_lower("POSitive!") == "positive!");
    CHECK(trim("  a b \t\n") == "a b");
    CHECK(trim("") == "");
    CHECK(is_blank("  \t "));
    CHECK_FALSE(is_blank(" x "));
}

TEST_CASE("format_fixed rounds half up") {
    CHECK(format_fixed(0.675, 2) == "0.68");
    CHECK(format_fixed(0.674, 2) == "0.67");
    CHECK(format_fixed(0.8356862745, 2) == "0.84");
    CHECK(format_fixed(-0.004, 2) == "0.00");  // rounds up to exact zero, no sign
    CHECK(format_fixed(-0.016, 2) == "-0.02");
    CHECK(format_fixed(-0.015, 2) == "-0.01");  // half rounds toward +inf
    CHECK(format_fixed(2.0, 0) == "2");
    CHECK(format_fixed(71.0, 2) == "71.00");
}

TEST_CASE("sanitize_filename") {
    CHECK(sanitize_filename("mistralai/Mistral-7B") == "mistralai_Mistral-7B");
    CHECK(sanitize_filename("a b:c*d") == "a_b_c_d");
    CHECK(sanitize_filename("ok-1.2_x") == "ok-1.2_x");
}

TEST_CASE("fnv1a64 known vectors") {
    // Published FNV-1a test vectors.
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
    CHECK(to_hex64(0xcbf29ce484222325ull) == "cbf29ce484222325");
}

TEST_CASE("transcript digest chains request/reply pairs in order") {
    TranscriptDigest d1, d2, d3;
    d1.add("req1", "rep1");
    d1.add("req2", "rep2");
    d2.add("req2", "rep2");
    d2.add("req1", "rep1");
    d3.add("req1", "rep1");
    CHECK(d1.hex() != d2.hex());
    CHECK(d1.hex() != d3.hex());
    CHECK(d1.hex().size() == 16);
    // Boundary between request and reply must matter.
    TranscriptDigest a, b;
    a.add("xy", "z");
    b.add("x", "yz");
    CHECK(a.hex() != b.hex());
}

TEST_CASE("label schema canonicalizes and resolves") {
    LabelSchema schema({"Positive", "NEUTRAL", "negative"}, {{"POS", "positive"}});
    CHECK(schema.labels() == std::vector<std::string>{"positive", "neutral", "negative"});
    CHECK(schema.size() == 3);
    CHECK(schema.contains("neutral"));
    CHECK_FALSE(schema.contains("Positive"));  // contains() is canonical-form only
    CHECK(schema.index_of("negative") == 2);
    CHECK(schema.resolve("POSITIVE") == "positive");
    CHECK(schema.resolve("pos") == "positive");
    CHECK_FALSE(schema.resolve("meh").has_value());
    CHECK_THROWS_AS(schema.index_of("meh"), DataError);
}

TEST_CASE("label schema rejects bad construction") {
    CHECK_THROWS_AS(LabelSchema({}), DataError);
    CHECK_THROWS_AS(LabelSchema({"yes", "YES"}), DataError);
    CHECK_THROWS_AS(LabelSchema({"yes", " "}), DataError);
    CHECK_THROWS_AS(LabelSchema({"yes", "no"}, {{"y", "maybe"}}), DataError);
}

TEST_CASE("enum name round-trips") {
    for (Strategy s : {Strategy::zero_shot, Strategy::one_shot, Strategy::few_shot,
                       Strategy::chain_of_thought, Strategy::self_consistency})
        CHECK(strategy_from_name(strategy_name(s)) == s);
    CHECK_THROWS_AS(strategy_from_name("many_shot"), DataError);
    for (AnnotationStatus s :
         {AnnotationStatus::ok, AnnotationStatus::tie_broken, AnnotationStatus::unparsed})
        CHECK(status_from_name(status_name(s)) == s);
    CHECK_THROWS_AS(status_from_name("great"), DataError);
    CHECK(role_from_name("system") == Role::system);
    CHECK_THROWS_AS(role_from_name("tool"), DataError);
}

TEST_CASE("validate_plan flags every violation") {
    LabelSchema schema({"positive", "neutral", "negative"});

    PromptPlan ok;
    ok.name = "zs";
    ok.strategy = Strategy::zero_shot;
    ok.system_prompt = "You classify.";
    ok.question = "Which is it?";
    CHECK(validate_plan(ok, schema).empty());

    PromptPlan bad = ok;
    bad.reasoning_question = "Think first:";  // only valid for chain_of_thought
    bad.base_strategy = Strategy::few_shot;   // only valid for self_consistency
    auto violations = validate_plan(bad, schema);
    CHECK(violations.size() == 2);
    PromptPlan zs_demo = ok;
    zs_demo.demonstrations = {{"text", "positive", {}}};
    CHECK(validate_plan(zs_demo, schema) ==
          std::vector<std::string>{"zero_shot requires 0 demonstrations"});

    PromptPlan one = ok;
    one.name = "os";
    one.strategy = Strategy::one_shot;
    CHECK_FALSE(validate_plan(one, schema).empty());  // one_shot needs exactly one demo
    one.demonstrations = {{"text", "positive", {}}};
    CHECK(validate_plan(one, schema).empty());
    one.demonstrations.push_back({"more", "neutral", {}});
    CHECK_FALSE(validate_plan(one, schema).empty());

    PromptPlan few = ok;
    few.name = "fs";
    few.strategy = Strategy::few_shot;
    few.demonstrations = {{"a", "positive", {}}};
    CHECK_FALSE(validate_plan(few, schema).empty());  // few_shot needs >= 2
    few.demonstrations.push_back({"b", "weird", {}});
    CHECK_FALSE(validate_plan(few, schema).empty());  // unknown demo label
    few.demonstrations[1].label = "negative";
    CHECK(validate_plan(few, schema).empty());

    PromptPlan cot = ok;
    cot.name = "cot";
    cot.strategy = Strategy::chain_of_thought;
    CHECK_FALSE(validate_plan(cot, schema).empty());  // missing reasoning_question
    cot.reasoning_question = "Think first:";
    CHECK(validate_plan(cot, schema).empty());
    cot.demonstrations = {{"a", "positive", {}}};  // CoT demos need reasoning
    CHECK_FALSE(validate_plan(cot, schema).empty());
    cot.demonstrations[0].reasoning = "because";
    CHECK(validate_plan(cot, schema).empty());

    PromptPlan sc = ok;
    sc.name = "sc";
    sc.strategy = Strategy::self_consistency;
    CHECK_FALSE(validate_plan(sc, schema).empty());  // needs base_strategy and paths >= 2
    sc.base_strategy = Strategy::zero_shot;
    sc.paths = 5;
    CHECK(validate_plan(sc, schema).empty());
    CHECK(sc.shape_strategy() == Strategy::zero_shot);
    sc.base_strategy = Strategy::self_consistency;  // no nesting
    CHECK_FALSE(validate_plan(sc, schema).empty());
    sc.base_strategy = Strategy::zero_shot;
    sc.paths = 1;
    CHECK_FALSE(validate_plan(sc, schema).empty());

    PromptPlan zs_paths = ok;
    zs_paths.paths = 3;  // paths on a non-SC plan is a violation
    CHECK_FALSE(validate_plan(zs_paths, schema).empty());
}

TEST_CASE("validate_generation bounds") {
    GenerationConfig good;
    CHECK(validate_generation(good).empty());
    GenerationConfig bad;
    bad.temperature = 1.5;
    bad.max_tokens = 0;
    bad.timeout = std::chrono::milliseconds(0);
    CHECK(validate_generation(bad).size() >= 3);
    GenerationConfig neg;
    neg.temperature = -0.1;
    CHECK_FALSE(validate_generation(neg).empty());
}
