#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include <anno/client.hpp>
#include <anno/error.hpp>
#include <anno/prompt.hpp>
#include <anno/util.hpp>

using namespace anno;

namespace {

PromptPlan zero_plan() {
    PromptPlan plan;
    plan.name = "zs";
    plan.strategy = Strategy::zero_shot;
    plan.system_prompt = "You are an assistant for classifying tweets for their sentiment.";
    plan.question = "Is the sentiment positive, negative or neutral?";
    return plan;
}

}  // namespace

TEST_CASE("interleave_question orders and delimiter") {
    CHECK(interleave_question("tweet A", "Q?") == "tweet A\nQ?");
    CHECK(interleave_question("tweet A", "Q?", QuestionOrder::question_then_text) ==
          "Q?\ntweet A");
    CHECK(interleave_question("essay body", "Is leisure activity mentioned?",
                              QuestionOrder::text_then_question, "--- End of essay.") ==
          "essay body\n--- End of essay. Is leisure activity mentioned?");
    CHECK(interleave_question("essay body", "Q?", QuestionOrder::question_then_text,
                              "--- End of essay.") == "Q?\nessay body\n--- End of essay.");
}

TEST_CASE("zero-shot script is [system, user]") {
    auto script = build_messages(zero_plan(), "hello");
    REQUIRE(script.turns.size() == 2);
    CHECK(script.phases == 1);
    CHECK(script.turns[0].message.role == Role::system);
    CHECK(script.turns[0].message.content ==
          "You are an assistant for classifying tweets for their sentiment.");
    CHECK(script.turns[1].message.role == Role::user);
    CHECK(script.turns[1].message.content ==
          "hello\nIs the sentiment positive, negative or neutral?");
    CHECK(script.turns[0].phase == 1);
    CHECK(script.phase(1).size() == 2);
    CHECK(script.phase(2).empty());
}

TEST_CASE("one-shot script embeds the demo as a user/assistant pair") {
    PromptPlan plan = zero_plan();
    plan.strategy = Strategy::one_shot;
    plan.demonstrations = {
        {"Missing Foo Fighters concert on the 12th at the gorge though so that's a major bummer",
         "negative",
         {}}};
    auto script = build_messages(plan, "target tweet");
    REQUIRE(script.turns.size() == 4);
    CHECK(script.turns[1].message.role == Role::user);
    CHECK(script.turns[1].message.content.find("Missing Foo Fighters") == 0);
    CHECK(script.turns[1].message.content.find(plan.question) != std::string::npos);
    CHECK(script.turns[2].message.role == Role::assistant);
    CHECK(script.turns[2].message.content == "negative");
    CHECK(script.turns[3].message.role == Role::user);
    CHECK(script.turns[3].message.content == "target tweet\n" + plan.question);
}

TEST_CASE("few-shot script is 2k+2 and preserves demo order") {
    PromptPlan plan = zero_plan();
    plan.strategy = Strategy::few_shot;
    plan.demonstrations = {{"first", "positive", {}},
                           {"second", "negative", {}},
                           {"third", "neutral", {}}};
    auto script = build_messages(plan, "target");
    REQUIRE(script.turns.size() == 2 * 3 + 2);
    CHECK(script.turns[1].message.content.rfind("first", 0) == 0);
    CHECK(script.turns[2].message.content == "positive");
    CHECK(script.turns[3].message.content.rfind("second", 0) == 0);
    CHECK(script.turns[4].message.content == "negative");
    CHECK(script.turns[5].message.content.rfind("third", 0) == 0);
    CHECK(script.turns[6].message.content == "neutral");
    CHECK(script.turns[7].message.role == Role::user);
}

TEST_CASE("chain-of-thought script has two phases") {
    PromptPlan plan = zero_plan();
    plan.strategy = Strategy::chain_of_thought;
    plan.reasoning_question = "Think about it and provide some thoughts:";
    plan.question = "One-word reply:";

    SUBCASE("without demonstrations") {
        auto script = build_messages(plan, "some tweet");
        CHECK(script.phases == 2);
        auto phase1 = script.phase(1);
        REQUIRE(phase1.size() == 2);
        CHECK(phase1[1].content == "some tweet\nThink about it and provide some thoughts:");
        auto phase2 = script.phase(2);
        REQUIRE(phase2.size() == 1);
        CHECK(phase2[0].role == Role::user);
        CHECK(phase2[0].content == "One-word reply:");
    }

    SUBCASE("with demonstrations: quadruples of user/assistant turns") {
        plan.demonstrations = {{"demo tweet", "negative", "It reads grim."},
                               {"another demo", "positive", "Sounds upbeat."}};
        auto script = build_messages(plan, "some tweet");
        auto phase1 = script.phase(1);
        REQUIRE(phase1.size() == 2 + 4 * 2);
        CHECK(phase1[1].content == "demo tweet\nThink about it and provide some thoughts:");
        CHECK(phase1[2].role == Role::assistant);
        CHECK(phase1[2].content == "It reads grim.");
        CHECK(phase1[3].role == Role::user);
        CHECK(phase1[3].content == "One-word reply:");
        CHECK(phase1[4].role == Role::assistant);
        CHECK(phase1[4].content == "negative");
        CHECK(phase1[5].content == "another demo\nThink about it and provide some thoughts:");
        CHECK(phase1.back().content == "some tweet\nThink about it and provide some thoughts:");
        CHECK(script.phase(2).size() == 1);
    }

    SUBCASE("delimiter is applied to text-bearing turns only") {
        plan.delimiter = "--- End of essay.";
        auto script = build_messages(plan, "essay text");
        auto phase1 = script.phase(1);
        CHECK(phase1[1].content ==
              "essay text\n--- End of essay. Think about it and provide some thoughts:");
        CHECK(script.phase(2)[0].content == "One-word reply:");
    }
}

TEST_CASE("self-consistency borrows the base strategy's shape") {
    PromptPlan plan = zero_plan();
    plan.strategy = Strategy::self_consistency;
    plan.base_strategy = Strategy::few_shot;
    plan.paths = 5;
    plan.demonstrations = {{"a", "positive", {}}, {"b", "negative", {}}};
    auto script = build_messages(plan, "target");
    CHECK(script.turns.size() == 6);
    CHECK(script.phases == 1);
}

TEST_CASE("build_messages rejects malformed input") {
    CHECK_THROWS_AS(build_messages(zero_plan(), ""), DataError);
    CHECK_THROWS_AS(build_messages(zero_plan(), "  \t"), DataError);

    PromptPlan demos = zero_plan();
    demos.demonstrations = {{"x", "positive", {}}};
    CHECK_THROWS_AS(build_messages(demos, "t"), DataError);

    PromptPlan cot = zero_plan();
    cot.strategy = Strategy::chain_of_thought;
    CHECK_THROWS_AS(build_messages(cot, "t"), DataError);  // no reasoning question

    PromptPlan nested = zero_plan();
    nested.strategy = Strategy::self_consistency;
    nested.base_strategy = Strategy::self_consistency;
    nested.paths = 3;
    CHECK_THROWS_AS(build_messages(nested, "t"), DataError);
}

TEST_CASE("identical plan and target build byte-identical scripts") {
    PromptPlan plan = zero_plan();
    plan.strategy = Strategy::few_shot;
    plan.demonstrations = {{"a", "positive", {}}, {"b", "negative", {}}};
    CHECK(build_messages(plan, "same target") == build_messages(plan, "same target"));
}

TEST_CASE("generate_explanations attaches model-written reasoning") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "anno_test_explain";
    fs::create_directories(dir);
    const fs::path script = dir / "explain.json";
    write_file(script.string(),
               R"({"rules": [{"match": "correct answer", "reply": "Because the text says so."}]})");

    TemplateRegistry registry = TemplateRegistry::with_builtins();
    Client client(registry);

    ModelProfile profile;
    profile.model_name = "mock-model";
    profile.template_id = "structured_api";
    profile.endpoint = "mock:" + script.string();

    PromptPlan plan = zero_plan();
    std::vector<Demonstration> demos = {{"text one", "positive", {}}, {"text two", "negative", {}}};

    auto out = generate_explanations(demos, plan, profile, client);
    REQUIRE(out.size() == 2);
    CHECK(out[0].reasoning == "Because the text says so.");
    CHECK(out[1].reasoning == "Because the text says so.");
    CHECK(out[0].text == "text one");  // order and payload preserved

    // A script with no matching rule and no default is a backend error...
    const fs::path empty_script = dir / "empty.json";
    write_file(empty_script.string(), R"({"rules": []})");
    profile.endpoint = "mock:" + empty_script.string();
    CHECK_THROWS_AS(generate_explanations(demos, plan, profile, client), BackendError);
    try {
        generate_explanations(demos, plan, profile, client);
    } catch (const BackendError& e) {
        CHECK(std::string(e.what()).find("demonstration 0") != std::string::npos);
    }

    // ...unless the caller opts into skipping failed demonstrations.
    auto skipped =
        generate_explanations(demos, plan, profile, client, ExplainErrorPolicy::skip);
    REQUIRE(skipped.size() == 2);
    CHECK_FALSE(skipped[0].reasoning.has_value());
    CHECK_FALSE(skipped[1].reasoning.has_value());

    fs::remove_all(dir);
}
