// Microbenchmarks for the hot paths of a grid run: prompt assembly, template
// flattening, reply normalization, voting and scoring.
#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "anno/chat_template.hpp"
#include "anno/metrics.hpp"
#include "anno/normalize.hpp"
#include "anno/prompt.hpp"

namespace {

using namespace anno;

const LabelSchema& sentiment_schema() {
    static const LabelSchema schema({"positive", "negative", "neutral"},
                                    {{"pos", "positive"}, {"neg", "negative"}});
    return schema;
}

PromptPlan few_shot_plan(int demos) {
    PromptPlan plan;
    plan.name = "bench";
    plan.strategy = demos == 0 ? Strategy::zero_shot
                    : demos == 1 ? Strategy::one_shot
                                 : Strategy::few_shot;
    plan.system_prompt = "You are an annotator that labels the sentiment of tweets.";
    plan.question = "Is the sentiment of this tweet positive, negative or neutral?";
    for (int i = 0; i < demos; ++i) {
        Demonstration demo;
        demo.text = "Demonstration tweet number " + std::to_string(i) +
                    " with a fairly typical length for the corpus.";
        demo.label = i % 2 == 0 ? "positive" : "negative";
        plan.demonstrations.push_back(demo);
    }
    return plan;
}

void BM_build_messages(benchmark::State& state) {
    const PromptPlan plan = few_shot_plan(static_cast<int>(state.range(0)));
    const std::string text = "Just finished the book my sister recommended, could not put it down";
    for (auto _ : state) {
        TurnScript script = build_messages(plan, text);
        benchmark::DoNotOptimize(script);
    }
}
BENCHMARK(BM_build_messages)->Arg(0)->Arg(2)->Arg(8);

void BM_render_flat_template(benchmark::State& state) {
    const TemplateRegistry registry = TemplateRegistry::with_builtins();
    const ChatTemplate& tmpl = registry.get("gpt4_correct");
    const TurnScript script =
        build_messages(few_shot_plan(static_cast<int>(state.range(0))),
                       "Just finished the book my sister recommended, could not put it down");
    const std::vector<ChatMessage> messages = script.phase(1);
    for (auto _ : state) {
        std::string rendered = render(tmpl, messages);
        benchmark::DoNotOptimize(rendered);
    }
}
BENCHMARK(BM_render_flat_template)->Arg(0)->Arg(8);

void BM_normalize_exact(benchmark::State& state) {
    for (auto _ : state) {
        ParseOutcome outcome = normalize("'Positive'.", sentiment_schema());
        benchmark::DoNotOptimize(outcome);
    }
}
BENCHMARK(BM_normalize_exact);

void BM_normalize_mention_scan(benchmark::State& state) {
    const std::string reply =
        "Looking at the wording and the exclamation marks, the overall sentiment "
        "of this tweet is negative, despite the cheerful opening.";
    for (auto _ : state) {
        ParseOutcome outcome = normalize(reply, sentiment_schema());
        benchmark::DoNotOptimize(outcome);
    }
}
BENCHMARK(BM_normalize_mention_scan);

void BM_majority_vote(benchmark::State& state) {
    std::vector<ParseOutcome> outcomes;
    for (int i = 0; i < 5; ++i) {
        ParseOutcome outcome;
        outcome.label = i % 2 == 0 ? "positive" : "negative";
        outcome.reason = ParseReason::exact;
        outcomes.push_back(outcome);
    }
    for (auto _ : state) {
        VoteResult vote = majority_vote(outcomes, sentiment_schema());
        benchmark::DoNotOptimize(vote);
    }
}
BENCHMARK(BM_majority_vote);

void BM_confusion_and_report(benchmark::State& state) {
    const auto& labels = sentiment_schema().labels();
    std::mt19937 rng(1234);
    std::uniform_int_distribution<std::size_t> pick(0, labels.size() - 1);
    const long n = state.range(0);
    std::vector<std::string> gold;
    std::vector<std::optional<std::string>> predicted;
    for (long i = 0; i < n; ++i) {
        gold.push_back(labels[pick(rng)]);
        predicted.emplace_back(labels[pick(rng)]);
    }
    for (auto _ : state) {
        ClassificationReport report = build_report(
            confusion(gold, predicted, sentiment_schema(), UnparsedPolicy::as_wrong));
        benchmark::DoNotOptimize(report);
    }
    state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_confusion_and_report)->Arg(100)->Arg(500);

void BM_cohen_kappa(benchmark::State& state) {
    ConfusionMatrix cm{sentiment_schema(),
                       {{111, 42, 18, 0}, {25, 312, 7, 0}, {14, 9, 200, 0}},
                       0,
                       UnparsedPolicy::as_wrong};
    for (auto _ : state) {
        double kappa = cohen_kappa(cm);
        benchmark::DoNotOptimize(kappa);
    }
}
BENCHMARK(BM_cohen_kappa);

}  // namespace

BENCHMARK_MAIN();
