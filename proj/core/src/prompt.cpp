#include "anno/prompt.hpp"

#include <sstream>

#include "anno/client.hpp"
#include "anno/error.hpp"
#include "anno/util.hpp"

namespace anno {

std::string interleave_question(const std::string& text, const std::string& question,
                                QuestionOrder order, const std::string& delimiter) {
    std::string out;
    if (order == QuestionOrder::text_then_question) {
        out = text + "\n";
        if (!delimiter.empty()) out += delimiter + " ";
        out += question;
    } else {
        out = question + "\n" + text;
        if (!delimiter.empty()) out += "\n" + delimiter;
    }
    return out;
}

std::vector<ChatMessage> TurnScript::phase(int phase_number) const {
    std::vector<ChatMessage> out;
    for (const auto& turn : turns)
        if (turn.phase == phase_number) out.push_back(turn.message);
    return out;
}

namespace {

void push(TurnScript& script, int phase, Role role, std::string content) {
    script.turns.push_back({phase, {role, std::move(content)}});
}

}  // namespace

TurnScript build_messages(const PromptPlan& plan, const std::string& target_text) {
    if (is_blank(target_text)) throw DataError("build_messages: target text is empty");
    // Defensive shape checks; label membership is validated at plan load time.
    const Strategy shape = plan.shape_strategy();
    switch (shape) {
        case Strategy::zero_shot:
            if (!plan.demonstrations.empty())
                throw DataError("build_messages: zero_shot plan carries demonstrations");
            break;
        case Strategy::one_shot:
            if (plan.demonstrations.size() != 1)
                throw DataError("build_messages: one_shot plan needs exactly 1 demonstration");
            break;
        case Strategy::few_shot:
            if (plan.demonstrations.size() < 2)
                throw DataError("build_messages: few_shot plan needs at least 2 demonstrations");
            break;
        case Strategy::chain_of_thought:
            if (!plan.reasoning_question)
                throw DataError("build_messages: chain_of_thought plan lacks a reasoning question");
            for (const auto& demo : plan.demonstrations)
                if (!demo.reasoning)
                    throw DataError(
                        "build_messages: chain_of_thought demonstration lacks reasoning");
            break;
        case Strategy::self_consistency:
            throw DataError("build_messages: self_consistency cannot be its own base strategy");
    }

    TurnScript script;
    push(script, 1, Role::system, plan.system_prompt);
    if (shape == Strategy::chain_of_thought) {
        script.phases = 2;
        for (const auto& demo : plan.demonstrations) {
            push(script, 1, Role::user,
                 interleave_question(demo.text, *plan.reasoning_question,
                                     QuestionOrder::text_then_question, plan.delimiter));
            push(script, 1, Role::assistant, *demo.reasoning);
            push(script, 1, Role::user, plan.question);
            push(script, 1, Role::assistant, demo.label);
        }
        push(script, 1, Role::user,
             interleave_question(target_text, *plan.reasoning_question,
                                 QuestionOrder::text_then_question, plan.delimiter));
        push(script, 2, Role::user, plan.question);
    } else {
        script.phases = 1;
        for (const auto& demo : plan.demonstrations) {
            push(script, 1, Role::user,
                 interleave_question(demo.text, plan.question, QuestionOrder::text_then_question,
                                     plan.delimiter));
            push(script, 1, Role::assistant, demo.label);
        }
        push(script, 1, Role::user,
             interleave_question(target_text, plan.question, QuestionOrder::text_then_question,
                                 plan.delimiter));
    }
    return script;
}

std::vector<Demonstration> generate_explanations(const std::vector<Demonstration>& demonstrations,
                                                 const PromptPlan& plan, const ModelProfile& model,
                                                 Client& client, ExplainErrorPolicy policy) {
    std::vector<Demonstration> out = demonstrations;
    for (std::size_t i = 0; i < out.size(); ++i) {
        Demonstration& demo = out[i];
        std::ostringstream ask;
        ask << interleave_question(demo.text, plan.question, QuestionOrder::text_then_question,
                                   plan.delimiter)
            << "\nThe correct answer is '" << demo.label << "'. Briefly explain why '"
            << demo.label << "' is the correct answer:";
        std::vector<ChatMessage> messages{{Role::system, plan.system_prompt},
                                          {Role::user, ask.str()}};
        CallOverrides overrides;
        overrides.max_tokens = model.generation.reasoning_max_tokens;
        try {
            CompletionResult result = client.complete(model, messages, overrides);
            demo.reasoning = result.content;
        } catch (const BackendError& e) {
            if (policy == ExplainErrorPolicy::fail_fast)
                throw BackendError("explanation for demonstration " + std::to_string(i) +
                                       " failed: " + e.what(),
                                   e.http_status());
            // skip: keep the demonstration as passed in
        }
    }
    return out;
}

}  // namespace anno
