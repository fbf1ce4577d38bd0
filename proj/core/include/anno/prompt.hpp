#pragma once

#include <string>
#include <vector>

#include "anno/model.hpp"

namespace anno {

class Client;

enum class QuestionOrder { text_then_question, question_then_text };

/// Deterministic concatenation of target text and classification question,
/// separated by a single newline. A non-empty delimiter (e.g. "--- End of
/// essay.") is inserted between text and question; in question-first order it
/// trails the text instead.
std::string interleave_question(const std::string& text, const std::string& question,
                                QuestionOrder order = QuestionOrder::text_then_question,
                                const std::string& delimiter = "");

struct PhaseTurn {
    int phase = 1;
    ChatMessage message;

    friend bool operator==(const PhaseTurn&, const PhaseTurn&) = default;
};

/// Ordered conversation script. Single-turn strategies use one phase;
/// chain-of-thought adds a second phase holding the lone classification
/// question that is sent after the model's reasoning reply.
struct TurnScript {
    std::vector<PhaseTurn> turns;
    int phases = 1;

    std::vector<ChatMessage> phase(int phase_number) const;

    friend bool operator==(const TurnScript&, const TurnScript&) = default;
};

/// Build the message script for one plan and target text.
///
/// zero_shot            [system, user(text + question)]
/// one_shot / few_shot  [system, {user(demo + question), assistant(label)}..., user(text + question)]
/// chain_of_thought     phase 1: [system, {user(demo + reasoning question), assistant(reasoning),
///                      user(question), assistant(label)}..., user(text + reasoning question)]
///                      phase 2: [user(question)]
/// self_consistency     the base strategy's script (to be executed `paths` times)
///
/// Throws DataError on an invalid plan or empty target text.
TurnScript build_messages(const PromptPlan& plan, const std::string& target_text);

enum class ExplainErrorPolicy { fail_fast, skip };

/// Explain-then-annotate bootstrap: ask the model, for each demonstration, to
/// explain why its gold label is correct, and attach the replies as reasoning.
/// Order is preserved. Backend failures either propagate (fail_fast) or leave
/// that demonstration untouched (skip).
std::vector<Demonstration> generate_explanations(const std::vector<Demonstration>& demonstrations,
                                                 const PromptPlan& plan, const ModelProfile& model,
                                                 Client& client,
                                                 ExplainErrorPolicy policy = ExplainErrorPolicy::fail_fast);

}  // namespace anno
