#pragma once

#include <string>
#include <vector>

#include "anno/model.hpp"

namespace anno {

/// A named catalog of prompt plans sharing one label schema — one experiment
/// axis. Loaded from a JSON document listing task, labels, synonyms and
/// prompts (see load_prompt_set).
struct PromptSet {
    std::string task;
    LabelSchema schema{{"yes", "no"}};
    std::vector<PromptPlan> plans;

    const PromptPlan& plan(const std::string& name) const;  // throws DataError
};

/// Parse a prompt-set JSON document:
///   {"task": ..., "labels": [...], "synonyms": {alias: canonical, ...},
///    "prompts": [{"name","strategy","base_strategy"?,"system_prompt",
///                 "question","reasoning_question"?,"delimiter"?,
///                 "demonstrations":[{"text","label","reasoning"?}],
///                 "paths"?}, ...]}
/// Every plan is validated against the schema; violations and duplicate
/// prompt names are DataErrors naming the offending prompt.
PromptSet parse_prompt_set(const std::string& json_text);

PromptSet load_prompt_set(const std::string& path);

}  // namespace anno
