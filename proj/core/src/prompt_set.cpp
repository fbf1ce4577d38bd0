#include "anno/prompt_set.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "anno/error.hpp"
#include "anno/util.hpp"

namespace anno {

const PromptPlan& PromptSet::plan(const std::string& name) const {
    for (const auto& plan : plans)
        if (plan.name == name) return plan;
    throw DataError("prompt set '" + task + "' has no prompt named '" + name + "'");
}

PromptSet parse_prompt_set(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("prompt set: ") + e.what());
    }

    PromptSet set;
    try {
        set.task = j.value("task", "");
        std::map<std::string, std::string> synonyms;
        if (j.contains("synonyms"))
            for (const auto& [alias, canonical] : j.at("synonyms").items())
                synonyms[alias] = canonical.get<std::string>();
        set.schema = LabelSchema(j.at("labels").get<std::vector<std::string>>(), synonyms);

        for (const auto& entry : j.at("prompts")) {
            PromptPlan plan;
            plan.name = entry.at("name").get<std::string>();
            plan.strategy = strategy_from_name(entry.at("strategy").get<std::string>());
            if (entry.contains("base_strategy") && !entry.at("base_strategy").is_null())
                plan.base_strategy =
                    strategy_from_name(entry.at("base_strategy").get<std::string>());
            plan.system_prompt = entry.at("system_prompt").get<std::string>();
            plan.question = entry.at("question").get<std::string>();
            if (entry.contains("reasoning_question") && !entry.at("reasoning_question").is_null())
                plan.reasoning_question = entry.at("reasoning_question").get<std::string>();
            plan.delimiter = entry.value("delimiter", "");
            plan.paths = entry.value("paths", 1);
            for (const auto& demo_entry : entry.value("demonstrations", nlohmann::json::array())) {
                Demonstration demo;
                demo.text = demo_entry.at("text").get<std::string>();
                demo.label = demo_entry.at("label").get<std::string>();
                if (demo_entry.contains("reasoning") && !demo_entry.at("reasoning").is_null())
                    demo.reasoning = demo_entry.at("reasoning").get<std::string>();
                plan.demonstrations.push_back(std::move(demo));
            }
            set.plans.push_back(std::move(plan));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("prompt set: ") + e.what());
    }

    std::set<std::string> names;
    for (const auto& plan : set.plans) {
        if (plan.name.empty()) throw DataError("prompt set: prompt with empty name");
        if (!names.insert(plan.name).second)
            throw DataError("prompt set: duplicate prompt name '" + plan.name + "'");
        const auto violations = validate_plan(plan, set.schema);
        if (!violations.empty()) {
            std::string all;
            for (const auto& v : violations) all += (all.empty() ? "" : "; ") + v;
            throw DataError("prompt '" + plan.name + "': " + all);
        }
    }
    return set;
}

PromptSet load_prompt_set(const std::string& path) {
    try {
        return parse_prompt_set(read_file(path));
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

}  // namespace anno
