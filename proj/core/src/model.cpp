#include "anno/model.hpp"

#include <algorithm>
#include <set>

#include "anno/error.hpp"
#include "anno/util.hpp"

namespace anno {

const char* role_name(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

Role role_from_name(const std::string& name) {
    if (name == "system") return Role::system;
    if (name == "user") return Role::user;
    if (name == "assistant") return Role::assistant;
    throw DataError("unknown role: '" + name + "'");
}

LabelSchema::LabelSchema(std::vector<std::string> labels,
                         std::map<std::string, std::string> synonyms) {
    if (labels.empty()) throw DataError("label schema must not be empty");
    std::set<std::string> seen;
    for (auto& label : labels) {
        label = ascii_lower(label);
        if (label.empty() || is_blank(label))
            throw DataError("canonical labels must not be empty or whitespace-only");
        if (!seen.insert(label).second)
            throw DataError("duplicate canonical label: '" + label + "'");
    }
    labels_ = std::move(labels);
    for (const auto& [alias, canonical] : synonyms) {
        std::string a = ascii_lower(alias);
        std::string c = ascii_lower(canonical);
        if (a.empty() || is_blank(a)) throw DataError("synonym alias must not be blank");
        if (!seen.count(c))
            throw DataError("synonym '" + a + "' maps to unknown label '" + c + "'");
        // Aliases must not shadow canonical labels.
        if (seen.count(a))
            throw DataError("synonym alias '" + a + "' collides with a canonical label");
        synonyms_[a] = c;
    }
}

bool LabelSchema::contains(const std::string& canonical) const {
    return std::find(labels_.begin(), labels_.end(), canonical) != labels_.end();
}

std::size_t LabelSchema::index_of(const std::string& canonical) const {
    auto it = std::find(labels_.begin(), labels_.end(), canonical);
    if (it == labels_.end()) throw DataError("unknown label: '" + canonical + "'");
    return static_cast<std::size_t>(it - labels_.begin());
}

std::optional<std::string> LabelSchema::resolve(const std::string& candidate) const {
    std::string c = ascii_lower(candidate);
    if (contains(c)) return c;
    auto it = synonyms_.find(c);
    if (it != synonyms_.end()) return it->second;
    return std::nullopt;
}

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::zero_shot: return "zero_shot";
        case Strategy::one_shot: return "one_shot";
        case Strategy::few_shot: return "few_shot";
        case Strategy::chain_of_thought: return "chain_of_thought";
        case Strategy::self_consistency: return "self_consistency";
    }
    return "zero_shot";
}

Strategy strategy_from_name(const std::string& name) {
    if (name == "zero_shot") return Strategy::zero_shot;
    if (name == "one_shot") return Strategy::one_shot;
    if (name == "few_shot") return Strategy::few_shot;
    if (name == "chain_of_thought") return Strategy::chain_of_thought;
    if (name == "self_consistency") return Strategy::self_consistency;
    throw DataError("unknown strategy: '" + name + "'");
}

Strategy PromptPlan::shape_strategy() const {
    if (strategy == Strategy::self_consistency)
        return base_strategy.value_or(Strategy::zero_shot);
    return strategy;
}

std::vector<std::string> validate_plan(const PromptPlan& plan, const LabelSchema& schema) {
    std::vector<std::string> violations;
    const bool sc = plan.strategy == Strategy::self_consistency;

    if (sc) {
        if (!plan.base_strategy)
            violations.push_back("self_consistency requires a base_strategy");
        else if (*plan.base_strategy == Strategy::self_consistency)
            violations.push_back("base_strategy must not be self_consistency");
        if (plan.paths < 2)
            violations.push_back("self_consistency requires paths >= 2");
    } else {
        if (plan.base_strategy)
            violations.push_back("base_strategy is only valid for self_consistency");
        if (plan.paths > 1)
            violations.push_back("paths > 1 is only valid for self_consistency");
    }
    if (plan.paths < 1) violations.push_back("paths must be positive");

    const Strategy shape = plan.shape_strategy();
    const std::size_t demos = plan.demonstrations.size();
    switch (shape) {
        case Strategy::zero_shot:
            if (demos != 0) violations.push_back("zero_shot requires 0 demonstrations");
            break;
        case Strategy::one_shot:
            if (demos != 1) violations.push_back("one_shot requires exactly 1 demonstration");
            break;
        case Strategy::few_shot:
            if (demos < 2) violations.push_back("few_shot requires at least 2 demonstrations");
            break;
        case Strategy::chain_of_thought:
            break;
        case Strategy::self_consistency:
            break;  // unreachable; shape_strategy never yields self_consistency for valid plans
    }

    if (shape == Strategy::chain_of_thought) {
        if (!plan.reasoning_question || is_blank(*plan.reasoning_question))
            violations.push_back("chain_of_thought requires a reasoning_question");
        for (std::size_t i = 0; i < demos; ++i) {
            const auto& d = plan.demonstrations[i];
            if (!d.reasoning || is_blank(*d.reasoning))
                violations.push_back("chain_of_thought demonstration " + std::to_string(i) +
                                     " requires a reasoning string");
        }
    } else if (plan.reasoning_question) {
        violations.push_back("reasoning_question is only valid for chain_of_thought");
    }

    for (std::size_t i = 0; i < demos; ++i) {
        const auto& d = plan.demonstrations[i];
        if (!schema.contains(ascii_lower(d.label)))
            violations.push_back("unknown label '" + d.label + "' in demonstration " +
                                 std::to_string(i));
    }

    return violations;
}

std::vector<std::string> validate_generation(const GenerationConfig& config) {
    std::vector<std::string> violations;
    if (!(config.temperature >= 0.0 && config.temperature <= 1.0))
        violations.push_back("temperature must be within [0,1]");
    if (config.max_tokens < 1) violations.push_back("max_tokens must be >= 1");
    if (config.reasoning_max_tokens < 1)
        violations.push_back("reasoning_max_tokens must be >= 1");
    if (config.timeout.count() <= 0) violations.push_back("timeout must be positive");
    return violations;
}

const char* status_name(AnnotationStatus s) {
    switch (s) {
        case AnnotationStatus::ok: return "ok";
        case AnnotationStatus::tie_broken: return "tie_broken";
        case AnnotationStatus::unparsed: return "unparsed";
    }
    return "unparsed";
}

AnnotationStatus status_from_name(const std::string& name) {
    if (name == "ok") return AnnotationStatus::ok;
    if (name == "tie_broken") return AnnotationStatus::tie_broken;
    if (name == "unparsed") return AnnotationStatus::unparsed;
    throw DataError("unknown status: '" + name + "'");
}

}  // namespace anno
