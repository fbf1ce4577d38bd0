#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace anno {

enum class Role { system, user, assistant };

const char* role_name(Role role);
Role role_from_name(const std::string& name);  // throws DataError

struct ChatMessage {
    Role role = Role::user;
    std::string content;

    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

/// Canonical label set plus alias table. Labels are lowercased at
/// construction and all downstream comparisons use the canonical forms.
/// Construction throws DataError when an invariant is violated (empty set,
/// duplicate labels, blank labels, synonyms pointing outside the set).
class LabelSchema {
public:
    explicit LabelSchema(std::vector<std::string> labels,
                         std::map<std::string, std::string> synonyms = {});

    const std::vector<std::string>& labels() const { return labels_; }
    const std::map<std::string, std::string>& synonyms() const { return synonyms_; }
    std::size_t size() const { return labels_.size(); }

    bool contains(const std::string& canonical) const;
    std::size_t index_of(const std::string& canonical) const;  // throws DataError

    // Resolve a candidate (canonical label or synonym, any case) to its
    // canonical form; empty optional when it matches neither.
    std::optional<std::string> resolve(const std::string& candidate) const;

    friend bool operator==(const LabelSchema&, const LabelSchema&) = default;

private:
    std::vector<std::string> labels_;
    std::map<std::string, std::string> synonyms_;  // alias -> canonical
};

/// One corpus item. gold, when present, is canonical for the active schema.
struct LabeledText {
    std::string id;
    std::string text;
    std::optional<std::string> gold;
};

struct Demonstration {
    std::string text;
    std::string label;
    std::optional<std::string> reasoning;  // required inside chain-of-thought plans
};

enum class Strategy { zero_shot, one_shot, few_shot, chain_of_thought, self_consistency };

const char* strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);  // throws DataError

/// Declarative description of one prompt: strategy, fixed text parts,
/// demonstrations and the self-consistency path count. Plans are plain data
/// (they are loaded from prompt-set files); validate_plan reports violations.
struct PromptPlan {
    std::string name;
    Strategy strategy = Strategy::zero_shot;
    std::optional<Strategy> base_strategy;          // self_consistency only
    std::string system_prompt;
    std::string question;                           // classification question; CoT phase 2
    std::optional<std::string> reasoning_question;  // chain-of-thought phase 1
    std::vector<Demonstration> demonstrations;
    std::string delimiter;  // optional marker between text and question, e.g. "--- End of essay."
    int paths = 1;          // self_consistency only (>= 2 there)

    // Strategy that determines the message shape: the base strategy for
    // self-consistency, the plan's own strategy otherwise.
    Strategy shape_strategy() const;
};

/// Returns every violated invariant, not only the first; empty means valid.
std::vector<std::string> validate_plan(const PromptPlan& plan, const LabelSchema& schema);

struct GenerationConfig {
    double temperature = 0.2;
    std::int64_t seed = 42;
    int max_tokens = 16;             // single-turn classification replies
    int reasoning_max_tokens = 256;  // chain-of-thought reasoning turns
    std::chrono::milliseconds timeout{30000};
    bool identical_seeds = false;    // disable the per-path seed offset
};

std::vector<std::string> validate_generation(const GenerationConfig& config);

struct ModelProfile {
    std::string model_name;
    std::string template_id;  // must be registered (gpt4_correct, zephyr, structured_api, ...)
    std::string endpoint;     // http(s) URL or "mock:<script-path>"
    GenerationConfig generation;

    bool is_mock() const { return endpoint.rfind("mock:", 0) == 0; }
    std::string mock_script() const { return is_mock() ? endpoint.substr(5) : std::string(); }
};

enum class AnnotationStatus { ok, tie_broken, unparsed };

const char* status_name(AnnotationStatus s);
AnnotationStatus status_from_name(const std::string& name);  // throws DataError

/// Per-item prediction. status ok/tie_broken implies predicted is present;
/// unparsed implies it is absent. Unparsable paths cast no vote, so the vote
/// total never exceeds the reply count.
struct AnnotationRecord {
    std::string item_id;
    std::optional<std::string> predicted;
    std::vector<std::string> raw_replies;  // one per path (plus reparse retries, appended)
    std::map<std::string, int> votes;      // canonical label -> count
    AnnotationStatus status = AnnotationStatus::unparsed;
    std::string transcript_digest;         // hash of rendered requests + raw replies
    std::vector<std::string> reasoning;    // per path, chain-of-thought only
    std::vector<std::string> errors;       // per-path backend failures, "path <i>: <detail>"
    std::int64_t latency_ms = 0;
};

}  // namespace anno
