#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "anno/chat_template.hpp"
#include "anno/mock_backend.hpp"
#include "anno/model.hpp"
#include "anno/prompt.hpp"

namespace anno {

enum class FinishReason { stop, length, error };

const char* finish_reason_name(FinishReason f);
FinishReason finish_reason_from_name(const std::string& name);

struct CompletionResult {
    std::string content;  // assistant text verbatim (no trimming)
    FinishReason finish_reason = FinishReason::stop;
    std::chrono::milliseconds latency{0};
    std::string request_digest;  // FNV-1a of request_body
    std::string request_body;    // exact JSON body sent (or that would be sent, for mocks)
    std::int64_t seed = 0;
    int retries = 0;
    std::optional<std::string> error;  // present iff finish_reason == error
};

/// max_retries counts re-attempts after the first try (3 retries = up to 4
/// attempts). Only transport failures, timeouts and HTTP 429 are retried.
struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
};

struct ClientOptions {
    int max_inflight = 4;  // process-wide concurrent request cap
    RetryPolicy retry;
    std::string api_path = "/v1/chat/completions";  // structured (message-native) endpoint
    std::string raw_api_path = "/v1/completions";   // flattened-prompt endpoint
    std::string api_key_env = "ANNO_API_KEY";       // bearer token source
};

struct CallOverrides {
    std::optional<std::int64_t> seed;
    std::optional<int> max_tokens;
};

/// One self-consistency path: the completion per executed phase, in order
/// (one entry for single-phase scripts, two for chain-of-thought).
struct PathRun {
    std::vector<CompletionResult> steps;

    const CompletionResult& final_result() const { return steps.back(); }
    bool failed() const {
        return steps.empty() || steps.back().finish_reason == FinishReason::error;
    }
};

struct TwoPhaseResult {
    std::string reasoning;
    std::vector<ChatMessage> final_messages;  // phase 1 + assistant(reasoning) + phase 2
    CompletionResult phase1;
    CompletionResult result;  // the final (classification) completion
};

/// Chat-completion client over an OpenAI-compatible HTTP endpoint or a
/// scripted mock ("mock:<script-path>" endpoints). Templates decide the wire
/// shape: structured templates post the message array to api_path; flattening
/// templates post the rendered prompt string to raw_api_path. The registry
/// must outlive the client. Calls are independent and may run concurrently;
/// an internal semaphore caps simultaneous requests at max_inflight.
class Client {
public:
    explicit Client(const TemplateRegistry& templates, ClientOptions options = {});
    ~Client();

    Client(const Client&) = delete;
    Client& operator=(const Client&) = delete;

    /// Single completion. Throws DataError on invalid generation config and
    /// BackendError on non-retryable failures or an exhausted retry budget.
    CompletionResult complete(const ModelProfile& profile,
                              const std::vector<ChatMessage>& messages,
                              const CallOverrides& overrides = {});

    /// Chain-of-thought protocol: run phase 1 (reasoning budget), append the
    /// reply as an assistant turn plus the phase-2 user turn, run again.
    /// Phase-1 failure or truncation aborts without issuing phase 2.
    TwoPhaseResult run_two_phase(const ModelProfile& profile, const TurnScript& script,
                                 const CallOverrides& overrides = {});

    /// Execute the script `paths` times with per-path seed = base seed + path
    /// index (or the base seed throughout under identical_seeds). Results are
    /// ordered by path index; per-path failures become finish_reason=error
    /// entries instead of propagating.
    std::vector<PathRun> run_paths(const ModelProfile& profile, const TurnScript& script,
                                   int paths);

    /// The exact JSON body complete() would send (used for digest checks).
    std::string request_body(const ModelProfile& profile, const std::vector<ChatMessage>& messages,
                             const CallOverrides& overrides = {}) const;

    const ClientOptions& options() const { return options_; }

private:
    struct Gate;

    CompletionResult complete_mock(const ModelProfile& profile,
                                   const std::vector<ChatMessage>& messages, std::int64_t seed,
                                   int max_tokens);
    CompletionResult complete_http(const ModelProfile& profile,
                                   const std::vector<ChatMessage>& messages, std::int64_t seed,
                                   int max_tokens);
    const MockScript& script_for(const std::string& path);

    const TemplateRegistry& templates_;
    ClientOptions options_;
    std::unique_ptr<Gate> gate_;
    std::mutex scripts_mutex_;
    std::map<std::string, MockScript> scripts_;
};

}  // namespace anno
