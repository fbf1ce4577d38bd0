#include "anno/client.hpp"

#include <cstdlib>
#include <future>
#include <semaphore>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "anno/digest.hpp"
#include "anno/error.hpp"

namespace anno {

const char* finish_reason_name(FinishReason f) {
    switch (f) {
        case FinishReason::stop: return "stop";
        case FinishReason::length: return "length";
        case FinishReason::error: return "error";
    }
    return "error";
}

FinishReason finish_reason_from_name(const std::string& name) {
    if (name == "stop") return FinishReason::stop;
    if (name == "length") return FinishReason::length;
    if (name == "error") return FinishReason::error;
    throw DataError("unknown finish reason '" + name + "'");
}

struct Client::Gate {
    explicit Gate(int count) : semaphore(count > 0 ? count : 1) {}
    std::counting_semaphore<> semaphore;

    struct Pass {
        explicit Pass(Gate& g) : gate(g) { gate.semaphore.acquire(); }
        ~Pass() { gate.semaphore.release(); }
        Gate& gate;
    };
};

Client::Client(const TemplateRegistry& templates, ClientOptions options)
    : templates_(templates),
      options_(std::move(options)),
      gate_(std::make_unique<Gate>(options_.max_inflight)) {}

Client::~Client() = default;

namespace {

std::string build_body(const ModelProfile& profile, bool structured,
                       const std::vector<ChatMessage>& messages, const std::string& rendered,
                       std::int64_t seed, int max_tokens) {
    nlohmann::json j;
    j["model"] = profile.model_name;
    j["temperature"] = profile.generation.temperature;
    j["seed"] = seed;
    j["max_tokens"] = max_tokens;
    if (structured) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& m : messages)
            arr.push_back({{"role", role_name(m.role)}, {"content", m.content}});
        j["messages"] = arr;
    } else {
        j["prompt"] = rendered;
    }
    return j.dump();
}

std::string role_lines(const std::vector<ChatMessage>& messages) {
    std::string out;
    for (const auto& m : messages) {
        out += role_name(m.role);
        out += ": ";
        out += m.content;
        out += "\n";
    }
    return out;
}

bool retryable_status(int status) { return status == 429; }

}  // namespace

std::string Client::request_body(const ModelProfile& profile,
                                 const std::vector<ChatMessage>& messages,
                                 const CallOverrides& overrides) const {
    const ChatTemplate& tmpl = templates_.get(profile.template_id);
    const std::int64_t seed = overrides.seed.value_or(profile.generation.seed);
    const int max_tokens = overrides.max_tokens.value_or(profile.generation.max_tokens);
    if (tmpl.structured) {
        validate_message_sequence(messages);
        return build_body(profile, true, messages, "", seed, max_tokens);
    }
    return build_body(profile, false, messages, render(tmpl, messages), seed, max_tokens);
}

const MockScript& Client::script_for(const std::string& path) {
    std::lock_guard<std::mutex> lock(scripts_mutex_);
    auto it = scripts_.find(path);
    if (it == scripts_.end()) it = scripts_.emplace(path, MockScript::from_file(path)).first;
    return it->second;
}

CompletionResult Client::complete(const ModelProfile& profile,
                                  const std::vector<ChatMessage>& messages,
                                  const CallOverrides& overrides) {
    const auto violations = validate_generation(profile.generation);
    if (!violations.empty()) {
        std::string all;
        for (const auto& v : violations) all += (all.empty() ? "" : "; ") + v;
        throw DataError("invalid generation config: " + all);
    }
    const std::int64_t seed = overrides.seed.value_or(profile.generation.seed);
    const int max_tokens = overrides.max_tokens.value_or(profile.generation.max_tokens);
    if (max_tokens < 1) throw DataError("max_tokens must be >= 1");
    return profile.is_mock() ? complete_mock(profile, messages, seed, max_tokens)
                             : complete_http(profile, messages, seed, max_tokens);
}

CompletionResult Client::complete_mock(const ModelProfile& profile,
                                       const std::vector<ChatMessage>& messages, std::int64_t seed,
                                       int max_tokens) {
    const ChatTemplate& tmpl = templates_.get(profile.template_id);
    std::string rendered;
    if (tmpl.structured) {
        validate_message_sequence(messages);
        rendered = role_lines(messages);
    } else {
        rendered = render(tmpl, messages);
    }
    const std::string target = "seed=" + std::to_string(seed) + "\n" + rendered;
    const auto [reply, finish] = script_for(profile.mock_script()).lookup(target);

    CompletionResult result;
    result.content = reply;
    result.finish_reason = finish == "length" ? FinishReason::length : FinishReason::stop;
    result.request_body = build_body(profile, tmpl.structured, messages,
                                     tmpl.structured ? "" : rendered, seed, max_tokens);
    result.request_digest = digest_request(result.request_body);
    result.seed = seed;
    result.latency = std::chrono::milliseconds{0};  // pinned for determinism
    return result;
}

CompletionResult Client::complete_http(const ModelProfile& profile,
                                       const std::vector<ChatMessage>& messages, std::int64_t seed,
                                       int max_tokens) {
    const ChatTemplate& tmpl = templates_.get(profile.template_id);
    std::string rendered;
    if (tmpl.structured) {
        validate_message_sequence(messages);
    } else {
        rendered = render(tmpl, messages);
    }
    const std::string body = build_body(profile, tmpl.structured, messages, rendered, seed,
                                        max_tokens);
    const std::string& path = tmpl.structured ? options_.api_path : options_.raw_api_path;

    httplib::Headers headers;
    if (const char* key = std::getenv(options_.api_key_env.c_str()); key && *key)
        headers.emplace("Authorization", std::string("Bearer ") + key);

    const auto timeout = profile.generation.timeout;
    const auto t0 = std::chrono::steady_clock::now();
    auto backoff = options_.retry.initial_backoff;
    int attempt = 0;
    std::string reply_body;
    for (;; ++attempt) {
        httplib::Client http(profile.endpoint);
        http.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
        http.set_read_timeout(timeout);
        http.set_write_timeout(timeout);

        std::string failure;
        int status = 0;
        {
            Gate::Pass pass(*gate_);
            auto res = http.Post(path, headers, body, "application/json");
            if (!res) {
                failure = "transport error: " + httplib::to_string(res.error());
            } else {
                status = res->status;
                reply_body = res->body;
            }
        }
        if (failure.empty() && status == 200) break;
        if (failure.empty() && !retryable_status(status))
            throw BackendError("HTTP " + std::to_string(status) + ": " + reply_body, status);
        if (attempt >= options_.retry.max_retries) {
            if (!failure.empty())
                throw BackendError(failure + " after " + std::to_string(attempt + 1) + " attempts",
                                   0);
            throw BackendError("HTTP " + std::to_string(status) + " after " +
                                   std::to_string(attempt + 1) + " attempts: " + reply_body,
                               status);
        }
        std::this_thread::sleep_for(backoff);
        backoff = std::chrono::milliseconds(
            static_cast<std::int64_t>(backoff.count() * options_.retry.multiplier));
    }
    const auto t1 = std::chrono::steady_clock::now();

    CompletionResult result;
    try {
        const nlohmann::json j = nlohmann::json::parse(reply_body);
        const auto& choice = j.at("choices").at(0);
        result.content = tmpl.structured ? choice.at("message").at("content").get<std::string>()
                                         : choice.at("text").get<std::string>();
        result.finish_reason = choice.value("finish_reason", "stop") == "length"
                                   ? FinishReason::length
                                   : FinishReason::stop;
    } catch (const nlohmann::json::exception& e) {
        throw BackendError(std::string("malformed completion response: ") + e.what() +
                               "; body: " + reply_body,
                           200);
    }
    result.request_body = body;
    result.request_digest = digest_request(body);
    result.seed = seed;
    result.retries = attempt;
    result.latency = std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0);
    return result;
}

TwoPhaseResult Client::run_two_phase(const ModelProfile& profile, const TurnScript& script,
                                     const CallOverrides& overrides) {
    if (script.phases != 2) throw DataError("run_two_phase requires a two-phase script");
    CallOverrides phase1_overrides = overrides;
    if (!phase1_overrides.max_tokens)
        phase1_overrides.max_tokens = profile.generation.reasoning_max_tokens;

    TwoPhaseResult out;
    out.final_messages = script.phase(1);
    out.phase1 = complete(profile, out.final_messages, phase1_overrides);
    if (out.phase1.finish_reason == FinishReason::length)
        throw BackendError("reasoning truncated (finish_reason=length); phase 2 not sent", 0);
    out.reasoning = out.phase1.content;
    out.final_messages.push_back({Role::assistant, out.phase1.content});
    for (auto& message : script.phase(2)) out.final_messages.push_back(std::move(message));
    out.result = complete(profile, out.final_messages, overrides);
    return out;
}

std::vector<PathRun> Client::run_paths(const ModelProfile& profile, const TurnScript& script,
                                       int paths) {
    if (paths < 1) throw DataError("run_paths requires paths >= 1");
    const auto violations = validate_generation(profile.generation);
    if (!violations.empty()) throw DataError("invalid generation config: " + violations.front());

    std::vector<PathRun> runs(static_cast<std::size_t>(paths));
    std::vector<std::future<void>> pending;
    pending.reserve(static_cast<std::size_t>(paths));
    for (int i = 0; i < paths; ++i) {
        const std::int64_t seed = profile.generation.identical_seeds
                                      ? profile.generation.seed
                                      : profile.generation.seed + i;
        pending.push_back(std::async(std::launch::async, [this, &profile, &script, &runs, i,
                                                          seed] {
            CallOverrides overrides;
            overrides.seed = seed;
            try {
                if (script.phases == 2) {
                    TwoPhaseResult two = run_two_phase(profile, script, overrides);
                    runs[static_cast<std::size_t>(i)].steps = {std::move(two.phase1),
                                                               std::move(two.result)};
                } else {
                    runs[static_cast<std::size_t>(i)].steps = {
                        complete(profile, script.phase(1), overrides)};
                }
            } catch (const std::exception& e) {
                CompletionResult failed;
                failed.finish_reason = FinishReason::error;
                failed.error = e.what();
                failed.seed = seed;
                runs[static_cast<std::size_t>(i)].steps = {std::move(failed)};
            }
        }));
    }
    for (auto& f : pending) f.get();
    return runs;
}

}  // namespace anno
