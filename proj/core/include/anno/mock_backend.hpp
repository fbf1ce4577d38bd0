#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace anno {

/// Glob with `*` (any run, including empty) and `?` (any single byte).
bool glob_match(const std::string& pattern, const std::string& text);

struct MockRule {
    std::string match;                  // substring, or glob when glob=true
    bool glob = false;
    std::string reply;                  // "{seed}" expands to the request seed
    std::string finish_reason = "stop";
};

/// Scripted deterministic backend. Rules are tried in order against the match
/// target the client builds ("seed=<n>\n" + rendered request, or role-tagged
/// lines for message-native profiles); first match wins. Without a default
/// reply, an unmatched request is a backend error.
struct MockScript {
    std::vector<MockRule> rules;
    std::optional<std::string> default_reply;
    std::string default_finish_reason = "stop";

    static MockScript from_json(const std::string& json_text);  // throws DataError
    static MockScript from_file(const std::string& path);       // throws DataError

    /// Returns (reply, finish_reason). Throws BackendError when nothing
    /// matches and no default reply is configured.
    std::pair<std::string, std::string> lookup(const std::string& match_target) const;
};

}  // namespace anno
