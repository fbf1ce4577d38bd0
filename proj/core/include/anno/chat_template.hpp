#pragma once

#include <map>
#include <string>
#include <vector>

#include "anno/model.hpp"

namespace anno {

struct RoleMarker {
    std::string prefix;
    std::string suffix;

    friend bool operator==(const RoleMarker&, const RoleMarker&) = default;
};

/// Flattening recipe for raw-completion backends. Exact bytes are significant;
/// the builtin definitions pin the published conventions of each model family
/// (single-space role colons for gpt4_correct, newline markers for zephyr).
/// A structured template skips flattening entirely: the message list is
/// forwarded as-is to a message-native API.
struct ChatTemplate {
    std::string template_id;
    std::string begin_token;
    std::map<Role, RoleMarker> role_markers;
    std::string trailing_assistant_cue;
    bool structured = false;

    friend bool operator==(const ChatTemplate&, const ChatTemplate&) = default;
};

/// Throws TemplateError unless messages hold at most one leading system turn
/// followed by strictly alternating user/assistant turns starting with user.
void validate_message_sequence(const std::vector<ChatMessage>& messages);

/// Flatten messages: begin_token, then prefix + content + suffix per turn,
/// then the bare trailing assistant cue. Throws TemplateError for structured
/// templates and malformed sequences.
std::string render(const ChatTemplate& tmpl, const std::vector<ChatMessage>& messages);

class TemplateRegistry {
public:
    /// Registry preloaded with gpt4_correct, zephyr and structured_api.
    static TemplateRegistry with_builtins();

    /// Registers or replaces a template. Throws DataError when a flattening
    /// template lacks a marker for one of the three roles.
    void register_template(ChatTemplate tmpl);

    /// Loads template definitions from a JSON file ({"templates": [...]}),
    /// registering each. Throws DataError on unreadable or malformed files.
    void load_file(const std::string& path);

    bool contains(const std::string& template_id) const;
    const ChatTemplate& get(const std::string& template_id) const;  // throws TemplateError
    std::vector<std::string> ids() const;

    std::string render(const std::string& template_id,
                       const std::vector<ChatMessage>& messages) const;

private:
    std::map<std::string, ChatTemplate> templates_;
};

}  // namespace anno
