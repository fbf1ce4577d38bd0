#include "anno/chat_template.hpp"

#include <nlohmann/json.hpp>

#include "anno/error.hpp"
#include "anno/util.hpp"

namespace anno {

void validate_message_sequence(const std::vector<ChatMessage>& messages) {
    if (messages.empty()) throw TemplateError("message sequence is empty");
    std::size_t i = 0;
    if (messages[0].role == Role::system) i = 1;
    Role expected = Role::user;
    for (; i < messages.size(); ++i) {
        if (messages[i].role == Role::system)
            throw TemplateError("system message allowed only in first position (turn " +
                                std::to_string(i) + ")");
        if (messages[i].role != expected)
            throw TemplateError("roles must alternate user/assistant; turn " + std::to_string(i) +
                                " is " + role_name(messages[i].role) + ", expected " +
                                role_name(expected));
        expected = expected == Role::user ? Role::assistant : Role::user;
    }
}

std::string render(const ChatTemplate& tmpl, const std::vector<ChatMessage>& messages) {
    if (tmpl.structured)
        throw TemplateError("template '" + tmpl.template_id +
                            "' is structured; messages are forwarded, not flattened");
    validate_message_sequence(messages);
    std::string out = tmpl.begin_token;
    for (const auto& message : messages) {
        const RoleMarker& marker = tmpl.role_markers.at(message.role);
        out += marker.prefix;
        out += message.content;
        out += marker.suffix;
    }
    out += tmpl.trailing_assistant_cue;
    return out;
}

TemplateRegistry TemplateRegistry::with_builtins() {
    TemplateRegistry registry;
    registry.register_template(
        {"gpt4_correct",
         "<s>",
         {{Role::system, {"GPT4 Correct System: ", "<|end_of_turn|>"}},
          {Role::user, {"GPT4 Correct User: ", "<|end_of_turn|>"}},
          {Role::assistant, {"GPT4 Correct Assistant: ", "<|end_of_turn|>"}}},
         "GPT4 Correct Assistant:",
         false});
    registry.register_template({"zephyr",
                                "",
                                {{Role::system, {"<|system|>\n", "</s>\n"}},
                                 {Role::user, {"<|user|>\n", "</s>\n"}},
                                 {Role::assistant, {"<|assistant|>\n", "</s>\n"}}},
                                "<|assistant|>\n",
                                false});
    registry.register_template({"structured_api", "", {}, "", true});
    return registry;
}

void TemplateRegistry::register_template(ChatTemplate tmpl) {
    if (tmpl.template_id.empty()) throw DataError("template has an empty template_id");
    if (!tmpl.structured) {
        for (Role role : {Role::system, Role::user, Role::assistant}) {
            if (!tmpl.role_markers.count(role))
                throw DataError("template '" + tmpl.template_id + "' lacks a marker for role " +
                                role_name(role));
        }
    }
    templates_[tmpl.template_id] = std::move(tmpl);
}

void TemplateRegistry::load_file(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("template file '" + path + "': " + e.what());
    }
    try {
        for (const auto& entry : j.at("templates")) {
            ChatTemplate tmpl;
            tmpl.template_id = entry.at("template_id").get<std::string>();
            tmpl.begin_token = entry.value("begin_token", "");
            tmpl.structured = entry.value("structured", false);
            tmpl.trailing_assistant_cue = entry.value("trailing_assistant_cue", "");
            if (entry.contains("roles")) {
                for (const auto& [role_key, marker] : entry.at("roles").items()) {
                    tmpl.role_markers[role_from_name(role_key)] = {
                        marker.value("prefix", ""), marker.value("suffix", "")};
                }
            }
            register_template(std::move(tmpl));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError("template file '" + path + "': " + e.what());
    }
}

bool TemplateRegistry::contains(const std::string& template_id) const {
    return templates_.count(template_id) > 0;
}

const ChatTemplate& TemplateRegistry::get(const std::string& template_id) const {
    auto it = templates_.find(template_id);
    if (it == templates_.end()) throw TemplateError("unknown template '" + template_id + "'");
    return it->second;
}

std::vector<std::string> TemplateRegistry::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, tmpl] : templates_) out.push_back(id);
    return out;
}

std::string TemplateRegistry::render(const std::string& template_id,
                                     const std::vector<ChatMessage>& messages) const {
    return anno::render(get(template_id), messages);
}

}  // namespace anno
