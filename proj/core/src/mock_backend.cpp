#include "anno/mock_backend.hpp"

#include <nlohmann/json.hpp>

#include "anno/error.hpp"
#include "anno/util.hpp"

namespace anno {

bool glob_match(const std::string& pattern, const std::string& text) {
    std::size_t p = 0, t = 0;
    std::size_t star = std::string::npos, star_t = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            star_t = t;
        } else if (star != std::string::npos) {
            p = star + 1;
            t = ++star_t;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

namespace {

std::string expand_seed(const std::string& reply, const std::string& match_target) {
    const std::size_t pos = reply.find("{seed}");
    if (pos == std::string::npos) return reply;
    std::string seed;
    if (match_target.rfind("seed=", 0) == 0) {
        const std::size_t end = match_target.find('\n');
        seed = match_target.substr(5, end == std::string::npos ? std::string::npos : end - 5);
    }
    std::string out = reply;
    std::size_t at = 0;
    while ((at = out.find("{seed}", at)) != std::string::npos) {
        out.replace(at, 6, seed);
        at += seed.size();
    }
    return out;
}

}  // namespace

MockScript MockScript::from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("mock script: ") + e.what());
    }
    MockScript script;
    try {
        for (const auto& entry : j.value("rules", nlohmann::json::array())) {
            MockRule rule;
            rule.match = entry.at("match").get<std::string>();
            rule.glob = entry.value("glob", false);
            rule.reply = entry.at("reply").get<std::string>();
            rule.finish_reason = entry.value("finish_reason", "stop");
            script.rules.push_back(std::move(rule));
        }
        if (j.contains("default_reply"))
            script.default_reply = j.at("default_reply").get<std::string>();
        script.default_finish_reason = j.value("default_finish_reason", "stop");
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("mock script: ") + e.what());
    }
    return script;
}

MockScript MockScript::from_file(const std::string& path) {
    try {
        return from_json(read_file(path));
    } catch (const DataError& e) {
        throw DataError("mock script '" + path + "': " + e.what());
    }
}

std::pair<std::string, std::string> MockScript::lookup(const std::string& match_target) const {
    for (const auto& rule : rules) {
        const bool hit = rule.glob ? glob_match(rule.match, match_target)
                                   : match_target.find(rule.match) != std::string::npos;
        if (hit) return {expand_seed(rule.reply, match_target), rule.finish_reason};
    }
    if (default_reply)
        return {expand_seed(*default_reply, match_target), default_finish_reason};
    throw BackendError("mock script has no rule matching the request and no default reply", 0);
}

}  // namespace anno
