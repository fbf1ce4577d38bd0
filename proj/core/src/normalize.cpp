#include "anno/normalize.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "anno/error.hpp"
#include "anno/util.hpp"

namespace anno {

namespace {

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

bool in_set(char c, std::string_view set) {
    return set.find(c) != std::string_view::npos;
}

}  // namespace

const char* parse_reason_name(ParseReason r) {
    switch (r) {
        case ParseReason::exact: return "exact";
        case ParseReason::synonym: return "synonym";
        case ParseReason::unique_mention: return "unique_mention";
        case ParseReason::none: return "none";
        case ParseReason::ambiguous: return "ambiguous";
    }
    return "none";
}

ParseOutcome normalize(const std::string& raw, const LabelSchema& schema) {
    const std::string low = ascii_lower(raw);

    // Trim and strip decoration down to a core window [b, e).
    std::size_t b = 0, e = low.size();
    bool changed = true;
    while (changed && b < e) {
        changed = false;
        while (b < e && std::isspace(static_cast<unsigned char>(low[b]))) { ++b; changed = true; }
        while (b < e && std::isspace(static_cast<unsigned char>(low[e - 1]))) { --e; changed = true; }
        if (b < e && in_set(low[b], "\"'`([{<")) { ++b; changed = true; }
        if (b < e && in_set(low[e - 1], "\"'`)]}>")) { --e; changed = true; }
        while (b < e && in_set(low[e - 1], ".,;:!?")) { --e; changed = true; }
    }
    const std::string core = low.substr(b, e - b);

    if (!core.empty()) {
        if (schema.contains(core))
            return {core, std::make_pair(b, e), ParseReason::exact};
        auto syn = schema.synonyms().find(core);
        if (syn != schema.synonyms().end())
            return {syn->second, std::make_pair(b, e), ParseReason::synonym};
    }

    // Scan the whole reply for canonical labels at word boundaries.
    std::optional<std::string> found;
    std::pair<std::size_t, std::size_t> span{0, 0};
    int distinct = 0;
    for (const auto& label : schema.labels()) {
        std::size_t pos = low.find(label);
        while (pos != std::string::npos) {
            const std::size_t end = pos + label.size();
            const bool left_ok = pos == 0 || !is_word_char(low[pos - 1]);
            const bool right_ok = end == low.size() || !is_word_char(low[end]);
            if (left_ok && right_ok) {
                ++distinct;
                if (!found) {
                    found = label;
                    span = {pos, end};
                }
                break;  // count each label once
            }
            pos = low.find(label, pos + 1);
        }
    }

    if (distinct == 1) return {found, span, ParseReason::unique_mention};
    if (distinct > 1) return {std::nullopt, std::nullopt, ParseReason::ambiguous};
    return {std::nullopt, std::nullopt, ParseReason::none};
}

VoteResult majority_vote(const std::vector<ParseOutcome>& outcomes, const LabelSchema& schema) {
    if (outcomes.empty())
        throw std::invalid_argument("majority_vote requires at least one outcome");

    VoteResult result;
    for (const auto& outcome : outcomes) {
        if (outcome.label) ++result.votes[*outcome.label];
    }
    if (result.votes.empty()) {
        result.status = AnnotationStatus::unparsed;
        return result;
    }

    int best = 0;
    for (const auto& [label, count] : result.votes) best = std::max(best, count);
    std::vector<std::string> leaders;
    for (const auto& [label, count] : result.votes)
        if (count == best) leaders.push_back(label);

    if (leaders.size() == 1) {
        result.label = leaders.front();
        result.status = AnnotationStatus::ok;
        return result;
    }
    // Tie: earliest tied label in schema order wins.
    const std::string* winner = nullptr;
    std::size_t best_index = schema.size();
    for (const auto& leader : leaders) {
        std::size_t idx = schema.index_of(leader);
        if (idx < best_index) {
            best_index = idx;
            winner = &leader;
        }
    }
    result.label = *winner;
    result.status = AnnotationStatus::tie_broken;
    return result;
}

std::map<std::string, std::string> load_synonym_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open synonym table: " + path);

    std::map<std::string, std::string> table;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto colon = t.find(':');
        if (colon == std::string::npos)
            throw DataError(path + ":" + std::to_string(lineno) +
                            ": expected 'canonical: alias, alias'");
        const std::string canonical = ascii_lower(trim(t.substr(0, colon)));
        if (canonical.empty())
            throw DataError(path + ":" + std::to_string(lineno) + ": empty canonical label");
        std::stringstream aliases(t.substr(colon + 1));
        std::string alias;
        while (std::getline(aliases, alias, ',')) {
            alias = ascii_lower(trim(alias));
            if (alias.empty()) continue;
            auto [it, inserted] = table.emplace(alias, canonical);
            if (!inserted && it->second != canonical)
                throw DataError(path + ":" + std::to_string(lineno) + ": alias '" + alias +
                                "' mapped to two different labels");
        }
    }
    return table;
}

}  // namespace anno
