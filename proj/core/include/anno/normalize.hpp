#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "anno/model.hpp"

namespace anno {

enum class ParseReason { exact, synonym, unique_mention, none, ambiguous };

const char* parse_reason_name(ParseReason r);

/// Result of mapping one raw model reply to a canonical label. A label is
/// present exactly when reason is exact, synonym or unique_mention.
struct ParseOutcome {
    std::optional<std::string> label;
    std::optional<std::pair<std::size_t, std::size_t>> matched_span;  // [start,end) in raw bytes
    ParseReason reason = ParseReason::none;
};

/// Reply-to-label pipeline: lowercase, trim, strip surrounding quotes,
/// brackets and trailing punctuation; exact/synonym match first, then a
/// word-boundary scan for canonical label mentions (one distinct mention
/// wins, several are ambiguous, zero is none).
ParseOutcome normalize(const std::string& raw, const LabelSchema& schema);

struct VoteResult {
    std::optional<std::string> label;
    std::map<std::string, int> votes;  // only labels that received votes
    AnnotationStatus status = AnnotationStatus::unparsed;
};

/// One vote per labeled outcome. Strict plurality wins (status ok); ties are
/// broken toward the tied label earliest in schema order (status tie_broken);
/// zero votes leave the item unparsed. Throws std::invalid_argument on an
/// empty outcome list.
VoteResult majority_vote(const std::vector<ParseOutcome>& outcomes, const LabelSchema& schema);

/// Synonym table file: one "canonical: alias, alias, ..." mapping per line;
/// blank lines and lines starting with '#' are skipped.
std::map<std::string, std::string> load_synonym_table(const std::string& path);

}  // namespace anno
