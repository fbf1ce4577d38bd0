#pragma once

#include <string>
#include <vector>

#include "anno/model.hpp"

namespace anno {

enum class CorpusFormat { csv, jsonl };

const char* corpus_format_name(CorpusFormat f);
CorpusFormat corpus_format_from_name(const std::string& name);  // throws DataError

/// Picks csv or jsonl from the file extension. Throws DataError otherwise.
CorpusFormat detect_format(const std::string& path);

/// Parse RFC-4180 CSV (quoted fields, embedded commas/newlines/quotes, CRLF
/// tolerant). record_lines, when given, receives the 1-based starting line of
/// each record. Throws DataError on unbalanced quotes.
std::vector<std::vector<std::string>> parse_csv(const std::string& text,
                                                std::vector<std::size_t>* record_lines = nullptr);

/// Load and validate a corpus. CSV needs an id,text[,gold] header; JSONL needs
/// one {"id","text","gold"?} object per line. Gold labels are resolved to
/// canonical (case and synonyms); unknown golds, duplicate ids, empty texts
/// and malformed rows are DataErrors naming the offending line.
std::vector<LabeledText> ingest(const std::string& path, CorpusFormat format,
                                const LabelSchema& schema);

struct LabelCount {
    std::string label;
    long count = 0;
    double percent = 0.0;
};

/// Gold-label distribution in schema order. Throws DataError when any item
/// lacks a gold label.
std::vector<LabelCount> label_distribution(const std::vector<LabeledText>& corpus,
                                           const LabelSchema& schema);

/// Aligned text table: one row per label (count, percent to 2 decimals) plus
/// a total row.
std::string distribution_text(const std::vector<LabelCount>& distribution);

}  // namespace anno
