#include "anno/ingest.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "anno/error.hpp"
#include "anno/util.hpp"

namespace anno {

const char* corpus_format_name(CorpusFormat f) {
    return f == CorpusFormat::csv ? "csv" : "jsonl";
}

CorpusFormat corpus_format_from_name(const std::string& name) {
    if (name == "csv") return CorpusFormat::csv;
    if (name == "jsonl") return CorpusFormat::jsonl;
    throw DataError("unknown corpus format '" + name + "' (expected csv or jsonl)");
}

CorpusFormat detect_format(const std::string& path) {
    const std::size_t dot = path.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : ascii_lower(path.substr(dot + 1));
    if (ext == "csv") return CorpusFormat::csv;
    if (ext == "jsonl" || ext == "ndjson") return CorpusFormat::jsonl;
    throw DataError("cannot infer corpus format from '" + path + "'; pass --format csv|jsonl");
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text,
                                                std::vector<std::size_t>* record_lines) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool any_data = false;
    std::size_t line = 1, record_start = 1;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
        if (record_lines) record_lines->push_back(record_start);
        any_data = false;
        record_start = line;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
            any_data = true;
        } else if (c == ',') {
            end_field();
            any_data = true;
        } else if (c == '\r') {
            // swallowed; CRLF handled at the '\n'
        } else if (c == '\n') {
            ++line;
            if (any_data || !field.empty() || !record.empty()) end_record();
            record_start = line;
        } else {
            field += c;
            any_data = true;
        }
    }
    if (quoted) throw DataError("csv: unterminated quoted field starting near line " +
                                std::to_string(record_start));
    if (any_data || !field.empty() || !record.empty()) end_record();
    return records;
}

namespace {

std::vector<LabeledText> ingest_csv(const std::string& path, const std::string& text) {
    std::vector<std::size_t> lines;
    const auto records = parse_csv(text, &lines);
    if (records.empty()) throw DataError(path + ": empty csv file");

    std::map<std::string, std::size_t> columns;
    for (std::size_t c = 0; c < records[0].size(); ++c)
        columns[ascii_lower(trim(records[0][c]))] = c;
    if (!columns.count("id") || !columns.count("text"))
        throw DataError(path + ": header must name id and text columns");
    const std::size_t id_col = columns.at("id");
    const std::size_t text_col = columns.at("text");
    const bool has_gold = columns.count("gold") > 0;
    const std::size_t gold_col = has_gold ? columns.at("gold") : 0;

    std::vector<LabeledText> corpus;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& row = records[r];
        const std::string where = path + " line " + std::to_string(lines[r]);
        if (row.size() <= std::max(id_col, text_col))
            throw DataError(where + ": row has " + std::to_string(row.size()) +
                            " fields, expected at least " +
                            std::to_string(std::max(id_col, text_col) + 1));
        LabeledText item;
        item.id = trim(row[id_col]);
        item.text = row[text_col];
        if (has_gold && gold_col < row.size() && !is_blank(row[gold_col]))
            item.gold = trim(row[gold_col]);
        if (item.id.empty()) throw DataError(where + ": empty id");
        corpus.push_back(std::move(item));
    }
    return corpus;
}

std::vector<LabeledText> ingest_jsonl(const std::string& path, const std::string& text) {
    std::vector<LabeledText> corpus;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        const std::string where = path + " line " + std::to_string(line_no);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(where + ": " + e.what());
        }
        LabeledText item;
        try {
            if (j.at("id").is_number_integer())
                item.id = std::to_string(j.at("id").get<long long>());
            else
                item.id = j.at("id").get<std::string>();
            item.text = j.at("text").get<std::string>();
            if (j.contains("gold") && !j.at("gold").is_null())
                item.gold = j.at("gold").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw DataError(where + ": " + e.what());
        }
        if (item.id.empty()) throw DataError(where + ": empty id");
        corpus.push_back(std::move(item));
    }
    return corpus;
}

}  // namespace

std::vector<LabeledText> ingest(const std::string& path, CorpusFormat format,
                                const LabelSchema& schema) {
    const std::string text = read_file(path);
    std::vector<LabeledText> corpus =
        format == CorpusFormat::csv ? ingest_csv(path, text) : ingest_jsonl(path, text);

    std::set<std::string> seen;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        LabeledText& item = corpus[i];
        const std::string where = path + " item " + std::to_string(i + 1) + " (id '" + item.id +
                                  "')";
        if (!seen.insert(item.id).second) throw DataError(where + ": duplicate id");
        if (is_blank(item.text)) throw DataError(where + ": empty text");
        if (item.gold) {
            const auto canonical = schema.resolve(*item.gold);
            if (!canonical) throw DataError(where + ": unknown gold label '" + *item.gold + "'");
            item.gold = *canonical;
        }
    }
    return corpus;
}

std::vector<LabelCount> label_distribution(const std::vector<LabeledText>& corpus,
                                           const LabelSchema& schema) {
    std::vector<LabelCount> out;
    for (const auto& label : schema.labels()) out.push_back({label, 0, 0.0});
    for (const auto& item : corpus) {
        if (!item.gold)
            throw DataError("label_distribution: item '" + item.id + "' has no gold label");
        out[schema.index_of(*item.gold)].count++;
    }
    const double total = static_cast<double>(corpus.size());
    if (total > 0)
        for (auto& row : out) row.percent = 100.0 * static_cast<double>(row.count) / total;
    return out;
}

std::string distribution_text(const std::vector<LabelCount>& distribution) {
    std::size_t label_w = 5;  // "total"
    long total = 0;
    for (const auto& row : distribution) {
        label_w = std::max(label_w, row.label.size());
        total += row.count;
    }
    std::ostringstream out;
    auto line = [&](const std::string& label, long count, double percent) {
        std::string l = label;
        l.append(label_w + 2 - l.size(), ' ');
        std::string c = std::to_string(count);
        c.insert(0, c.size() < 8 ? 8 - c.size() : 0, ' ');
        std::string p = format_fixed(percent, 2) + "%";
        p.insert(0, p.size() < 10 ? 10 - p.size() : 0, ' ');
        out << l << c << p << "\n";
    };
    for (const auto& row : distribution) line(row.label, row.count, row.percent);
    line("total", total, total > 0 ? 100.0 : 0.0);
    return out.str();
}

}  // namespace anno
