#include "anno/metrics.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "anno/error.hpp"
#include "anno/util.hpp"

namespace anno {

const char* unparsed_policy_name(UnparsedPolicy p) {
    return p == UnparsedPolicy::as_wrong ? "as_wrong" : "exclude";
}

UnparsedPolicy unparsed_policy_from_name(const std::string& name) {
    if (name == "as_wrong") return UnparsedPolicy::as_wrong;
    if (name == "exclude") return UnparsedPolicy::exclude;
    throw DataError("unknown unparsed policy: '" + name + "' (expected as_wrong or exclude)");
}

long ConfusionMatrix::n() const {
    long total = 0;
    for (const auto& row : counts)
        total = std::accumulate(row.begin(), row.end(), total);
    return total;
}

long ConfusionMatrix::diagonal() const {
    long d = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) d += counts[i][i];
    return d;
}

long ConfusionMatrix::row_total(std::size_t gold) const {
    const auto& row = counts.at(gold);
    return std::accumulate(row.begin(), row.end(), 0L);
}

long ConfusionMatrix::col_total(std::size_t predicted) const {
    long total = 0;
    for (const auto& row : counts) total += row.at(predicted);
    return total;
}

long ConfusionMatrix::pseudo_column_total() const {
    return col_total(schema.size());
}

ConfusionMatrix confusion(const std::vector<std::string>& gold,
                          const std::vector<std::optional<std::string>>& predicted,
                          const LabelSchema& schema, UnparsedPolicy policy) {
    if (gold.size() != predicted.size())
        throw DataError("confusion: gold and predicted lists differ in length (" +
                        std::to_string(gold.size()) + " vs " + std::to_string(predicted.size()) +
                        ")");
    const std::size_t k = schema.size();
    ConfusionMatrix cm{schema, std::vector<std::vector<long>>(k, std::vector<long>(k + 1, 0)), 0,
                       policy};
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const std::size_t gi = schema.index_of(gold[i]);  // throws on unknown gold
        if (predicted[i]) {
            cm.counts[gi][schema.index_of(*predicted[i])]++;
        } else if (policy == UnparsedPolicy::as_wrong) {
            cm.counts[gi][k]++;
        } else {
            cm.unparsed_count++;
        }
    }
    return cm;
}

std::vector<ClassMetrics> precision_recall_f1(const ConfusionMatrix& cm) {
    const std::size_t k = cm.schema.size();
    std::vector<ClassMetrics> out(k);
    for (std::size_t c = 0; c < k; ++c) {
        const long tp = cm.counts[c][c];
        const long col = cm.col_total(c);
        const long row = cm.row_total(c);
        ClassMetrics& m = out[c];
        m.support = row;
        if (col == 0) {
            m.precision = 0.0;
            m.zero_division = true;
        } else {
            m.precision = static_cast<double>(tp) / static_cast<double>(col);
        }
        if (row == 0) {
            m.recall = 0.0;
            m.zero_division = true;
        } else {
            m.recall = static_cast<double>(tp) / static_cast<double>(row);
        }
        m.f1 = (m.precision + m.recall) > 0.0
                   ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                   : 0.0;
    }
    return out;
}

Aggregates aggregate(const std::vector<ClassMetrics>& per_class) {
    if (per_class.empty()) throw DataError("aggregate: no classes");
    long total = 0;
    double f1_sum = 0.0, f1_weighted = 0.0, tp_sum = 0.0;
    for (const auto& m : per_class) {
        total += m.support;
        f1_sum += m.f1;
        f1_weighted += m.f1 * static_cast<double>(m.support);
        tp_sum += m.recall * static_cast<double>(m.support);
    }
    if (total <= 0) throw DataError("aggregate: supports sum to zero");
    Aggregates agg;
    agg.macro_f1 = f1_sum / static_cast<double>(per_class.size());
    agg.weighted_f1 = f1_weighted / static_cast<double>(total);
    agg.accuracy = tp_sum / static_cast<double>(total);
    return agg;
}

double cohen_kappa(const ConfusionMatrix& cm) {
    const long n = cm.n();
    if (n == 0) throw DataError("cohen_kappa: empty matrix");
    const std::size_t k = cm.schema.size();
    const double dn = static_cast<double>(n);
    const double p_o = static_cast<double>(cm.diagonal()) / dn;
    double p_e = 0.0;
    // The pseudo-column has no gold row, so its marginal product is zero.
    for (std::size_t c = 0; c < k; ++c) {
        p_e += (static_cast<double>(cm.row_total(c)) / dn) *
               (static_cast<double>(cm.col_total(c)) / dn);
    }
    const double denom = 1.0 - p_e;
    if (std::abs(denom) < 1e-15) return p_o >= 1.0 - 1e-15 ? 1.0 : 0.0;
    return (p_o - p_e) / denom;
}

std::string interpret_kappa(double kappa) {
    if (kappa < -1.0 || kappa > 1.0)
        throw std::domain_error("kappa out of range [-1,1]: " + std::to_string(kappa));
    if (kappa >= 0.8) return "very good";
    if (kappa >= 0.6) return "good";
    if (kappa >= 0.4) return "moderate";
    if (kappa >= 0.2) return "fair";
    return "poor";
}

double round_half_up(double value, int decimals) {
    const double p = std::pow(10.0, decimals);
    return std::floor(value * p + 0.5) / p;
}

ClassificationReport build_report(const ConfusionMatrix& cm) {
    ClassificationReport report;
    report.labels = cm.schema.labels();
    report.per_class = precision_recall_f1(cm);
    const Aggregates agg = aggregate(report.per_class);
    report.accuracy = agg.accuracy;
    report.macro_f1 = agg.macro_f1;
    report.weighted_f1 = agg.weighted_f1;
    report.kappa = cohen_kappa(cm);
    report.kappa_band = interpret_kappa(report.kappa);
    report.n = cm.n();
    report.policy = cm.policy;
    report.unparsed = cm.policy == UnparsedPolicy::exclude ? cm.unparsed_count
                                                           : cm.pseudo_column_total();
    for (const auto& m : report.per_class)
        if (m.zero_division) report.zero_division_flag = true;
    return report;
}

namespace {

std::string display_label(const std::string& label) {
    std::string out = label;
    if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') out[0] -= 'a' - 'A';
    return out;
}

void pad_to(std::string& line, std::size_t width) {
    if (line.size() < width) line.append(width - line.size(), ' ');
}

}  // namespace

std::string report_text(const ClassificationReport& report) {
    const std::size_t k = report.labels.size();
    const std::size_t head_w = 22;  // fits "Weighted Avg F1-Score"
    std::vector<std::size_t> col_w(k + 1);
    std::vector<std::string> headers;
    for (const auto& label : report.labels) headers.push_back(display_label(label));
    headers.push_back("Overall");
    for (std::size_t c = 0; c <= k; ++c) col_w[c] = std::max<std::size_t>(headers[c].size() + 2, 10);

    std::ostringstream out;
    auto cell = [&](const std::string& text, std::size_t width) {
        std::string s = text;
        if (s.size() < width) s.insert(0, width - s.size(), ' ');
        return s;
    };
    auto row = [&](const std::string& head, const std::vector<std::string>& cells) {
        std::string line = head;
        pad_to(line, head_w);
        for (std::size_t c = 0; c < cells.size(); ++c) line += cell(cells[c], col_w[c]);
        out << line << "\n";
    };
    auto summary = [&](const std::string& head, const std::string& value) {
        std::string line = head;
        std::size_t total = head_w;
        for (std::size_t c = 0; c <= k; ++c) total += col_w[c];
        if (line.size() + value.size() < total)
            line.append(total - line.size() - value.size(), ' ');
        out << line << value << "\n";
    };

    row("", headers);
    std::vector<std::string> p_cells, r_cells, f_cells, n_cells;
    double p_sum = 0.0, r_sum = 0.0;
    for (const auto& m : report.per_class) {
        p_cells.push_back(format_fixed(m.precision, 2));
        r_cells.push_back(format_fixed(m.recall, 2));
        f_cells.push_back(format_fixed(m.f1, 2));
        n_cells.push_back(std::to_string(m.support));
        p_sum += m.precision;
        r_sum += m.recall;
    }
    // Overall column: macro means for precision/recall, macro F1 for F1.
    p_cells.push_back(format_fixed(p_sum / static_cast<double>(k), 2));
    r_cells.push_back(format_fixed(r_sum / static_cast<double>(k), 2));
    f_cells.push_back(format_fixed(report.macro_f1, 2));
    n_cells.push_back(std::to_string(report.n));
    row("Precision", p_cells);
    row("Recall", r_cells);
    row("F1-Score", f_cells);
    row("N", n_cells);
    summary("Macro Average F1-Score", format_fixed(report.macro_f1, 2));
    summary("Weighted Avg F1-Score", format_fixed(report.weighted_f1, 2));
    summary("Accuracy", format_fixed(report.accuracy, 2));
    summary("Kappa", format_fixed(report.kappa, 2));
    summary("Kappa Band", report.kappa_band);
    summary(std::string("Unparsed (") + unparsed_policy_name(report.policy) + ")",
            std::to_string(report.unparsed));
    if (report.zero_division_flag)
        out << "* precision/recall reported as 0 for classes with an empty column or row\n";
    return out.str();
}

std::string report_json(const ClassificationReport& report, const std::string& prompt,
                        const std::string& model) {
    nlohmann::json j;
    if (!prompt.empty()) j["prompt"] = prompt;
    if (!model.empty()) j["model"] = model;
    nlohmann::json per_class = nlohmann::json::object();
    for (std::size_t c = 0; c < report.labels.size(); ++c) {
        const auto& m = report.per_class[c];
        per_class[report.labels[c]] = {{"precision", m.precision},
                                       {"recall", m.recall},
                                       {"f1", m.f1},
                                       {"support", m.support}};
    }
    j["labels"] = report.labels;
    j["per_class"] = per_class;
    j["accuracy"] = report.accuracy;
    j["macro_f1"] = report.macro_f1;
    j["weighted_f1"] = report.weighted_f1;
    j["kappa"] = report.kappa;
    j["kappa_band"] = report.kappa_band;
    j["n"] = report.n;
    j["unparsed"] = report.unparsed;
    j["unparsed_policy"] = unparsed_policy_name(report.policy);
    j["zero_division"] = report.zero_division_flag;
    return j.dump(2) + "\n";
}

ClassificationReport report_from_json(const std::string& json_text, std::string* prompt,
                                      std::string* model) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid report json: ") + e.what());
    }
    ClassificationReport report;
    try {
        if (prompt) *prompt = j.value("prompt", "");
        if (model) *model = j.value("model", "");
        report.labels = j.at("labels").get<std::vector<std::string>>();
        for (const auto& label : report.labels) {
            const auto& m = j.at("per_class").at(label);
            ClassMetrics cm;
            cm.precision = m.at("precision").get<double>();
            cm.recall = m.at("recall").get<double>();
            cm.f1 = m.at("f1").get<double>();
            cm.support = m.at("support").get<long>();
            report.per_class.push_back(cm);
        }
        report.accuracy = j.at("accuracy").get<double>();
        report.macro_f1 = j.at("macro_f1").get<double>();
        report.weighted_f1 = j.at("weighted_f1").get<double>();
        report.kappa = j.at("kappa").get<double>();
        report.kappa_band = j.at("kappa_band").get<std::string>();
        report.n = j.at("n").get<long>();
        report.unparsed = j.at("unparsed").get<long>();
        report.policy = unparsed_policy_from_name(j.at("unparsed_policy").get<std::string>());
        report.zero_division_flag = j.value("zero_division", false);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("invalid report json: ") + e.what());
    }
    return report;
}

}  // namespace anno
