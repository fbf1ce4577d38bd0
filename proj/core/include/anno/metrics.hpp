#pragma once

#include <optional>
#include <string>
#include <vector>

#include "anno/model.hpp"

namespace anno {

enum class UnparsedPolicy { as_wrong, exclude };

const char* unparsed_policy_name(UnparsedPolicy p);
UnparsedPolicy unparsed_policy_from_name(const std::string& name);

/// k gold rows (schema order) by k+1 predicted columns: the extra last column
/// collects unparsed predictions under the as_wrong policy, so they count
/// against accuracy, recall and kappa observed agreement. Items dropped under
/// the exclude policy are tallied in unparsed_count instead.
struct ConfusionMatrix {
    LabelSchema schema;
    std::vector<std::vector<long>> counts;  // k x (k+1)
    long unparsed_count = 0;                // excluded items
    UnparsedPolicy policy = UnparsedPolicy::as_wrong;

    long n() const;  // scored items = sum of counts
    long diagonal() const;
    long row_total(std::size_t gold) const;
    long col_total(std::size_t predicted) const;  // predicted may be k (pseudo-column)
    long pseudo_column_total() const;
};

ConfusionMatrix confusion(const std::vector<std::string>& gold,
                          const std::vector<std::optional<std::string>>& predicted,
                          const LabelSchema& schema, UnparsedPolicy policy);

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long support = 0;
    bool zero_division = false;  // precision or recall reported as 0 by convention
};

/// precision_c = TP/column total (0 when the column is empty),
/// recall_c = TP/row total, f1 the harmonic mean (0 when p + r = 0).
std::vector<ClassMetrics> precision_recall_f1(const ConfusionMatrix& cm);

struct Aggregates {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double weighted_f1 = 0.0;
};

/// macro = unweighted mean of class F1; weighted = support-weighted mean;
/// accuracy = sum(recall_c * support_c) / sum(support_c), i.e. diagonal/total.
/// Throws DataError when supports sum to zero.
Aggregates aggregate(const std::vector<ClassMetrics>& per_class);

/// kappa = (p_o - p_e) / (1 - p_e); exactly 1 when p_o = p_e = 1, 0 when the
/// denominator degenerates otherwise. Throws DataError on an empty matrix.
double cohen_kappa(const ConfusionMatrix& cm);

/// [0.8,1.0] very good; [0.6,0.8) good; [0.4,0.6) moderate; [0.2,0.4) fair;
/// below 0.2 poor. Throws std::domain_error outside [-1,1].
std::string interpret_kappa(double kappa);

double round_half_up(double value, int decimals);

struct ClassificationReport {
    std::vector<std::string> labels;  // schema order
    std::vector<ClassMetrics> per_class;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double weighted_f1 = 0.0;
    double kappa = 0.0;
    std::string kappa_band;
    long n = 0;         // scored items
    long unparsed = 0;  // pseudo-column total (as_wrong) or excluded items
    UnparsedPolicy policy = UnparsedPolicy::as_wrong;
    bool zero_division_flag = false;
};

ClassificationReport build_report(const ConfusionMatrix& cm);

/// Aligned plain-text report: per-class precision/recall/F1/N columns with a
/// macro Overall column, then the aggregate block (macro F1, weighted F1,
/// accuracy, kappa, kappa band, unparsed policy line).
std::string report_text(const ClassificationReport& report);

/// Machine-readable twin of report_text (full-precision values).
std::string report_json(const ClassificationReport& report, const std::string& prompt = "",
                        const std::string& model = "");

ClassificationReport report_from_json(const std::string& json_text, std::string* prompt = nullptr,
                                      std::string* model = nullptr);

}  // namespace anno
