#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "anno/client.hpp"
#include "anno/ingest.hpp"
#include "anno/metrics.hpp"
#include "anno/model.hpp"
#include "anno/prompt_set.hpp"

namespace anno {

/// One prompt×model experiment grid over a gold corpus.
struct GridSpec {
    std::string corpus_path;
    std::optional<CorpusFormat> format;  // inferred from the extension when absent
    PromptSet prompt_set;
    std::vector<ModelProfile> models;
    UnparsedPolicy policy = UnparsedPolicy::as_wrong;
    std::string output_dir;
    std::int64_t base_seed = 42;
    int reparse_retry = 0;
};

struct GridCellResult {
    std::string prompt;
    std::string model;
    ClassificationReport report;
    std::string record_path;
    std::chrono::milliseconds wall_time{0};
    bool failed = false;
    std::string error;
};

struct RunHooks {
    std::function<bool()> should_abort;  // polled between items; true stops the run cleanly
    std::function<void(const std::string&)> on_progress;
};

/// Annotate one corpus item under one plan and profile: build the script, run
/// all paths, normalize replies, vote. Parse failures yield status unparsed;
/// when every path fails at the backend a BackendError is thrown instead.
/// reparse_retry re-queries single-path items whose reply did not parse, with
/// a "One-word reply:" nudge appended, up to the given number of times.
AnnotationRecord annotate_item(Client& client, const PromptPlan& plan,
                               const ModelProfile& profile, const LabeledText& item,
                               const LabelSchema& schema, int reparse_retry = 0);

struct CellRun {
    GridCellResult result;
    bool aborted = false;
    long items_new = 0;
    long items_resumed = 0;
};

/// Run one cell, appending records to record_path in corpus order (bounded
/// concurrency, in-order writes). Items already present in a valid prefix of
/// the record file are skipped, so an interrupted cell resumes without
/// duplicates; a torn trailing line is truncated away first.
CellRun run_cell(Client& client, const PromptPlan& plan, const ModelProfile& profile,
                 const std::vector<LabeledText>& corpus, const LabelSchema& schema,
                 UnparsedPolicy policy, const std::string& record_path, int reparse_retry = 0,
                 const RunHooks& hooks = {});

struct GridOutcome {
    std::vector<GridCellResult> cells;
    bool aborted = false;
    long corpus_items = 0;
};

/// Execute every (prompt, model) cell in declared order (prompt-major),
/// persisting per-cell records and reports plus grid summaries under
/// spec.output_dir. Cell failures are recorded and the grid continues;
/// summaries are written only for completed (non-aborted) runs. Timestamps
/// live solely in run_manifest.json so data artifacts stay deterministic.
GridOutcome run_grid(const GridSpec& spec, Client& client, const RunHooks& hooks = {});

struct BestRow {
    std::string prompt;
    std::string model;
    double kappa = 0.0;
    double accuracy = 0.0;
    double weighted_f1 = 0.0;
    double macro_f1 = 0.0;
};

/// Per prompt, the model maximizing kappa; ties broken by accuracy, then by
/// model declaration order. Failed cells are ignored.
std::vector<BestRow> best_per_prompt(const std::vector<GridCellResult>& cells);

std::string best_per_prompt_csv(const std::vector<BestRow>& rows);
std::string best_per_prompt_text(const std::vector<BestRow>& rows);
std::string cells_csv(const std::vector<GridCellResult>& cells);
std::string cells_text(const std::vector<GridCellResult>& cells);

/// One JSONL line (no trailing newline): sorted keys, deterministic bytes.
std::string record_to_jsonl(const AnnotationRecord& record, const std::string& prompt,
                            const std::string& model, std::int64_t seed);

AnnotationRecord record_from_jsonl(const std::string& line, std::string* prompt = nullptr,
                                   std::string* model = nullptr, std::int64_t* seed = nullptr);

/// Strict loader: every line must parse; DataErrors name the line.
std::vector<AnnotationRecord> load_records(const std::string& path);

struct RecordPrefix {
    std::vector<AnnotationRecord> records;
    std::size_t valid_bytes = 0;  // byte length of the parseable prefix
};

/// Tolerant loader for resume: reads records up to the first torn or invalid
/// line. A missing file yields an empty prefix.
RecordPrefix load_record_prefix(const std::string& path);

/// Score records against the corpus gold labels (matched by item_id).
/// Duplicate records and records without a matching corpus item raise
/// DataError; corpus items without a record or without gold are not scored.
ClassificationReport evaluate_records(const std::vector<AnnotationRecord>& records,
                                      const std::vector<LabeledText>& corpus,
                                      const LabelSchema& schema, UnparsedPolicy policy);

}  // namespace anno
