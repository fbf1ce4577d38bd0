#include "anno/runner.hpp"

#include <algorithm>
#include <ctime>
#include <deque>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "anno/digest.hpp"
#include "anno/error.hpp"
#include "anno/normalize.hpp"
#include "anno/prompt.hpp"
#include "anno/util.hpp"

namespace anno {

namespace {

int path_count(const PromptPlan& plan) {
    return plan.strategy == Strategy::self_consistency ? plan.paths : 1;
}

std::vector<ChatMessage> final_messages_for_reparse(const TurnScript& script,
                                                    const std::string& reasoning) {
    std::vector<ChatMessage> messages = script.phase(1);
    if (script.phases == 2) {
        messages.push_back({Role::assistant, reasoning});
        for (const auto& m : script.phase(2)) messages.push_back(m);
    }
    return messages;
}

}  // namespace

AnnotationRecord annotate_item(Client& client, const PromptPlan& plan,
                               const ModelProfile& profile, const LabeledText& item,
                               const LabelSchema& schema, int reparse_retry) {
    const TurnScript script = build_messages(plan, item.text);
    const int paths = path_count(plan);
    const std::vector<PathRun> runs = client.run_paths(profile, script, paths);

    AnnotationRecord record;
    record.item_id = item.id;
    TranscriptDigest digest;
    std::vector<ParseOutcome> outcomes;
    std::size_t failures = 0;
    std::string first_error;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const PathRun& run = runs[i];
        if (run.failed()) {
            ++failures;
            const std::string detail =
                run.steps.empty() ? "no result" : run.steps.back().error.value_or("unknown error");
            if (first_error.empty()) first_error = detail;
            record.raw_replies.push_back("");
            record.errors.push_back("path " + std::to_string(i) + ": " + detail);
            continue;
        }
        for (const auto& step : run.steps) {
            digest.add(step.request_body, step.content);
            record.latency_ms += step.latency.count();
        }
        if (run.steps.size() == 2) record.reasoning.push_back(run.steps.front().content);
        record.raw_replies.push_back(run.final_result().content);
        outcomes.push_back(normalize(run.final_result().content, schema));
    }
    if (failures == runs.size())
        throw BackendError("item '" + item.id + "': all " + std::to_string(runs.size()) +
                               " paths failed: " + first_error,
                           0);

    // Single-path parse failures may be re-asked with a one-word nudge; each
    // retry changes the request, so a scripted mock can answer differently.
    if (paths == 1 && reparse_retry > 0 && !outcomes.front().label) {
        std::vector<ChatMessage> messages = final_messages_for_reparse(
            script, record.reasoning.empty() ? std::string() : record.reasoning.front());
        for (int attempt = 0; attempt < reparse_retry && !outcomes.front().label; ++attempt) {
            for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
                if (it->role == Role::user) {
                    it->content += "\nOne-word reply:";
                    break;
                }
            }
            CompletionResult retry;
            try {
                retry = client.complete(profile, messages);
            } catch (const BackendError& e) {
                record.errors.push_back("reparse retry " + std::to_string(attempt + 1) + ": " +
                                        e.what());
                break;
            }
            digest.add(retry.request_body, retry.content);
            record.latency_ms += retry.latency.count();
            record.raw_replies.push_back(retry.content);
            outcomes.front() = normalize(retry.content, schema);
        }
    }

    const VoteResult vote = majority_vote(outcomes, schema);
    record.predicted = vote.label;
    record.votes = vote.votes;
    record.status = vote.status;
    record.transcript_digest = digest.hex();
    return record;
}

std::string record_to_jsonl(const AnnotationRecord& record, const std::string& prompt,
                            const std::string& model, std::int64_t seed) {
    nlohmann::json j;
    j["item_id"] = record.item_id;
    j["prompt"] = prompt;
    j["model"] = model;
    j["seed"] = seed;
    if (record.predicted)
        j["predicted"] = *record.predicted;
    else
        j["predicted"] = nullptr;
    j["status"] = status_name(record.status);
    j["votes"] = record.votes;
    j["raw_replies"] = record.raw_replies;
    if (!record.reasoning.empty()) j["reasoning"] = record.reasoning;
    if (!record.errors.empty()) j["errors"] = record.errors;
    j["transcript_digest"] = record.transcript_digest;
    j["latency_ms"] = record.latency_ms;
    return j.dump();
}

AnnotationRecord record_from_jsonl(const std::string& line, std::string* prompt,
                                   std::string* model, std::int64_t* seed) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("record: ") + e.what());
    }
    AnnotationRecord record;
    try {
        record.item_id = j.at("item_id").get<std::string>();
        if (prompt) *prompt = j.value("prompt", "");
        if (model) *model = j.value("model", "");
        if (seed) *seed = j.value("seed", static_cast<std::int64_t>(0));
        if (j.contains("predicted") && !j.at("predicted").is_null())
            record.predicted = j.at("predicted").get<std::string>();
        record.status = status_from_name(j.at("status").get<std::string>());
        if (j.contains("votes"))
            record.votes = j.at("votes").get<std::map<std::string, int>>();
        if (j.contains("raw_replies"))
            record.raw_replies = j.at("raw_replies").get<std::vector<std::string>>();
        if (j.contains("reasoning"))
            record.reasoning = j.at("reasoning").get<std::vector<std::string>>();
        if (j.contains("errors")) record.errors = j.at("errors").get<std::vector<std::string>>();
        record.transcript_digest = j.value("transcript_digest", "");
        record.latency_ms = j.value("latency_ms", static_cast<std::int64_t>(0));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("record: ") + e.what());
    }
    if ((record.status == AnnotationStatus::unparsed) == record.predicted.has_value())
        throw DataError("record '" + record.item_id +
                        "': status and predicted presence disagree");
    return record;
}

std::vector<AnnotationRecord> load_records(const std::string& path) {
    const std::string text = read_file(path);
    std::vector<AnnotationRecord> records;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        try {
            records.push_back(record_from_jsonl(line));
        } catch (const DataError& e) {
            throw DataError(path + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return records;
}

RecordPrefix load_record_prefix(const std::string& path) {
    RecordPrefix prefix;
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return prefix;
    const std::string text = read_file(path);
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) break;  // torn tail: record lines always end in '\n'
        const std::string line = text.substr(pos, nl - pos);
        if (!is_blank(line)) {
            try {
                prefix.records.push_back(record_from_jsonl(line));
            } catch (const DataError&) {
                break;
            }
        }
        pos = nl + 1;
        prefix.valid_bytes = pos;
    }
    return prefix;
}

ClassificationReport evaluate_records(const std::vector<AnnotationRecord>& records,
                                      const std::vector<LabeledText>& corpus,
                                      const LabelSchema& schema, UnparsedPolicy policy) {
    std::map<std::string, const LabeledText*> items;
    for (const auto& item : corpus) items[item.id] = &item;

    std::set<std::string> seen;
    std::vector<std::string> gold;
    std::vector<std::optional<std::string>> predicted;
    for (const auto& record : records) {
        if (!seen.insert(record.item_id).second)
            throw DataError("duplicate record for item '" + record.item_id + "'");
        const auto it = items.find(record.item_id);
        if (it == items.end())
            throw DataError("record item '" + record.item_id + "' is not in the corpus");
        if (!it->second->gold) continue;
        gold.push_back(*it->second->gold);
        predicted.push_back(record.predicted);
    }
    if (gold.empty()) throw DataError("no gold-labeled items matched the records");
    return build_report(confusion(gold, predicted, schema, policy));
}

CellRun run_cell(Client& client, const PromptPlan& plan, const ModelProfile& profile,
                 const std::vector<LabeledText>& corpus, const LabelSchema& schema,
                 UnparsedPolicy policy, const std::string& record_path, int reparse_retry,
                 const RunHooks& hooks) {
    const auto t0 = std::chrono::steady_clock::now();
    CellRun cell;
    cell.result.prompt = plan.name;
    cell.result.model = profile.model_name;
    cell.result.record_path = record_path;

    RecordPrefix prefix = load_record_prefix(record_path);
    {
        // Drop a torn trailing line so this run appends after valid records.
        std::error_code ec;
        const auto size = std::filesystem::exists(record_path, ec)
                              ? std::filesystem::file_size(record_path, ec)
                              : 0;
        if (!ec && size > prefix.valid_bytes)
            std::filesystem::resize_file(record_path, prefix.valid_bytes, ec);
    }
    std::set<std::string> done;
    for (const auto& record : prefix.records) done.insert(record.item_id);
    cell.items_resumed = static_cast<long>(done.size());

    std::vector<AnnotationRecord> records = prefix.records;
    std::ofstream out(record_path, std::ios::app | std::ios::binary);
    if (!out) throw DataError("cannot open record file '" + record_path + "' for append");

    const std::size_t window =
        static_cast<std::size_t>(std::max(1, client.options().max_inflight));
    std::deque<std::future<AnnotationRecord>> pending;
    auto drain_one = [&] {
        AnnotationRecord record = pending.front().get();
        pending.pop_front();
        out << record_to_jsonl(record, plan.name, profile.model_name, profile.generation.seed)
            << "\n";
        out.flush();
        records.push_back(std::move(record));
        ++cell.items_new;
    };

    for (const auto& item : corpus) {
        if (hooks.should_abort && hooks.should_abort()) {
            cell.aborted = true;
            break;
        }
        if (done.count(item.id)) continue;
        if (pending.size() >= window) drain_one();
        pending.push_back(std::async(std::launch::async, [&client, &plan, &profile, &item,
                                                          &schema, reparse_retry] {
            return annotate_item(client, plan, profile, item, schema, reparse_retry);
        }));
    }
    while (!pending.empty()) drain_one();

    if (!cell.aborted) {
        if (records.size() != corpus.size())
            throw DataError("cell " + plan.name + " x " + profile.model_name + ": " +
                            std::to_string(records.size()) + " records for " +
                            std::to_string(corpus.size()) + " items");
        cell.result.report = evaluate_records(records, corpus, schema, policy);
    }
    cell.result.wall_time = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - t0);
    if (hooks.on_progress) {
        std::ostringstream note;
        note << plan.name << " x " << profile.model_name << ": " << cell.items_new << " new, "
             << cell.items_resumed << " resumed" << (cell.aborted ? " (aborted)" : "");
        hooks.on_progress(note.str());
    }
    return cell;
}

namespace {

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string iso_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string cell_stem(const std::string& prompt, const std::string& model) {
    return sanitize_filename(prompt) + "__" + sanitize_filename(model);
}

}  // namespace

GridOutcome run_grid(const GridSpec& spec, Client& client, const RunHooks& hooks) {
    {
        std::set<std::string> names;
        for (const auto& profile : spec.models)
            if (!names.insert(profile.model_name).second)
                throw DataError("duplicate model name '" + profile.model_name + "'");
        if (spec.models.empty()) throw DataError("grid has no models");
        if (spec.prompt_set.plans.empty()) throw DataError("grid has no prompts");
        if (spec.output_dir.empty()) throw DataError("grid has no output directory");
    }
    const CorpusFormat format = spec.format ? *spec.format : detect_format(spec.corpus_path);
    const std::vector<LabeledText> corpus =
        ingest(spec.corpus_path, format, spec.prompt_set.schema);

    namespace fs = std::filesystem;
    const fs::path out_dir(spec.output_dir);
    fs::create_directories(out_dir / "records");
    fs::create_directories(out_dir / "reports");
    const std::string started_at = iso_utc_now();

    GridOutcome outcome;
    outcome.corpus_items = static_cast<long>(corpus.size());
    for (const auto& plan : spec.prompt_set.plans) {
        if (outcome.aborted) break;
        for (const auto& base_profile : spec.models) {
            if (hooks.should_abort && hooks.should_abort()) {
                outcome.aborted = true;
                break;
            }
            ModelProfile profile = base_profile;
            profile.generation.seed = spec.base_seed;
            const std::string stem = cell_stem(plan.name, profile.model_name);
            const std::string record_path = (out_dir / "records" / (stem + ".jsonl")).string();
            try {
                CellRun run = run_cell(client, plan, profile, corpus, spec.prompt_set.schema,
                                       spec.policy, record_path, spec.reparse_retry, hooks);
                if (run.aborted) {
                    outcome.aborted = true;
                    break;
                }
                write_file((out_dir / "reports" / (stem + ".txt")).string(),
                           report_text(run.result.report));
                write_file((out_dir / "reports" / (stem + ".json")).string(),
                           report_json(run.result.report, plan.name, profile.model_name));
                outcome.cells.push_back(std::move(run.result));
            } catch (const std::exception& e) {
                GridCellResult failed;
                failed.prompt = plan.name;
                failed.model = profile.model_name;
                failed.record_path = record_path;
                failed.failed = true;
                failed.error = e.what();
                outcome.cells.push_back(std::move(failed));
                if (hooks.on_progress)
                    hooks.on_progress(plan.name + " x " + profile.model_name +
                                      " FAILED: " + failed.error);
            }
        }
    }

    if (!outcome.aborted) {
        write_file((out_dir / "summary.csv").string(), cells_csv(outcome.cells));
        write_file((out_dir / "summary.txt").string(), cells_text(outcome.cells));
        const auto best = best_per_prompt(outcome.cells);
        write_file((out_dir / "best_per_prompt.csv").string(), best_per_prompt_csv(best));
        write_file((out_dir / "best_per_prompt.txt").string(), best_per_prompt_text(best));
    }

    long failed_cells = 0;
    for (const auto& cell : outcome.cells)
        if (cell.failed) ++failed_cells;
    nlohmann::json manifest;
    manifest["started_at"] = started_at;
    manifest["finished_at"] = iso_utc_now();
    manifest["corpus"] = spec.corpus_path;
    manifest["corpus_items"] = outcome.corpus_items;
    manifest["prompts"] = spec.prompt_set.plans.size();
    manifest["models"] = spec.models.size();
    manifest["unparsed_policy"] = unparsed_policy_name(spec.policy);
    manifest["base_seed"] = spec.base_seed;
    manifest["cells_total"] = outcome.cells.size();
    manifest["cells_failed"] = failed_cells;
    manifest["aborted"] = outcome.aborted;
    write_file((out_dir / "run_manifest.json").string(), manifest.dump(2) + "\n");
    return outcome;
}

std::vector<BestRow> best_per_prompt(const std::vector<GridCellResult>& cells) {
    std::vector<std::string> order;
    std::map<std::string, const GridCellResult*> best;
    for (const auto& cell : cells) {
        if (cell.failed) continue;
        auto it = best.find(cell.prompt);
        if (it == best.end()) {
            order.push_back(cell.prompt);
            best[cell.prompt] = &cell;
            continue;
        }
        const ClassificationReport& challenger = cell.report;
        const ClassificationReport& incumbent = it->second->report;
        if (challenger.kappa > incumbent.kappa ||
            (challenger.kappa == incumbent.kappa && challenger.accuracy > incumbent.accuracy))
            it->second = &cell;
    }
    std::vector<BestRow> rows;
    for (const auto& prompt : order) {
        const GridCellResult& cell = *best.at(prompt);
        rows.push_back({cell.prompt, cell.model, cell.report.kappa, cell.report.accuracy,
                        cell.report.weighted_f1, cell.report.macro_f1});
    }
    return rows;
}

std::string best_per_prompt_csv(const std::vector<BestRow>& rows) {
    std::string out = "prompt,model,kappa,accuracy,weighted_f1,macro_f1\n";
    for (const auto& row : rows) {
        out += csv_escape(row.prompt) + "," + csv_escape(row.model) + "," +
               format_fixed(row.kappa, 2) + "," + format_fixed(row.accuracy, 2) + "," +
               format_fixed(row.weighted_f1, 2) + "," + format_fixed(row.macro_f1, 2) + "\n";
    }
    return out;
}

namespace {

std::string pad_right(const std::string& s, std::size_t width) {
    std::string out = s;
    if (out.size() < width) out.append(width - out.size(), ' ');
    return out;
}

}  // namespace

std::string best_per_prompt_text(const std::vector<BestRow>& rows) {
    std::size_t prompt_w = 6, model_w = 5;
    for (const auto& row : rows) {
        prompt_w = std::max(prompt_w, row.prompt.size());
        model_w = std::max(model_w, row.model.size());
    }
    std::ostringstream out;
    out << pad_right("Prompt", prompt_w + 2) << pad_right("Model", model_w + 2)
        << "Kappa  Accuracy  F1 Weighted  F1 Macro\n";
    for (const auto& row : rows) {
        out << pad_right(row.prompt, prompt_w + 2) << pad_right(row.model, model_w + 2)
            << pad_right(format_fixed(row.kappa, 2), 7)
            << pad_right(format_fixed(row.accuracy, 2), 10)
            << pad_right(format_fixed(row.weighted_f1, 2), 13)
            << format_fixed(row.macro_f1, 2) << "\n";
    }
    return out.str();
}

std::string cells_csv(const std::vector<GridCellResult>& cells) {
    // Wall-clock durations stay out of this file (and live in the manifest)
    // so repeated runs produce identical bytes.
    std::string out =
        "prompt,model,status,kappa,kappa_band,accuracy,macro_f1,weighted_f1,n,unparsed,error\n";
    for (const auto& cell : cells) {
        out += csv_escape(cell.prompt) + "," + csv_escape(cell.model) + ",";
        if (cell.failed) {
            out += "failed,,,,,,,," + csv_escape(cell.error) + "\n";
            continue;
        }
        const ClassificationReport& r = cell.report;
        out += "ok," + format_fixed(r.kappa, 4) + "," + r.kappa_band + "," +
               format_fixed(r.accuracy, 4) + "," + format_fixed(r.macro_f1, 4) + "," +
               format_fixed(r.weighted_f1, 4) + "," + std::to_string(r.n) + "," +
               std::to_string(r.unparsed) + ",\n";
    }
    return out;
}

std::string cells_text(const std::vector<GridCellResult>& cells) {
    std::size_t prompt_w = 6, model_w = 5;
    for (const auto& cell : cells) {
        prompt_w = std::max(prompt_w, cell.prompt.size());
        model_w = std::max(model_w, cell.model.size());
    }
    std::ostringstream out;
    out << pad_right("Prompt", prompt_w + 2) << pad_right("Model", model_w + 2)
        << "Kappa  Band       Accuracy  Macro F1  Weighted F1  N     Unparsed\n";
    for (const auto& cell : cells) {
        out << pad_right(cell.prompt, prompt_w + 2) << pad_right(cell.model, model_w + 2);
        if (cell.failed) {
            out << "FAILED: " << cell.error << "\n";
            continue;
        }
        const ClassificationReport& r = cell.report;
        out << pad_right(format_fixed(r.kappa, 2), 7) << pad_right(r.kappa_band, 11)
            << pad_right(format_fixed(r.accuracy, 2), 10)
            << pad_right(format_fixed(r.macro_f1, 2), 10)
            << pad_right(format_fixed(r.weighted_f1, 2), 13)
            << pad_right(std::to_string(r.n), 6) << r.unparsed << "\n";
    }
    return out.str();
}

}  // namespace anno
