// anno — batch LLM annotation harness.
//
// Subcommands: ingest (validate corpus + label distribution), annotate (one
// prompt x one model), grid (full prompt x model grid), evaluate (records +
// gold -> report), report (best-per-prompt summary from a grid directory).
// Exit codes: 0 success, 1 usage, 2 data error, 3 backend error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "anno/chat_template.hpp"
#include "anno/client.hpp"
#include "anno/error.hpp"
#include "anno/ingest.hpp"
#include "anno/metrics.hpp"
#include "anno/model.hpp"
#include "anno/normalize.hpp"
#include "anno/prompt_set.hpp"
#include "anno/runner.hpp"
#include "anno/util.hpp"

namespace {

using namespace anno;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBackend = 3;

struct SchemaArgs {
    std::string labels;    // comma-separated canonical labels
    std::string synonyms;  // synonym table file
    std::string prompts;   // prompt-set file supplying the schema

    void add_to(CLI::App& cmd) {
        cmd.add_option("--labels", labels, "Comma-separated canonical labels, e.g. 'yes,no'");
        cmd.add_option("--synonyms", synonyms, "Synonym table file (one 'canonical: alias, ...' per line)");
        cmd.add_option("--prompts", prompts, "Prompt-set file supplying the label schema");
    }

    LabelSchema resolve() const {
        if (!labels.empty()) {
            std::vector<std::string> names;
            std::string current;
            for (char c : labels + ",") {
                if (c == ',') {
                    if (!is_blank(current)) names.push_back(trim(current));
                    current.clear();
                } else {
                    current += c;
                }
            }
            std::map<std::string, std::string> table;
            if (!synonyms.empty()) table = load_synonym_table(synonyms);
            return LabelSchema(names, table);
        }
        if (!prompts.empty()) return load_prompt_set(prompts).schema;
        throw DataError("a label schema is required: pass --labels or --prompts");
    }
};

struct GenerationArgs {
    double temperature = 0.2;
    std::int64_t seed = 42;
    int max_tokens = 16;
    int reasoning_max_tokens = 256;
    std::int64_t timeout_ms = 30000;
    bool identical_seeds = false;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--temperature", temperature, "Sampling temperature in [0,1]")
            ->capture_default_str();
        cmd.add_option("--seed", seed, "Base generation seed")->capture_default_str();
        cmd.add_option("--max-tokens", max_tokens, "Reply token budget")->capture_default_str();
        cmd.add_option("--reasoning-max-tokens", reasoning_max_tokens,
                       "Token budget for chain-of-thought reasoning turns")
            ->capture_default_str();
        cmd.add_option("--timeout-ms", timeout_ms, "Per-request timeout")->capture_default_str();
        cmd.add_flag("--identical-seeds", identical_seeds,
                     "Reuse the base seed on every self-consistency path instead of offsetting");
    }

    GenerationConfig resolve() const {
        GenerationConfig config;
        config.temperature = temperature;
        config.seed = seed;
        config.max_tokens = max_tokens;
        config.reasoning_max_tokens = reasoning_max_tokens;
        config.timeout = std::chrono::milliseconds(timeout_ms);
        config.identical_seeds = identical_seeds;
        return config;
    }
};

struct ClientArgs {
    int max_inflight = 4;
    std::string templates_file;
    std::string api_key_env = "ANNO_API_KEY";
    int retries = 3;
    std::int64_t backoff_ms = 500;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--max-inflight", max_inflight, "Concurrent request cap")
            ->capture_default_str();
        cmd.add_option("--templates", templates_file,
                       "Extra chat-template definitions (JSON) to register");
        cmd.add_option("--api-key-env", api_key_env,
                       "Environment variable holding the bearer token")
            ->capture_default_str();
        cmd.add_option("--retries", retries, "Retry budget for transport/429 failures")
            ->capture_default_str();
        cmd.add_option("--backoff-ms", backoff_ms, "Initial retry backoff")
            ->capture_default_str();
    }

    TemplateRegistry registry() const {
        TemplateRegistry reg = TemplateRegistry::with_builtins();
        if (!templates_file.empty()) reg.load_file(templates_file);
        return reg;
    }

    ClientOptions options() const {
        ClientOptions opts;
        opts.max_inflight = max_inflight;
        opts.retry.max_retries = retries;
        opts.retry.initial_backoff = std::chrono::milliseconds(backoff_ms);
        opts.api_key_env = api_key_env;
        return opts;
    }
};

std::optional<CorpusFormat> parse_format(const std::string& format) {
    if (format.empty()) return std::nullopt;
    return corpus_format_from_name(format);
}

std::vector<ModelProfile> models_from_file(const std::string& path,
                                           const GenerationConfig& base) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("models file '" + path + "': " + e.what());
    }
    std::vector<ModelProfile> models;
    try {
        for (const auto& entry : j.at("models")) {
            ModelProfile profile;
            profile.model_name = entry.at("model_name").get<std::string>();
            profile.template_id = entry.at("template_id").get<std::string>();
            profile.endpoint = entry.at("endpoint").get<std::string>();
            profile.generation = base;
            if (entry.contains("temperature"))
                profile.generation.temperature = entry.at("temperature").get<double>();
            if (entry.contains("max_tokens"))
                profile.generation.max_tokens = entry.at("max_tokens").get<int>();
            if (entry.contains("reasoning_max_tokens"))
                profile.generation.reasoning_max_tokens =
                    entry.at("reasoning_max_tokens").get<int>();
            if (entry.contains("timeout_ms"))
                profile.generation.timeout =
                    std::chrono::milliseconds(entry.at("timeout_ms").get<std::int64_t>());
            models.push_back(std::move(profile));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError("models file '" + path + "': " + e.what());
    }
    if (models.empty()) throw DataError("models file '" + path + "' lists no models");
    return models;
}

RunHooks progress_hooks(bool quiet) {
    RunHooks hooks;
    if (!quiet)
        hooks.on_progress = [](const std::string& note) { std::cerr << note << "\n"; };
    return hooks;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"anno — prompt-strategy annotation harness for chat-completion backends"};
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("--quiet", quiet, "Suppress progress output on stderr");

    // ---------- ingest ----------
    auto* ingest_cmd =
        app.add_subcommand("ingest", "Validate a corpus and print its gold-label distribution");
    std::string ingest_corpus, ingest_format;
    SchemaArgs ingest_schema;
    ingest_cmd->add_option("--corpus", ingest_corpus, "Corpus file (csv or jsonl)")->required();
    ingest_cmd->add_option("--format", ingest_format, "csv or jsonl (default: file extension)");
    ingest_schema.add_to(*ingest_cmd);

    // ---------- annotate ----------
    auto* annotate_cmd =
        app.add_subcommand("annotate", "Run one prompt x one model over a corpus");
    std::string an_corpus, an_format, an_prompts, an_prompt, an_model, an_endpoint;
    std::string an_template = "structured_api";
    std::string an_out, an_report_path, an_policy = "as_wrong";
    int an_paths = 0, an_reparse = 0;
    bool an_json = false;
    GenerationArgs an_gen;
    ClientArgs an_client;
    annotate_cmd->add_option("--corpus", an_corpus, "Corpus file")->required();
    annotate_cmd->add_option("--format", an_format, "csv or jsonl (default: file extension)");
    annotate_cmd->add_option("--prompts", an_prompts, "Prompt-set file")->required();
    annotate_cmd->add_option("--prompt", an_prompt, "Prompt name within the set")->required();
    annotate_cmd->add_option("--model", an_model, "Model name sent to the backend")->required();
    annotate_cmd->add_option("--endpoint", an_endpoint,
                             "http(s)://host:port or mock:<script-path>")
        ->required();
    annotate_cmd->add_option("--template", an_template, "Chat template id")
        ->capture_default_str();
    annotate_cmd->add_option("--paths", an_paths,
                             "Override the plan's self-consistency path count");
    annotate_cmd->add_option("--unparsed-policy", an_policy, "as_wrong or exclude")
        ->capture_default_str();
    annotate_cmd->add_option("--reparse-retry", an_reparse,
                             "Re-ask unparsed single-path replies up to N times");
    annotate_cmd->add_option("--out", an_out,
                             "Record file (default <prompt>__<model>.jsonl); resumes if present");
    annotate_cmd->add_option("--report", an_report_path, "Also write the report to this file");
    annotate_cmd->add_flag("--json", an_json, "Print the report as JSON instead of text");
    an_gen.add_to(*annotate_cmd);
    an_client.add_to(*annotate_cmd);

    // ---------- grid ----------
    auto* grid_cmd = app.add_subcommand("grid", "Run the full prompt x model grid");
    std::string gr_corpus, gr_format, gr_prompts, gr_models_file, gr_out;
    std::string gr_model, gr_endpoint, gr_template = "structured_api";
    std::string gr_policy = "as_wrong";
    int gr_reparse = 0;
    GenerationArgs gr_gen;
    ClientArgs gr_client;
    grid_cmd->add_option("--corpus", gr_corpus, "Corpus file")->required();
    grid_cmd->add_option("--format", gr_format, "csv or jsonl (default: file extension)");
    grid_cmd->add_option("--prompts", gr_prompts, "Prompt-set file")->required();
    grid_cmd->add_option("--models", gr_models_file, "Models file (JSON {\"models\": [...]})");
    grid_cmd->add_option("--model", gr_model, "Single model name (alternative to --models)");
    grid_cmd->add_option("--endpoint", gr_endpoint, "Endpoint for --model");
    grid_cmd->add_option("--template", gr_template, "Chat template id for --model")
        ->capture_default_str();
    grid_cmd->add_option("--out", gr_out, "Output directory")->required();
    grid_cmd->add_option("--unparsed-policy", gr_policy, "as_wrong or exclude")
        ->capture_default_str();
    grid_cmd->add_option("--reparse-retry", gr_reparse,
                         "Re-ask unparsed single-path replies up to N times");
    gr_gen.add_to(*grid_cmd);
    gr_client.add_to(*grid_cmd);

    // ---------- evaluate ----------
    auto* eval_cmd =
        app.add_subcommand("evaluate", "Score a record file against corpus gold labels");
    std::string ev_records, ev_corpus, ev_format, ev_policy = "as_wrong", ev_out;
    bool ev_json = false;
    SchemaArgs ev_schema;
    eval_cmd->add_option("--records", ev_records, "Record file (jsonl)")->required();
    eval_cmd->add_option("--corpus", ev_corpus, "Corpus file with gold labels")->required();
    eval_cmd->add_option("--format", ev_format, "csv or jsonl (default: file extension)");
    eval_cmd->add_option("--unparsed-policy", ev_policy, "as_wrong or exclude")
        ->capture_default_str();
    eval_cmd->add_option("--out", ev_out, "Also write the report to this file");
    eval_cmd->add_flag("--json", ev_json, "Print the report as JSON instead of text");
    ev_schema.add_to(*eval_cmd);

    // ---------- report ----------
    auto* report_cmd = app.add_subcommand(
        "report", "Summarize a grid directory: best model per prompt, plus CSV for plotting");
    std::string rp_dir, rp_csv;
    report_cmd->add_option("--grid-dir", rp_dir, "Directory written by `anno grid`")->required();
    report_cmd->add_option("--csv", rp_csv, "Write the best-per-prompt rows as CSV here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (ingest_cmd->parsed()) {
            const LabelSchema schema = ingest_schema.resolve();
            const CorpusFormat format =
                parse_format(ingest_format).value_or(detect_format(ingest_corpus));
            const auto corpus = ingest(ingest_corpus, format, schema);
            std::cout << "items: " << corpus.size() << "\n";
            bool all_gold = true;
            for (const auto& item : corpus)
                if (!item.gold) all_gold = false;
            if (all_gold)
                std::cout << distribution_text(label_distribution(corpus, schema));
            else
                std::cout << "(some items lack gold labels; distribution skipped)\n";
            return kExitOk;
        }

        if (annotate_cmd->parsed()) {
            PromptSet set = load_prompt_set(an_prompts);
            PromptPlan plan = set.plan(an_prompt);
            if (annotate_cmd->count("--paths") > 0) {
                plan.paths = an_paths;
                const auto violations = validate_plan(plan, set.schema);
                if (!violations.empty())
                    throw DataError("prompt '" + plan.name + "' with --paths " +
                                    std::to_string(an_paths) + ": " + violations.front());
            }
            ModelProfile profile;
            profile.model_name = an_model;
            profile.template_id = an_template;
            profile.endpoint = an_endpoint;
            profile.generation = an_gen.resolve();
            const TemplateRegistry registry = an_client.registry();
            Client client(registry, an_client.options());
            const CorpusFormat format =
                parse_format(an_format).value_or(detect_format(an_corpus));
            const auto corpus = ingest(an_corpus, format, set.schema);
            const std::string record_path =
                an_out.empty() ? sanitize_filename(plan.name) + "__" +
                                     sanitize_filename(profile.model_name) + ".jsonl"
                               : an_out;
            const UnparsedPolicy policy = unparsed_policy_from_name(an_policy);
            CellRun run = run_cell(client, plan, profile, corpus, set.schema, policy,
                                   record_path, an_reparse, progress_hooks(quiet));
            const std::string text = an_json
                                         ? report_json(run.result.report, plan.name,
                                                       profile.model_name)
                                         : report_text(run.result.report);
            std::cout << text;
            if (!an_report_path.empty()) write_file(an_report_path, text);
            return kExitOk;
        }

        if (grid_cmd->parsed()) {
            GridSpec spec;
            spec.corpus_path = gr_corpus;
            spec.format = parse_format(gr_format);
            spec.prompt_set = load_prompt_set(gr_prompts);
            const GenerationConfig base = gr_gen.resolve();
            if (!gr_models_file.empty()) {
                spec.models = models_from_file(gr_models_file, base);
            } else if (!gr_model.empty() && !gr_endpoint.empty()) {
                ModelProfile profile;
                profile.model_name = gr_model;
                profile.template_id = gr_template;
                profile.endpoint = gr_endpoint;
                profile.generation = base;
                spec.models = {profile};
            } else {
                std::cerr << "grid needs --models FILE, or --model and --endpoint\n";
                return kExitUsage;
            }
            spec.policy = unparsed_policy_from_name(gr_policy);
            spec.output_dir = gr_out;
            spec.base_seed = base.seed;
            spec.reparse_retry = gr_reparse;
            const TemplateRegistry registry = gr_client.registry();
            Client client(registry, gr_client.options());
            const GridOutcome outcome = run_grid(spec, client, progress_hooks(quiet));
            std::cout << cells_text(outcome.cells);
            long failed = 0;
            for (const auto& cell : outcome.cells)
                if (cell.failed) ++failed;
            if (outcome.aborted) {
                std::cerr << "grid aborted; re-run to resume\n";
                return kExitBackend;
            }
            if (failed > 0) {
                std::cerr << failed << " cell(s) failed\n";
                return kExitBackend;
            }
            return kExitOk;
        }

        if (eval_cmd->parsed()) {
            const LabelSchema schema = ev_schema.resolve();
            const CorpusFormat format =
                parse_format(ev_format).value_or(detect_format(ev_corpus));
            const auto corpus = ingest(ev_corpus, format, schema);
            const auto records = load_records(ev_records);
            const ClassificationReport report = evaluate_records(
                records, corpus, schema, unparsed_policy_from_name(ev_policy));
            const std::string text = ev_json ? report_json(report) : report_text(report);
            std::cout << text;
            if (!ev_out.empty()) write_file(ev_out, text);
            return kExitOk;
        }

        if (report_cmd->parsed()) {
            namespace fs = std::filesystem;
            const fs::path reports_dir = fs::path(rp_dir) / "reports";
            if (!fs::is_directory(reports_dir))
                throw DataError("'" + reports_dir.string() + "' is not a directory (expected a grid output directory)");
            std::vector<fs::path> files;
            for (const auto& entry : fs::directory_iterator(reports_dir))
                if (entry.path().extension() == ".json") files.push_back(entry.path());
            std::sort(files.begin(), files.end());
            if (files.empty()) throw DataError("no cell reports in '" + reports_dir.string() + "'");
            std::vector<GridCellResult> cells;
            for (const auto& file : files) {
                GridCellResult cell;
                cell.report = report_from_json(read_file(file.string()), &cell.prompt, &cell.model);
                cell.record_path = file.string();
                cells.push_back(std::move(cell));
            }
            const auto rows = best_per_prompt(cells);
            std::cout << best_per_prompt_text(rows);
            if (!rp_csv.empty()) write_file(rp_csv, best_per_prompt_csv(rows));
            return kExitOk;
        }
    } catch (const BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
