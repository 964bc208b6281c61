#pragma once

#include "codemorph/gateway.hpp"
#include "codemorph/manifest.hpp"
#include "codemorph/merger.hpp"
#include "codemorph/metrics.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace codemorph {

enum class CompileStatus { Ok, FailedAwaitingHuman, OkAfterHumanFix };

const char* compile_status_name(CompileStatus s);

struct VariantRecord {
    std::string variant_id;
    std::string strategy;
    std::string file;
    int prefix_t = 0;
    GenOutcome gen_outcome = GenOutcome::Ok;
    int gen_attempts = 0;
    double gen_elapsed_s = 0.0;
    int gen_line_count = 0;
    std::string merge_status = "Ok";
    CompileStatus compile_status = CompileStatus::Ok;
    std::optional<std::string> artifact_path; // relative to workspace
    long edit_lines = 0;
    double man_hours = 0.0;
    std::string created_at;

    std::string to_json_line() const;
    static VariantRecord from_json_line(const std::string& line);
};

// Adds (end - start), in hours, to the record. Throws Error(NegativeDuration).
void record_man_hours(VariantRecord& record, std::int64_t start_unix, std::int64_t end_unix);

struct GatewaySetup {
    std::string mode = "replay"; // "replay" or "http"
    std::string endpoint;
    std::filesystem::path replay_dir;
    std::string model = "local";
    long seed = 1;
};

struct RunOptions {
    std::filesystem::path manifest_path;
    std::filesystem::path workspace;
    std::string strategy;
    GatewaySetup gateway;
    std::optional<int> prefix_limit;          // cap t per file
    std::optional<double> man_hours_override; // operator-entered value on resume
    std::optional<unsigned> plan_seed;        // shuffle tied plan groups
};

enum class RunStatus { Complete, AwaitingHuman };

struct Checkpoint {
    std::string file;
    int prefix_t = 0;
    std::string strategy;
    std::string build_stdout_path;
    std::string build_stderr_path;
    std::string created_at;
};

// Workspace path helpers shared by the pipeline and its tests.
struct Workspace {
    std::filesystem::path root;

    std::filesystem::path shadow_dir(const std::string& strategy) const;
    std::filesystem::path prompts_file(const std::string& file, const std::string& strategy,
                                       int ordinal) const;
    std::filesystem::path variants_dir(const std::string& strategy, const std::string& file,
                                       int t) const;
    std::filesystem::path records_path() const;
    std::filesystem::path checkpoint_path() const;
    std::filesystem::path state_path(const std::string& strategy) const;
    std::filesystem::path lock_path() const;
    std::filesystem::path logs_dir() const;
    std::filesystem::path premerge_path(const std::string& strategy, const std::string& file,
                                        int t) const;
    std::filesystem::path eval_dir() const;
    std::filesystem::path transcripts_dir() const;
};

std::string variant_id_for(const std::string& strategy, const std::string& file, int t);

// Runs the synthesis loop from the start: plan, then for each file transform
// function t, merge prefix 1..t, build, and either record the variant or halt
// at a checkpoint for a human fix. Returns AwaitingHuman when halted (CLI maps
// this to exit code 3).
RunStatus mutate(const RunOptions& opts);

// Re-runs the build at the checkpoint against the human-edited shadow tree,
// records the fix (edit lines, man-hours), then continues the synthesis loop.
// Gateway settings are restored from the halted run unless the options name an
// endpoint or replay directory. Throws Error(WorkspaceDirty) when there is
// nothing to resume.
RunStatus resume(const RunOptions& opts);

std::vector<VariantRecord> load_records(const std::filesystem::path& workspace);

std::optional<Checkpoint> load_checkpoint(const std::filesystem::path& workspace);

struct VariantEvaluation {
    std::optional<double> rate;
    std::optional<double> nlcs;
    std::optional<Verdict> verdict;
};

struct EvaluationSummary {
    double baseline_rate = 0.0;
    double delta = 0.96;
    std::map<std::string, VariantEvaluation> variants;
};

// Scores user-supplied detection reports, verdicts and call traces found under
// workspace/eval/ and writes eval/evaluation.json. Inputs: detections.jsonl
// (rows with variant_id "baseline" give the baseline rate), optional
// verdicts.json, optional traces/baseline.{jsonl,txt} plus one trace per
// variant named by its sanitized id, optional config.json {"delta": ...}.
EvaluationSummary evaluate_workspace(const std::filesystem::path& workspace);

struct StrategyReport {
    long edit_workload = 0;   // W
    double man_hours = 0.0;   // H
    std::optional<double> mean_rate;
    std::optional<double> asr_pct;
    std::optional<double> phi;
    int variants = 0;
};

// Folds records.jsonl (and eval/evaluation.json when present) into per-strategy
// totals.
std::map<std::string, StrategyReport> aggregate_report(const std::filesystem::path& workspace);

} // namespace codemorph
