#include "codemorph/error.hpp"
#include "codemorph/extractor.hpp"
#include "codemorph/manifest.hpp"
#include "codemorph/orchestrator.hpp"
#include "codemorph/util.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <string>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace codemorph;

constexpr const char* kVersion = "codemorph 1.0.0";

void diag(const std::string& kind, const std::string& message) {
    json j{{"error", kind}, {"message", message}};
    std::cerr << j.dump() << "\n";
}

struct CommonFlags {
    std::string manifest;
    std::string workspace;
    std::string strategy;
    int prefix = 0;
    std::string endpoint;
    std::string replay;
    std::string model = "local";
    long seed = 1;
    unsigned tie_seed = 0;
    bool tie_seed_set = false;
    double man_hours = 0.0;
    bool man_hours_set = false;
};

RunOptions to_run_options(const CommonFlags& f) {
    RunOptions opts;
    opts.manifest_path = f.manifest;
    opts.workspace = f.workspace;
    opts.strategy = f.strategy;
    if (f.prefix > 0) {
        opts.prefix_limit = f.prefix;
    }
    if (!f.endpoint.empty()) {
        opts.gateway.mode = "http";
        opts.gateway.endpoint = f.endpoint;
    } else if (!f.replay.empty()) {
        opts.gateway.mode = "replay";
        opts.gateway.replay_dir = f.replay;
    }
    opts.gateway.model = f.model;
    opts.gateway.seed = f.seed;
    if (f.tie_seed_set) {
        opts.plan_seed = f.tie_seed;
    }
    if (f.man_hours_set) {
        opts.man_hours_override = f.man_hours;
    }
    return opts;
}

json plan_to_json(const ModificationPlan& plan) {
    json files = json::array();
    for (const auto& pf : plan.files) {
        files.push_back({{"path", pf.path},
                         {"language", language_name(pf.language)},
                         {"function_total", pf.function_total},
                         {"prefix_j", pf.prefix_j}});
    }
    return json{{"derivation", plan.derivation}, {"files", files}};
}

int do_plan(const CommonFlags& f, bool pretty) {
    ProjectManifest manifest = load_manifest(f.manifest);
    std::vector<FileContext> contexts;
    for (const auto& mf : manifest.files) {
        if (manifest.excluded(mf.path)) {
            continue;
        }
        SourceFile src;
        src.path = mf.path;
        src.language = mf.language;
        src.text = util::read_file(manifest.root / mf.path);
        contexts.push_back(parse_file(src));
    }
    std::optional<unsigned> tie_seed;
    if (f.tie_seed_set) {
        tie_seed = f.tie_seed;
    }
    ModificationPlan plan = plan_modifications(manifest, contexts, tie_seed);
    std::cout << plan_to_json(plan).dump(pretty ? 2 : -1) << "\n";
    return 0;
}

int do_mutate(const CommonFlags& f) {
    RunStatus status = mutate(to_run_options(f));
    if (status == RunStatus::AwaitingHuman) {
        fs::path cp = Workspace{f.workspace}.checkpoint_path();
        std::cout << json{{"status", "awaiting_human"}, {"checkpoint", cp.string()}}.dump()
                  << "\n";
        return 3;
    }
    std::cout << json{{"status", "complete"}}.dump() << "\n";
    return 0;
}

int do_resume(const CommonFlags& f) {
    RunStatus status = resume(to_run_options(f));
    if (status == RunStatus::AwaitingHuman) {
        fs::path cp = Workspace{f.workspace}.checkpoint_path();
        std::cout << json{{"status", "awaiting_human"}, {"checkpoint", cp.string()}}.dump()
                  << "\n";
        return 3;
    }
    std::cout << json{{"status", "complete"}}.dump() << "\n";
    return 0;
}

int do_evaluate(const CommonFlags& f, bool pretty) {
    EvaluationSummary summary = evaluate_workspace(f.workspace);
    fs::path out = Workspace{f.workspace}.eval_dir() / "evaluation.json";
    if (pretty) {
        std::cout << util::read_file(out);
    } else {
        std::cout << json::parse(util::read_file(out)).dump() << "\n";
    }
    (void)summary;
    return 0;
}

json report_to_json(const std::map<std::string, StrategyReport>& report) {
    json out = json::object();
    for (const auto& [strategy, sr] : report) {
        json row;
        row["W"] = sr.edit_workload;
        row["H"] = sr.man_hours;
        row["mean_rate"] = sr.mean_rate ? json(*sr.mean_rate) : json(nullptr);
        row["asr"] = sr.asr_pct ? json(*sr.asr_pct) : json(nullptr);
        row["phi"] = sr.phi ? json(*sr.phi) : json(nullptr);
        out[strategy] = row;
    }
    return out;
}

std::string report_to_csv(const std::map<std::string, StrategyReport>& report) {
    auto cell = [](const std::optional<double>& v) {
        if (!v) {
            return std::string();
        }
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.3f", *v);
        return std::string(buf);
    };
    std::string csv = "strategy,W,H,mean_rate,asr,phi\n";
    for (const auto& [strategy, sr] : report) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%ld,%.3f", sr.edit_workload, sr.man_hours);
        csv += strategy;
        csv += ",";
        csv += buf;
        csv += "," + cell(sr.mean_rate) + "," + cell(sr.asr_pct) + "," + cell(sr.phi) + "\n";
    }
    return csv;
}

int do_report(const CommonFlags& f, const std::string& csv_path, bool pretty) {
    auto report = aggregate_report(f.workspace);
    if (pretty) {
        std::printf("%-16s %8s %8s %10s %8s %8s\n", "strategy", "W", "H", "mean_rate", "asr",
                    "phi");
        for (const auto& [strategy, sr] : report) {
            auto num = [](const std::optional<double>& v) {
                if (!v) {
                    return std::string("-");
                }
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.3f", *v);
                return std::string(buf);
            };
            std::printf("%-16s %8ld %8.3f %10s %8s %8s\n", strategy.c_str(), sr.edit_workload,
                        sr.man_hours, num(sr.mean_rate).c_str(), num(sr.asr_pct).c_str(),
                        num(sr.phi).c_str());
        }
    } else {
        std::cout << report_to_json(report).dump() << "\n";
    }
    if (!csv_path.empty()) {
        util::write_file(csv_path, report_to_csv(report));
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Function-level, LLM-guided source transformation pipeline for C/C++ projects"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CommonFlags f;
    bool pretty = false;
    std::string csv_path;

    auto add_gateway_flags = [&](CLI::App* cmd) {
        auto* endpoint = cmd->add_option("--endpoint", f.endpoint,
                                         "Chat-completion endpoint URL (http://...)")
                             ->envname("CODEMORPH_ENDPOINT");
        auto* replay =
            cmd->add_option("--replay", f.replay, "Directory of canned transcripts to replay");
        endpoint->excludes(replay);
        replay->excludes(endpoint);
        cmd->add_option("--model", f.model, "Model name sent to the endpoint")
            ->envname("CODEMORPH_MODEL");
        cmd->add_option("--seed", f.seed, "Base sampling seed");
    };

    auto* plan_cmd = app.add_subcommand("plan", "Parse the project and print the modification plan");
    plan_cmd->add_option("--manifest", f.manifest, "Project manifest JSON")->required();
    plan_cmd->add_option("--tie-seed", f.tie_seed, "Shuffle files with equal function counts")
        ->each([&](const std::string&) { f.tie_seed_set = true; });
    plan_cmd->add_flag("--pretty", pretty, "Indented output");

    auto* mutate_cmd = app.add_subcommand("mutate", "Transform, merge and build variant prefixes");
    mutate_cmd->add_option("--manifest", f.manifest, "Project manifest JSON")->required();
    mutate_cmd->add_option("--strategy", f.strategy, "Transformation strategy name")->required();
    mutate_cmd->add_option("--workspace", f.workspace, "Workspace directory")->required();
    mutate_cmd->add_option("--prefix", f.prefix, "Stop after this many functions per file");
    mutate_cmd->add_option("--tie-seed", f.tie_seed, "Shuffle files with equal function counts")
        ->each([&](const std::string&) { f.tie_seed_set = true; });
    add_gateway_flags(mutate_cmd);

    auto* resume_cmd =
        app.add_subcommand("resume", "Rebuild after a human fix and continue the halted run");
    resume_cmd->add_option("--workspace", f.workspace, "Workspace directory")->required();
    resume_cmd->add_option("--prefix", f.prefix, "Stop after this many functions per file");
    resume_cmd
        ->add_option("--man-hours", f.man_hours, "Override the measured human time, in hours")
        ->each([&](const std::string&) { f.man_hours_set = true; });
    add_gateway_flags(resume_cmd);

    auto* evaluate_cmd = app.add_subcommand(
        "evaluate", "Score user-supplied detections, verdicts and traces under workspace/eval");
    evaluate_cmd->add_option("--workspace", f.workspace, "Workspace directory")->required();
    evaluate_cmd->add_flag("--pretty", pretty, "Indented output");

    auto* report_cmd =
        app.add_subcommand("report", "Aggregate per-strategy workload and evaluation metrics");
    report_cmd->add_option("--workspace", f.workspace, "Workspace directory")->required();
    report_cmd->add_option("--csv", csv_path, "Also write the summary as CSV to this path");
    report_cmd->add_flag("--pretty", pretty, "Aligned table instead of JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e); // --help / --version
        }
        diag(errkind::UsageError, e.what());
        return 2;
    }

    try {
        if (plan_cmd->parsed()) {
            return do_plan(f, pretty);
        }
        if (mutate_cmd->parsed()) {
            return do_mutate(f);
        }
        if (resume_cmd->parsed()) {
            return do_resume(f);
        }
        if (evaluate_cmd->parsed()) {
            return do_evaluate(f, pretty);
        }
        if (report_cmd->parsed()) {
            return do_report(f, csv_path, pretty);
        }
    } catch (const Error& e) {
        diag(e.kind(), e.what());
        return 1;
    } catch (const std::exception& e) {
        diag("Internal", e.what());
        return 1;
    }
    return 0;
}
