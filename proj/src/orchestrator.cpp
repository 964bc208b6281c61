#include "codemorph/orchestrator.hpp"

#include "codemorph/diffs.hpp"
#include "codemorph/error.hpp"
#include "codemorph/extractor.hpp"
#include "codemorph/prompt.hpp"
#include "codemorph/strategies.hpp"
#include "codemorph/subprocess.hpp"
#include "codemorph/util.hpp"

#include <json.hpp>

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>

namespace codemorph {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kBuildTimeoutS = 600.0;

} // namespace

const char* compile_status_name(CompileStatus s) {
    switch (s) {
    case CompileStatus::Ok:
        return "Ok";
    case CompileStatus::FailedAwaitingHuman:
        return "FailedAwaitingHuman";
    case CompileStatus::OkAfterHumanFix:
        return "OkAfterHumanFix";
    }
    return "Ok";
}

namespace {

CompileStatus compile_status_from_name(const std::string& name) {
    if (name == "Ok") {
        return CompileStatus::Ok;
    }
    if (name == "FailedAwaitingHuman") {
        return CompileStatus::FailedAwaitingHuman;
    }
    if (name == "OkAfterHumanFix") {
        return CompileStatus::OkAfterHumanFix;
    }
    throw Error(errkind::IoError, "unknown compile status: " + name);
}

GenOutcome gen_outcome_from_name(const std::string& name) {
    for (GenOutcome o : {GenOutcome::Ok, GenOutcome::DescribedNotCoded, GenOutcome::MalformedFormat,
                         GenOutcome::Reverted}) {
        if (name == gen_outcome_name(o)) {
            return o;
        }
    }
    throw Error(errkind::IoError, "unknown generation outcome: " + name);
}

} // namespace

std::string VariantRecord::to_json_line() const {
    json j;
    j["variant_id"] = variant_id;
    j["strategy"] = strategy;
    j["file"] = file;
    j["prefix_t"] = prefix_t;
    j["gen_outcome"] = gen_outcome_name(gen_outcome);
    j["gen_attempts"] = gen_attempts;
    j["gen_elapsed_s"] = gen_elapsed_s;
    j["gen_line_count"] = gen_line_count;
    j["merge_status"] = merge_status;
    j["compile_status"] = compile_status_name(compile_status);
    if (artifact_path) {
        j["artifact_path"] = *artifact_path;
    } else {
        j["artifact_path"] = nullptr;
    }
    j["edit_lines"] = edit_lines;
    j["man_hours"] = man_hours;
    j["created_at"] = created_at;
    return j.dump();
}

VariantRecord VariantRecord::from_json_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw Error(errkind::IoError, std::string("bad record line: ") + e.what());
    }
    VariantRecord r;
    r.variant_id = j.at("variant_id").get<std::string>();
    r.strategy = j.at("strategy").get<std::string>();
    r.file = j.at("file").get<std::string>();
    r.prefix_t = j.at("prefix_t").get<int>();
    r.gen_outcome = gen_outcome_from_name(j.at("gen_outcome").get<std::string>());
    r.gen_attempts = j.at("gen_attempts").get<int>();
    r.gen_elapsed_s = j.at("gen_elapsed_s").get<double>();
    r.gen_line_count = j.at("gen_line_count").get<int>();
    r.merge_status = j.at("merge_status").get<std::string>();
    r.compile_status = compile_status_from_name(j.at("compile_status").get<std::string>());
    if (j.contains("artifact_path") && !j["artifact_path"].is_null()) {
        r.artifact_path = j["artifact_path"].get<std::string>();
    }
    r.edit_lines = j.at("edit_lines").get<long>();
    r.man_hours = j.at("man_hours").get<double>();
    r.created_at = j.at("created_at").get<std::string>();
    return r;
}

void record_man_hours(VariantRecord& record, std::int64_t start_unix, std::int64_t end_unix) {
    if (end_unix < start_unix) {
        throw Error(errkind::NegativeDuration, "fix interval ends before it starts");
    }
    record.man_hours += static_cast<double>(end_unix - start_unix) / 3600.0;
}

fs::path Workspace::shadow_dir(const std::string& strategy) const {
    return root / "shadow" / strategy;
}

fs::path Workspace::prompts_file(const std::string& file, const std::string& strategy,
                                 int ordinal) const {
    return root / "prompts" / util::sanitize_component(file) / strategy /
           (std::to_string(ordinal) + ".txt");
}

fs::path Workspace::variants_dir(const std::string& strategy, const std::string& file,
                                 int t) const {
    return root / "variants" / strategy / util::sanitize_component(file) / std::to_string(t);
}

fs::path Workspace::records_path() const {
    return root / "records.jsonl";
}

fs::path Workspace::checkpoint_path() const {
    return root / "CHECKPOINT.json";
}

fs::path Workspace::state_path(const std::string& strategy) const {
    return root / "state" / (strategy + ".json");
}

fs::path Workspace::lock_path() const {
    return root / "LOCK";
}

fs::path Workspace::logs_dir() const {
    return root / "logs";
}

fs::path Workspace::premerge_path(const std::string& strategy, const std::string& file,
                                  int t) const {
    return root / "premerge" / strategy /
           (util::sanitize_component(file) + "." + std::to_string(t) + ".src");
}

fs::path Workspace::eval_dir() const {
    return root / "eval";
}

fs::path Workspace::transcripts_dir() const {
    return root / "transcripts";
}

std::string variant_id_for(const std::string& strategy, const std::string& file, int t) {
    return strategy + "/" + util::sanitize_component(file) + "/" + std::to_string(t);
}

namespace {

// One synthesis run per workspace; the file vanishes with the guard.
class LockGuard {
public:
    explicit LockGuard(const fs::path& path) : path_(path) {
        int fd = ::open(path.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd < 0) {
            throw Error(errkind::WorkspaceLocked,
                        "workspace is locked by another run: " + path.string());
        }
        std::string stamp = util::iso8601_now() + "\n";
        ssize_t n = ::write(fd, stamp.data(), stamp.size());
        (void)n;
        ::close(fd);
    }
    ~LockGuard() {
        std::error_code ec;
        fs::remove(path_, ec);
    }
    LockGuard(const LockGuard&) = delete;
    LockGuard& operator=(const LockGuard&) = delete;

private:
    fs::path path_;
};

struct StoredTransform {
    int ordinal = 0;
    std::string name;
    std::string replacement_text;
    std::vector<std::string> new_headers;
    std::vector<HelperFunction> helpers;
    bool reverted = false;
};

struct RunState {
    std::string strategy;
    std::string manifest_path;
    GatewaySetup gateway;
    std::optional<int> prefix_limit;
    ModificationPlan plan;
    std::string root_hash;
    std::size_t file_index = 0;
    int next_t = 1;
    bool complete = false;
    std::map<std::string, std::vector<StoredTransform>> transforms; // by file path
};

json gateway_to_json(const GatewaySetup& g) {
    return json{{"mode", g.mode},
                {"endpoint", g.endpoint},
                {"replay_dir", g.replay_dir.generic_string()},
                {"model", g.model},
                {"seed", g.seed}};
}

GatewaySetup gateway_from_json(const json& j) {
    GatewaySetup g;
    g.mode = j.at("mode").get<std::string>();
    g.endpoint = j.at("endpoint").get<std::string>();
    g.replay_dir = fs::path(j.at("replay_dir").get<std::string>());
    g.model = j.at("model").get<std::string>();
    g.seed = j.at("seed").get<long>();
    return g;
}

json state_to_json(const RunState& s) {
    json files = json::array();
    for (const auto& pf : s.plan.files) {
        files.push_back({{"path", pf.path},
                         {"language", language_name(pf.language)},
                         {"function_total", pf.function_total},
                         {"prefix_j", pf.prefix_j}});
    }
    json transforms = json::object();
    for (const auto& [file, steps] : s.transforms) {
        json arr = json::array();
        for (const auto& st : steps) {
            json helpers = json::array();
            for (const auto& h : st.helpers) {
                helpers.push_back(
                    {{"name", h.name}, {"prototype", h.prototype}, {"definition", h.definition}});
            }
            arr.push_back({{"ordinal", st.ordinal},
                           {"name", st.name},
                           {"replacement_text", st.replacement_text},
                           {"new_headers", st.new_headers},
                           {"helpers", helpers},
                           {"reverted", st.reverted}});
        }
        transforms[file] = arr;
    }
    json j;
    j["strategy"] = s.strategy;
    j["manifest_path"] = s.manifest_path;
    j["gateway"] = gateway_to_json(s.gateway);
    j["prefix_limit"] = s.prefix_limit ? json(*s.prefix_limit) : json(nullptr);
    j["plan"] = json{{"derivation", s.plan.derivation}, {"files", files}};
    j["root_hash"] = s.root_hash;
    j["file_index"] = s.file_index;
    j["next_t"] = s.next_t;
    j["complete"] = s.complete;
    j["transforms"] = transforms;
    return j;
}

RunState state_from_json(const json& j) {
    RunState s;
    s.strategy = j.at("strategy").get<std::string>();
    s.manifest_path = j.at("manifest_path").get<std::string>();
    s.gateway = gateway_from_json(j.at("gateway"));
    if (!j.at("prefix_limit").is_null()) {
        s.prefix_limit = j.at("prefix_limit").get<int>();
    }
    s.plan.derivation = j.at("plan").at("derivation").get<std::string>();
    for (const auto& f : j.at("plan").at("files")) {
        PlannedFile pf;
        pf.path = f.at("path").get<std::string>();
        pf.language = language_from_name(f.at("language").get<std::string>());
        pf.function_total = f.at("function_total").get<int>();
        pf.prefix_j = f.at("prefix_j").get<int>();
        s.plan.files.push_back(std::move(pf));
    }
    s.root_hash = j.at("root_hash").get<std::string>();
    s.file_index = j.at("file_index").get<std::size_t>();
    s.next_t = j.at("next_t").get<int>();
    s.complete = j.at("complete").get<bool>();
    for (const auto& [file, arr] : j.at("transforms").items()) {
        std::vector<StoredTransform> steps;
        for (const auto& e : arr) {
            StoredTransform st;
            st.ordinal = e.at("ordinal").get<int>();
            st.name = e.at("name").get<std::string>();
            st.replacement_text = e.at("replacement_text").get<std::string>();
            st.new_headers = e.at("new_headers").get<std::vector<std::string>>();
            for (const auto& h : e.at("helpers")) {
                HelperFunction helper;
                helper.name = h.at("name").get<std::string>();
                helper.prototype = h.at("prototype").get<std::string>();
                helper.definition = h.at("definition").get<std::string>();
                st.helpers.push_back(std::move(helper));
            }
            st.reverted = e.at("reverted").get<bool>();
            steps.push_back(std::move(st));
        }
        s.transforms[file] = std::move(steps);
    }
    return s;
}

void save_state(const Workspace& ws, const RunState& state) {
    fs::create_directories(ws.state_path(state.strategy).parent_path());
    util::write_file(ws.state_path(state.strategy), state_to_json(state).dump(2) + "\n");
}

RunState load_state(const Workspace& ws, const std::string& strategy) {
    auto path = ws.state_path(strategy);
    if (!fs::exists(path)) {
        throw Error(errkind::WorkspaceDirty, "no saved run for strategy " + strategy);
    }
    try {
        return state_from_json(json::parse(util::read_file(path)));
    } catch (const json::exception& e) {
        throw Error(errkind::IoError, "unreadable state file: " + std::string(e.what()));
    }
}

void write_checkpoint(const Workspace& ws, const Checkpoint& cp) {
    json j;
    j["file"] = cp.file;
    j["prefix_t"] = cp.prefix_t;
    j["strategy"] = cp.strategy;
    j["build_stdout_path"] = cp.build_stdout_path;
    j["build_stderr_path"] = cp.build_stderr_path;
    j["created_at"] = cp.created_at;
    util::write_file(ws.checkpoint_path(), j.dump(2) + "\n");
}

// User-defined strategies live beside the manifest in codemorph.config.json:
// {"strategies": {"<name>": "<instruction text>"}}.
StrategyRegistry load_registry(const fs::path& manifest_path) {
    StrategyRegistry registry;
    fs::path dir = fs::absolute(manifest_path).parent_path();
    fs::path cfg = dir / "codemorph.config.json";
    if (!fs::exists(cfg)) {
        return registry;
    }
    json j;
    try {
        j = json::parse(util::read_file(cfg));
    } catch (const json::exception& e) {
        throw Error(errkind::ConfigError, "bad codemorph.config.json: " + std::string(e.what()));
    }
    if (j.contains("strategies")) {
        for (const auto& [name, fragment] : j.at("strategies").items()) {
            registry.add_custom(name, fragment.get<std::string>());
        }
    }
    return registry;
}

std::vector<FileContext> parse_contexts(const ProjectManifest& manifest) {
    std::vector<FileContext> out;
    for (const auto& mf : manifest.files) {
        if (manifest.excluded(mf.path)) {
            continue;
        }
        SourceFile src;
        src.path = mf.path;
        src.language = mf.language;
        src.text = util::read_file(manifest.root / mf.path);
        out.push_back(parse_file(src));
    }
    return out;
}

FileContext parse_pristine(const ProjectManifest& manifest, const PlannedFile& pf) {
    SourceFile src;
    src.path = pf.path;
    src.language = pf.language;
    src.text = util::read_file(manifest.root / pf.path);
    return parse_file(src);
}

std::unique_ptr<Transport> make_transport(const GatewaySetup& gateway, const Workspace& ws) {
    if (gateway.mode == "http") {
        if (gateway.endpoint.empty()) {
            throw Error(errkind::ConfigError, "http gateway needs an endpoint");
        }
        return std::make_unique<HttpTransport>(gateway.endpoint);
    }
    if (gateway.mode == "replay") {
        fs::path dir = gateway.replay_dir.empty() ? ws.transcripts_dir() : gateway.replay_dir;
        return std::make_unique<ReplayTransport>(dir);
    }
    throw Error(errkind::ConfigError, "unknown gateway mode: " + gateway.mode);
}

struct BuildRun {
    CommandResult result;
    std::string stdout_path; // workspace-relative
    std::string stderr_path;
};

BuildRun run_build(const ProjectManifest& manifest, const Workspace& ws,
                   const std::string& strategy, const std::string& file, int t) {
    fs::path cwd = ws.shadow_dir(strategy);
    CommandResult res = run_command(manifest.build_command_line(), cwd, kBuildTimeoutS);
    if (res.exit_code == 127) {
        throw Error(errkind::BuildToolMissing,
                    "build command not found: " + manifest.build_command_line());
    }

    fs::path dir = ws.logs_dir() / strategy;
    fs::create_directories(dir);
    std::string stem = util::sanitize_component(file) + "." + std::to_string(t);
    fs::path out_log = dir / (stem + ".out.log");
    fs::path err_log = dir / (stem + ".err.log");
    util::write_file(out_log, res.out);
    util::write_file(err_log, res.err);

    BuildRun run;
    run.result = std::move(res);
    run.stdout_path = fs::relative(out_log, ws.root).generic_string();
    run.stderr_path = fs::relative(err_log, ws.root).generic_string();
    return run;
}

bool build_ok(const ProjectManifest& manifest, const CommandResult& res) {
    if (res.exit_code != 0 || res.timed_out) {
        return false;
    }
    if (!manifest.build_ok_pattern) {
        return true;
    }
    try {
        std::regex pattern(*manifest.build_ok_pattern);
        return std::regex_search(res.out + res.err, pattern);
    } catch (const std::regex_error& e) {
        throw Error(errkind::ManifestError,
                    "bad build_ok_pattern: " + std::string(e.what()));
    }
}

// Copies every glob match out of the shadow tree; returns the first copy's
// workspace-relative path.
std::string copy_artifacts(const ProjectManifest& manifest, const Workspace& ws,
                           const std::string& strategy, const std::string& file, int t) {
    if (manifest.variant_output_glob.empty()) {
        throw Error(errkind::ManifestError, "variant_output_glob is empty");
    }
    fs::path shadow = ws.shadow_dir(strategy);
    std::vector<std::string> matches;
    for (const auto& entry : fs::recursive_directory_iterator(shadow)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        std::string rel = fs::relative(entry.path(), shadow).generic_string();
        if (util::glob_match(manifest.variant_output_glob, rel)) {
            matches.push_back(rel);
        }
    }
    if (matches.empty()) {
        throw Error(errkind::ManifestError,
                    "variant_output_glob matched nothing after a successful build: " +
                        manifest.variant_output_glob);
    }
    std::sort(matches.begin(), matches.end());

    fs::path dest_dir = ws.variants_dir(strategy, file, t);
    for (const auto& rel : matches) {
        fs::path dest = dest_dir / rel;
        fs::create_directories(dest.parent_path());
        fs::copy_file(shadow / rel, dest, fs::copy_options::overwrite_existing);
    }
    return fs::relative(dest_dir / matches.front(), ws.root).generic_string();
}

const FunctionDef& function_by_ordinal(const FileContext& ctx, int ordinal,
                                       const std::string& name) {
    for (const auto& fn : ctx.functions) {
        if (fn.ordinal == ordinal) {
            if (fn.name != name) {
                throw Error(errkind::WorkspaceDirty,
                            "saved plan no longer matches the sources: function " +
                                std::to_string(ordinal) + " is " + fn.name + ", expected " + name);
            }
            return fn;
        }
    }
    throw Error(errkind::WorkspaceDirty, "saved plan no longer matches the sources: no function " +
                                             std::to_string(ordinal) + " in " +
                                             ctx.file.path.string());
}

std::vector<TransformedFunction> materialize(const FileContext& ctx,
                                             const std::vector<StoredTransform>& steps, int t) {
    std::vector<TransformedFunction> out;
    for (int i = 0; i < t; ++i) {
        const StoredTransform& st = steps.at(static_cast<std::size_t>(i));
        TransformedFunction tf;
        tf.original = function_by_ordinal(ctx, st.ordinal, st.name);
        tf.replacement_text = st.replacement_text;
        tf.new_headers = st.new_headers;
        tf.helpers = st.helpers;
        tf.reverted = st.reverted;
        out.push_back(std::move(tf));
    }
    return out;
}

void append_record(const Workspace& ws, const VariantRecord& rec) {
    util::append_line(ws.records_path(), rec.to_json_line());
}

bool merge_failure(const std::string& kind) {
    return kind == errkind::NameMismatch || kind == errkind::HelperCollision ||
           kind == errkind::ParseFailure || kind == errkind::InvalidPrefix;
}

RunStatus run_loop(const Workspace& ws, const ProjectManifest& manifest,
                   const StrategyRegistry& registry, RunState& state) {
    auto transport = make_transport(state.gateway, ws);
    const StrategySpec strategy = registry.resolve(state.strategy);
    fs::path shadow = ws.shadow_dir(state.strategy);

    for (; state.file_index < state.plan.files.size(); ++state.file_index, state.next_t = 1) {
        const PlannedFile& pf = state.plan.files[state.file_index];
        int limit = pf.prefix_j;
        if (state.prefix_limit) {
            limit = std::min(limit, *state.prefix_limit);
        }
        if (limit <= 0) {
            continue;
        }

        FileContext ctx = parse_pristine(manifest, pf);
        auto& steps = state.transforms[pf.path];

        for (int t = state.next_t; t <= limit; ++t) {
            const FunctionDef& target = ctx.functions.at(static_cast<std::size_t>(t - 1));

            PromptBundle bundle = gen_prompt(strategy, {target}, ctx);
            fs::path prompt_path = ws.prompts_file(pf.path, state.strategy, t);
            fs::create_directories(prompt_path.parent_path());
            util::write_file(prompt_path, render_prompt_file(bundle));

            GenerationConfig cfg;
            cfg.endpoint_url = state.gateway.endpoint;
            cfg.model_name = state.gateway.model;
            cfg.seed = state.gateway.seed;
            GenerationResult gen = transform_function(bundle, cfg, target, *transport);

            std::string merge_status = "Ok";
            TransformedFunction tf;
            if (gen.outcome == GenOutcome::Reverted) {
                tf = make_reverted(target);
            } else {
                try {
                    tf = analyze_replacement(ctx, target, *gen.code_text);
                } catch (const Error& e) {
                    if (!merge_failure(e.kind())) {
                        throw;
                    }
                    tf = make_reverted(target);
                    merge_status = e.kind();
                }
            }

            StoredTransform st;
            st.ordinal = tf.original.ordinal;
            st.name = tf.original.name;
            st.replacement_text = tf.replacement_text;
            st.new_headers = tf.new_headers;
            st.helpers = tf.helpers;
            st.reverted = tf.reverted;
            if (steps.size() < static_cast<std::size_t>(t)) {
                steps.resize(static_cast<std::size_t>(t));
            }
            steps[static_cast<std::size_t>(t - 1)] = std::move(st);

            MergedFile merged = merge(ctx, materialize(ctx, steps, t));
            fs::path shadow_file = shadow / pf.path;
            fs::create_directories(shadow_file.parent_path());
            util::write_file(shadow_file, merged.text);

            fs::path snapshot = ws.premerge_path(state.strategy, pf.path, t);
            fs::create_directories(snapshot.parent_path());
            util::write_file(snapshot, merged.text);

            BuildRun build = run_build(manifest, ws, state.strategy, pf.path, t);

            VariantRecord rec;
            rec.variant_id = variant_id_for(state.strategy, pf.path, t);
            rec.strategy = state.strategy;
            rec.file = pf.path;
            rec.prefix_t = t;
            rec.gen_outcome = gen.outcome;
            rec.gen_attempts = gen.attempts;
            rec.gen_elapsed_s = gen.elapsed_s;
            rec.gen_line_count = gen.generated_line_count;
            rec.merge_status = merge_status;
            rec.created_at = util::iso8601_now();

            if (build_ok(manifest, build.result)) {
                rec.compile_status = CompileStatus::Ok;
                rec.artifact_path = copy_artifacts(manifest, ws, state.strategy, pf.path, t);
                append_record(ws, rec);
                state.next_t = t + 1;
                save_state(ws, state);
            } else {
                rec.compile_status = CompileStatus::FailedAwaitingHuman;
                append_record(ws, rec);
                Checkpoint cp;
                cp.file = pf.path;
                cp.prefix_t = t;
                cp.strategy = state.strategy;
                cp.build_stdout_path = build.stdout_path;
                cp.build_stderr_path = build.stderr_path;
                cp.created_at = rec.created_at;
                write_checkpoint(ws, cp);
                state.next_t = t;
                save_state(ws, state);
                return RunStatus::AwaitingHuman;
            }
        }
    }
    state.complete = true;
    save_state(ws, state);
    return RunStatus::Complete;
}

// Human edits inside transformed regions: the fix diff restricted to the
// target function plus every helper this file has introduced so far.
long region_edit_lines(const std::string& premerge, const std::string& fixed, Language lang,
                       const std::string& target_name,
                       const std::vector<std::string>& helper_names) {
    auto whole_file = [&]() {
        return static_cast<long>(diff_lines(premerge, fixed).edit_lines());
    };
    try {
        FileContext before = parse_source(premerge, lang, "<premerge>");
        FileContext after = parse_source(fixed, lang, "<fixed>");
        std::vector<std::string> names;
        names.push_back(target_name);
        names.insert(names.end(), helper_names.begin(), helper_names.end());
        long total = 0;
        for (const auto& name : names) {
            const FunctionDef* a = before.find_function(name);
            const FunctionDef* b = after.find_function(name);
            if (!a || !b) {
                return whole_file();
            }
            total += static_cast<long>(diff_lines(a->body_text, b->body_text).edit_lines());
        }
        return total;
    } catch (const Error&) {
        return whole_file();
    }
}

// Re-derives the stored transforms of a file from the human-fixed text so that
// later merges of the same file reproduce the fix. Edits outside transformed
// regions do not survive (the untouched-byte invariant keeps those regions
// pristine).
void rebase_transforms(std::vector<StoredTransform>& steps, const FileContext& pristine,
                       const std::string& fixed_text, const PlannedFile& pf, int t) {
    FileContext fixed = parse_source(fixed_text, pf.language, pf.path);
    for (int i = 0; i < t; ++i) {
        StoredTransform& st = steps.at(static_cast<std::size_t>(i));
        const FunctionDef* def = fixed.find_function(st.name);
        if (!def) {
            throw Error(errkind::NameMismatch,
                        "fixed file no longer defines " + st.name + " in " + pf.path);
        }
        st.replacement_text = definition_with_lead_comments(fixed, *def);
        std::vector<HelperFunction> kept;
        for (const auto& h : st.helpers) {
            const FunctionDef* hd = fixed.find_function(h.name);
            if (!hd) {
                continue; // the human removed it
            }
            HelperFunction helper;
            helper.name = h.name;
            helper.prototype = hd->qualified_signature + ";";
            helper.definition = definition_with_lead_comments(fixed, *hd);
            kept.push_back(std::move(helper));
        }
        st.helpers = std::move(kept);
    }
    // The final step carries the full header delta; merge dedup keeps earlier
    // steps' contributions single.
    steps.at(static_cast<std::size_t>(t - 1)).new_headers =
        header_delta(pristine.header_lines(), fixed.header_lines());
}

} // namespace

RunStatus mutate(const RunOptions& opts) {
    ProjectManifest manifest = load_manifest(opts.manifest_path);
    StrategyRegistry registry = load_registry(opts.manifest_path);
    if (opts.strategy.empty()) {
        throw Error(errkind::ConfigError, "a strategy is required");
    }
    const StrategySpec strategy = registry.resolve(opts.strategy);

    Workspace ws{opts.workspace};
    fs::create_directories(ws.root);
    auto inside = fs::weakly_canonical(ws.root).generic_string() + "/";
    auto root = fs::weakly_canonical(manifest.root).generic_string() + "/";
    if (util::starts_with(inside, root)) {
        throw Error(errkind::ConfigError, "the workspace may not live inside the project root");
    }
    LockGuard lock(ws.lock_path());

    if (fs::exists(ws.checkpoint_path())) {
        throw Error(errkind::WorkspaceDirty,
                    "a halted run is awaiting a human fix; resume it or use a fresh workspace");
    }
    if (fs::exists(ws.state_path(strategy.name)) || fs::exists(ws.shadow_dir(strategy.name))) {
        throw Error(errkind::WorkspaceDirty, "strategy " + strategy.name +
                                                 " already ran in this workspace; use a fresh one");
    }

    std::vector<FileContext> contexts = parse_contexts(manifest);
    ModificationPlan plan = plan_modifications(manifest, contexts, opts.plan_seed);

    RunState state;
    state.strategy = strategy.name;
    state.manifest_path = fs::absolute(opts.manifest_path).string();
    state.gateway = opts.gateway;
    state.prefix_limit = opts.prefix_limit;
    state.plan = std::move(plan);
    state.root_hash = util::tree_hash(manifest.root);

    fs::create_directories(ws.shadow_dir(strategy.name).parent_path());
    fs::copy(manifest.root, ws.shadow_dir(strategy.name), fs::copy_options::recursive);

    save_state(ws, state);
    RunStatus status = run_loop(ws, manifest, registry, state);
    if (util::tree_hash(manifest.root) != state.root_hash) {
        throw Error(errkind::WorkspaceDirty, "the pristine source tree changed during the run");
    }
    return status;
}

RunStatus resume(const RunOptions& opts) {
    Workspace ws{opts.workspace};
    if (!fs::exists(ws.root)) {
        throw Error(errkind::WorkspaceDirty, "no workspace at " + ws.root.string());
    }
    LockGuard lock(ws.lock_path());

    auto cp = load_checkpoint(ws.root);
    if (!cp) {
        throw Error(errkind::WorkspaceDirty, "nothing to resume: no checkpoint");
    }
    RunState state = load_state(ws, cp->strategy);
    if (!opts.gateway.endpoint.empty() || !opts.gateway.replay_dir.empty()) {
        state.gateway = opts.gateway;
    }
    if (opts.prefix_limit) {
        state.prefix_limit = opts.prefix_limit;
    }

    ProjectManifest manifest = load_manifest(state.manifest_path);
    StrategyRegistry registry = load_registry(state.manifest_path);
    if (util::tree_hash(manifest.root) != state.root_hash) {
        throw Error(errkind::WorkspaceDirty, "the pristine source tree changed while halted");
    }

    const PlannedFile& pf = state.plan.files.at(state.file_index);
    int t = cp->prefix_t;
    if (pf.path != cp->file || t != state.next_t) {
        throw Error(errkind::WorkspaceDirty, "checkpoint does not match the saved run state");
    }

    BuildRun build = run_build(manifest, ws, state.strategy, pf.path, t);
    if (!build_ok(manifest, build.result)) {
        // Still broken: refresh the log pointers, keep the original halt time
        // so man-hours keep accruing.
        Checkpoint fresh = *cp;
        fresh.build_stdout_path = build.stdout_path;
        fresh.build_stderr_path = build.stderr_path;
        write_checkpoint(ws, fresh);
        return RunStatus::AwaitingHuman;
    }

    std::string fixed_text = util::read_file(ws.shadow_dir(state.strategy) / pf.path);
    std::string premerge_text = util::read_file(ws.premerge_path(state.strategy, pf.path, t));

    auto& steps = state.transforms.at(pf.path);
    const StoredTransform& current = steps.at(static_cast<std::size_t>(t - 1));
    std::vector<std::string> helper_names;
    for (const auto& st : steps) {
        for (const auto& h : st.helpers) {
            helper_names.push_back(h.name);
        }
    }

    VariantRecord rec;
    rec.variant_id = variant_id_for(state.strategy, pf.path, t);
    rec.strategy = state.strategy;
    rec.file = pf.path;
    rec.prefix_t = t;
    for (const auto& prior : load_records(ws.root)) {
        if (prior.variant_id == rec.variant_id) {
            rec.gen_outcome = prior.gen_outcome;
            rec.gen_attempts = prior.gen_attempts;
            rec.gen_elapsed_s = prior.gen_elapsed_s;
            rec.gen_line_count = prior.gen_line_count;
            rec.merge_status = prior.merge_status;
        }
    }
    rec.compile_status = CompileStatus::OkAfterHumanFix;
    rec.edit_lines =
        region_edit_lines(premerge_text, fixed_text, pf.language, current.name, helper_names);
    if (opts.man_hours_override) {
        if (*opts.man_hours_override < 0) {
            throw Error(errkind::NegativeDuration, "man-hours override is negative");
        }
        rec.man_hours = *opts.man_hours_override;
    } else {
        record_man_hours(rec, util::iso8601_to_time(cp->created_at), util::unix_now());
    }
    rec.artifact_path = copy_artifacts(manifest, ws, state.strategy, pf.path, t);
    rec.created_at = util::iso8601_now();
    append_record(ws, rec);

    FileContext pristine = parse_pristine(manifest, pf);
    rebase_transforms(steps, pristine, fixed_text, pf, t);

    fs::remove(ws.checkpoint_path());
    state.next_t = t + 1;
    save_state(ws, state);

    RunStatus status = run_loop(ws, manifest, registry, state);
    if (util::tree_hash(manifest.root) != state.root_hash) {
        throw Error(errkind::WorkspaceDirty, "the pristine source tree changed during the run");
    }
    return status;
}

std::vector<VariantRecord> load_records(const fs::path& workspace) {
    Workspace ws{workspace};
    std::vector<VariantRecord> out;
    if (!fs::exists(ws.records_path())) {
        return out;
    }
    for (const auto& line : util::split_lines(util::read_file(ws.records_path()))) {
        if (util::trim(line).empty()) {
            continue;
        }
        out.push_back(VariantRecord::from_json_line(line));
    }
    return out;
}

std::optional<Checkpoint> load_checkpoint(const fs::path& workspace) {
    Workspace ws{workspace};
    if (!fs::exists(ws.checkpoint_path())) {
        return std::nullopt;
    }
    json j;
    try {
        j = json::parse(util::read_file(ws.checkpoint_path()));
    } catch (const json::exception& e) {
        throw Error(errkind::IoError, "unreadable checkpoint: " + std::string(e.what()));
    }
    Checkpoint cp;
    cp.file = j.at("file").get<std::string>();
    cp.prefix_t = j.at("prefix_t").get<int>();
    cp.strategy = j.at("strategy").get<std::string>();
    cp.build_stdout_path = j.at("build_stdout_path").get<std::string>();
    cp.build_stderr_path = j.at("build_stderr_path").get<std::string>();
    cp.created_at = j.at("created_at").get<std::string>();
    return cp;
}

namespace {

std::optional<fs::path> trace_file(const fs::path& dir, const std::string& stem) {
    for (const char* ext : {".jsonl", ".json", ".txt"}) {
        fs::path p = dir / (stem + ext);
        if (fs::exists(p)) {
            return p;
        }
    }
    return std::nullopt;
}

} // namespace

EvaluationSummary evaluate_workspace(const fs::path& workspace) {
    Workspace ws{workspace};
    fs::path eval = ws.eval_dir();
    fs::path detections = eval / "detections.jsonl";
    if (!fs::exists(detections)) {
        throw Error(errkind::IoError, "missing " + detections.string());
    }

    std::map<std::string, std::vector<DetectorReport>> by_id;
    for (const auto& row : load_detector_reports(detections)) {
        by_id[row.variant_id].push_back(row);
    }
    auto baseline_rows = by_id.find("baseline");
    if (baseline_rows == by_id.end()) {
        throw Error(errkind::EmptyInput, "detections.jsonl has no baseline rows");
    }

    EvaluationSummary summary;
    summary.baseline_rate = detector_rate(baseline_rows->second);

    fs::path cfg = eval / "config.json";
    if (fs::exists(cfg)) {
        try {
            json j = json::parse(util::read_file(cfg));
            if (j.contains("delta")) {
                summary.delta = j.at("delta").get<double>();
            }
        } catch (const json::exception& e) {
            throw Error(errkind::ConfigError, "bad eval config: " + std::string(e.what()));
        }
    }

    std::map<std::string, Verdict> verdicts;
    fs::path verdicts_path = eval / "verdicts.json";
    if (fs::exists(verdicts_path)) {
        verdicts = load_verdicts(verdicts_path);
    }

    std::optional<CallTrace> baseline_trace;
    if (auto p = trace_file(eval / "traces", "baseline")) {
        baseline_trace = load_trace(*p, "baseline");
    }

    std::set<std::string> ids;
    for (const auto& [id, rows] : by_id) {
        if (id != "baseline") {
            ids.insert(id);
        }
    }
    for (const auto& [id, verdict] : verdicts) {
        (void)verdict;
        ids.insert(id);
    }

    for (const auto& id : ids) {
        VariantEvaluation ve;
        auto rows = by_id.find(id);
        if (rows != by_id.end()) {
            ve.rate = detector_rate(rows->second);
        }
        if (baseline_trace) {
            if (auto p = trace_file(eval / "traces", util::sanitize_component(id))) {
                ve.nlcs = normalized_lcs(*baseline_trace, load_trace(*p, id));
            }
        }
        auto v = verdicts.find(id);
        if (v != verdicts.end()) {
            ve.verdict = v->second;
        }
        summary.variants[id] = ve;
    }

    json out;
    out["baseline_rate"] = summary.baseline_rate;
    out["delta"] = summary.delta;
    json vars = json::object();
    for (const auto& [id, ve] : summary.variants) {
        json v;
        v["rate"] = ve.rate ? json(*ve.rate) : json(nullptr);
        v["nlcs"] = ve.nlcs ? json(*ve.nlcs) : json(nullptr);
        if (ve.verdict) {
            v["verdict"] = *ve.verdict == Verdict::Benign ? "benign" : "malicious";
        } else {
            v["verdict"] = nullptr;
        }
        vars[id] = v;
    }
    out["variants"] = vars;
    util::write_file(eval / "evaluation.json", out.dump(2) + "\n");
    return summary;
}

std::map<std::string, StrategyReport> aggregate_report(const fs::path& workspace) {
    Workspace ws{workspace};
    std::map<std::string, StrategyReport> report;
    std::map<std::string, std::string> strategy_of; // variant_id -> strategy

    for (const auto& rec : load_records(workspace)) {
        StrategyReport& sr = report[rec.strategy];
        sr.edit_workload += rec.edit_lines;
        sr.man_hours += rec.man_hours;
        if (rec.compile_status != CompileStatus::FailedAwaitingHuman) {
            ++sr.variants;
            strategy_of[rec.variant_id] = rec.strategy;
        }
    }

    fs::path eval_path = ws.eval_dir() / "evaluation.json";
    if (!fs::exists(eval_path)) {
        return report;
    }
    json eval;
    try {
        eval = json::parse(util::read_file(eval_path));
    } catch (const json::exception& e) {
        throw Error(errkind::IoError, "unreadable evaluation.json: " + std::string(e.what()));
    }
    double baseline_rate = eval.at("baseline_rate").get<double>();
    PreservationConfig cfg;
    cfg.delta = eval.at("delta").get<double>();

    struct Gather {
        std::vector<double> rates;
        std::vector<std::string> verdict_ids;
        std::map<std::string, Verdict> verdicts;
        std::vector<VariantSignal> signals;
    };
    std::map<std::string, Gather> gathered;

    for (const auto& [id, v] : eval.at("variants").items()) {
        auto strat = strategy_of.find(id);
        if (strat == strategy_of.end()) {
            continue;
        }
        Gather& g = gathered[strat->second];
        if (!v.at("rate").is_null()) {
            g.rates.push_back(v.at("rate").get<double>());
            if (!v.at("nlcs").is_null()) {
                g.signals.push_back({v.at("rate").get<double>(), v.at("nlcs").get<double>()});
            }
        }
        if (!v.at("verdict").is_null()) {
            g.verdict_ids.push_back(id);
            g.verdicts[id] = v.at("verdict").get<std::string>() == "benign" ? Verdict::Benign
                                                                            : Verdict::Malicious;
        }
    }

    for (auto& [strategy, g] : gathered) {
        StrategyReport& sr = report[strategy];
        if (!g.rates.empty()) {
            double sum = 0.0;
            for (double r : g.rates) {
                sum += r;
            }
            sr.mean_rate = sum / static_cast<double>(g.rates.size());
        }
        if (!g.verdict_ids.empty()) {
            sr.asr_pct = asr(g.verdict_ids, g.verdicts);
        }
        sr.phi = preservation_rate(baseline_rate, g.signals, cfg);
    }
    return report;
}

} // namespace codemorph
