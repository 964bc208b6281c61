#include "codemorph/manifest.hpp"

#include "codemorph/error.hpp"
#include "codemorph/strategies.hpp"
#include "codemorph/util.hpp"

#include <algorithm>
#include <random>

#include <json.hpp>

namespace codemorph {

using nlohmann::json;

bool ProjectManifest::excluded(const std::string& path) const {
    for (const auto& pattern : exclude) {
        if (util::glob_match(pattern, path) || pattern == path) {
            return true;
        }
    }
    return false;
}

std::string ProjectManifest::build_command_line() const {
    if (build_command.size() == 1) {
        return build_command.front();
    }
    std::string line;
    for (const auto& arg : build_command) {
        if (!line.empty()) {
            line += ' ';
        }
        bool plain = !arg.empty() && arg.find_first_not_of(
                                         "abcdefghijklmnopqrstuvwxyz"
                                         "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
                                         "0123456789_-./=:+,@") == std::string::npos;
        if (plain) {
            line += arg;
        } else {
            line += '\'';
            for (char c : arg) {
                if (c == '\'') {
                    line += "'\\''";
                } else {
                    line += c;
                }
            }
            line += '\'';
        }
    }
    return line;
}

ProjectManifest load_manifest(const std::filesystem::path& path) {
    json doc = json::parse(util::read_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw Error(errkind::ManifestError, "not a JSON object: " + path.string());
    }

    ProjectManifest m;
    try {
        std::filesystem::path root = doc.at("root").get<std::string>();
        if (root.is_relative()) {
            root = path.parent_path() / root;
        }
        m.root = std::filesystem::weakly_canonical(root);

        for (const auto& entry : doc.at("files")) {
            ManifestFile file;
            file.path = entry.at("path").get<std::string>();
            if (entry.contains("language")) {
                file.language = language_from_name(entry["language"].get<std::string>());
            } else {
                file.language = language_from_extension(file.path);
            }
            m.files.push_back(std::move(file));
        }

        const auto& cmd = doc.at("build_command");
        if (cmd.is_string()) {
            m.build_command.push_back(cmd.get<std::string>());
        } else {
            for (const auto& arg : cmd) {
                m.build_command.push_back(arg.get<std::string>());
            }
        }

        if (doc.contains("build_ok_pattern") && !doc["build_ok_pattern"].is_null()) {
            m.build_ok_pattern = doc["build_ok_pattern"].get<std::string>();
        }
        m.variant_output_glob = doc.value("variant_output_glob", std::string{});
        if (doc.contains("strategies")) {
            for (const auto& s : doc["strategies"]) {
                m.strategies.push_back(util::to_lower(s.get<std::string>()));
            }
        }
        if (doc.contains("exclude")) {
            for (const auto& e : doc["exclude"]) {
                m.exclude.push_back(e.get<std::string>());
            }
        }
        if (doc.contains("selection_override")) {
            for (const auto& [file, count] : doc["selection_override"].items()) {
                m.selection_override[file] = count.get<int>();
            }
        }
    } catch (const json::exception& e) {
        throw Error(errkind::ManifestError, path.string() + ": " + e.what());
    }

    if (m.files.empty()) {
        throw Error(errkind::ManifestError, "manifest lists no files");
    }
    if (m.build_command.empty()) {
        throw Error(errkind::ManifestError, "manifest has no build_command");
    }
    if (!std::filesystem::is_directory(m.root)) {
        throw Error(errkind::ManifestError, "root is not a directory: " + m.root.string());
    }
    return m;
}

int select_functions(int total) {
    if (total <= 0) {
        return 0;
    }
    int pct;
    if (total < 10) {
        pct = 100;
    } else if (total <= 20) {
        pct = 60;
    } else if (total <= 40) {
        pct = 30;
    } else if (total <= 70) {
        pct = 20;
    } else {
        pct = 15;
    }
    return (total * pct + 99) / 100;
}

ModificationPlan plan_modifications(const ProjectManifest& manifest,
                                    const std::vector<FileContext>& contexts,
                                    std::optional<unsigned> tie_seed) {
    ModificationPlan plan;

    for (const auto& file : manifest.files) {
        if (manifest.excluded(file.path)) {
            continue;
        }
        const FileContext* ctx = nullptr;
        for (const auto& candidate : contexts) {
            if (candidate.file.path.generic_string() == file.path) {
                ctx = &candidate;
                break;
            }
        }
        if (!ctx) {
            throw Error(errkind::ManifestError, "no parsed context for " + file.path);
        }
        PlannedFile planned;
        planned.path = file.path;
        planned.language = file.language;
        planned.function_total = static_cast<int>(ctx->functions.size());

        auto override_it = manifest.selection_override.find(file.path);
        int j = override_it != manifest.selection_override.end()
                    ? override_it->second
                    : select_functions(planned.function_total);
        planned.prefix_j = std::clamp(j, 0, planned.function_total);
        plan.files.push_back(std::move(planned));
    }

    std::stable_sort(plan.files.begin(), plan.files.end(),
                     [](const PlannedFile& a, const PlannedFile& b) {
                         return a.function_total < b.function_total;
                     });

    if (tie_seed) {
        std::mt19937 rng(*tie_seed);
        std::size_t i = 0;
        while (i < plan.files.size()) {
            std::size_t j = i;
            while (j < plan.files.size() &&
                   plan.files[j].function_total == plan.files[i].function_total) {
                ++j;
            }
            std::shuffle(plan.files.begin() + static_cast<long>(i),
                         plan.files.begin() + static_cast<long>(j), rng);
            i = j;
        }
    }
    return plan;
}

} // namespace codemorph
