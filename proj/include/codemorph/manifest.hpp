#pragma once

#include "codemorph/source.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace codemorph {

struct ManifestFile {
    std::string path; // relative to root
    Language language = Language::C;
};

struct ProjectManifest {
    std::filesystem::path root;
    std::vector<ManifestFile> files;
    std::vector<std::string> build_command;
    std::optional<std::string> build_ok_pattern;
    std::string variant_output_glob;
    std::vector<std::string> strategies;
    std::vector<std::string> exclude; // glob patterns, relative to root
    std::map<std::string, int> selection_override;

    bool excluded(const std::string& path) const;
    std::string build_command_line() const;
};

// Loads and validates the manifest JSON. Relative root is resolved against the
// manifest file's directory. Throws Error(ManifestError).
ProjectManifest load_manifest(const std::filesystem::path& path);

struct PlannedFile {
    std::string path;
    Language language = Language::C;
    int function_total = 0;
    int prefix_j = 0;
};

struct ModificationPlan {
    std::vector<PlannedFile> files;
    std::string derivation = "AscendingFunctionCount";
};

// Bracket selection: how many leading functions to transform in a file with
// `total` function definitions. Rounds up.
int select_functions(int total);

// Sorts eligible files ascending by function count (stable ties; a seed
// shuffles tied groups instead) and sizes each file's prefix with
// select_functions unless the manifest overrides it.
ModificationPlan plan_modifications(const ProjectManifest& manifest,
                                    const std::vector<FileContext>& contexts,
                                    std::optional<unsigned> tie_seed = std::nullopt);

} // namespace codemorph
