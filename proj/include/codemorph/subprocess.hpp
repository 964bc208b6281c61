#pragma once

#include <filesystem>
#include <string>

namespace codemorph {

struct CommandResult {
    int exit_code = -1;
    std::string out;
    std::string err;
    bool timed_out = false;
};

// Runs `command` through /bin/sh -c in `cwd`, capturing stdout and stderr
// separately. A non-positive timeout means no limit.
CommandResult run_command(const std::string& command, const std::filesystem::path& cwd,
                          double timeout_s = 0.0);

} // namespace codemorph
