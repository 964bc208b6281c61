#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace codemorph {

struct DiffStats {
    std::size_t added = 0;
    std::size_t deleted = 0;

    std::size_t edit_lines() const { return added + deleted; }
};

// Minimal line diff (longest-common-subsequence based): the smallest number of
// added and deleted lines that turns `before` into `after`.
DiffStats diff_lines(const std::string& before, const std::string& after);

std::size_t lcs_line_count(const std::vector<std::string>& a, const std::vector<std::string>& b);

} // namespace codemorph
