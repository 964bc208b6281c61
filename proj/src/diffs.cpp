#include "codemorph/diffs.hpp"

#include "codemorph/util.hpp"

#include <algorithm>

namespace codemorph {

std::size_t lcs_line_count(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    if (a.empty() || b.empty()) {
        return 0;
    }
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            if (a[i - 1] == b[j - 1]) {
                cur[j] = prev[j - 1] + 1;
            } else {
                cur[j] = std::max(prev[j], cur[j - 1]);
            }
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

DiffStats diff_lines(const std::string& before, const std::string& after) {
    auto a = util::split_lines(before);
    auto b = util::split_lines(after);
    std::size_t common = lcs_line_count(a, b);
    DiffStats stats;
    stats.deleted = a.size() - common;
    stats.added = b.size() - common;
    return stats;
}

} // namespace codemorph
