#include "codemorph/util.hpp"

#include "codemorph/error.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

namespace codemorph::util {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(errkind::IoError, "cannot open for reading: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(errkind::IoError, "cannot open for writing: " + path.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw Error(errkind::IoError, "short write: " + path.string());
    }
}

void append_line(const std::filesystem::path& path, const std::string& line) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) {
        throw Error(errkind::IoError, "cannot open for appending: " + path.string());
    }
    out << line << '\n';
    if (!out) {
        throw Error(errkind::IoError, "short write: " + path.string());
    }
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string fnv1a64_hex(const std::string& data) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(data)));
    return std::string(buf);
}

std::string tree_hash(const std::filesystem::path& root) {
    std::map<std::string, std::string> entries;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        auto rel = std::filesystem::relative(entry.path(), root).generic_string();
        entries[rel] = fnv1a64_hex(read_file(entry.path()));
    }
    std::string acc;
    for (const auto& [rel, hash] : entries) {
        acc += rel;
        acc += '\0';
        acc += hash;
        acc += '\0';
    }
    return fnv1a64_hex(acc);
}

namespace {

bool glob_match_parts(const std::vector<std::string>& pat, std::size_t pi,
                      const std::vector<std::string>& path, std::size_t si);

bool match_component(const std::string& pat, const std::string& text) {
    std::size_t p = 0, t = 0;
    std::size_t star = std::string::npos, mark = 0;
    while (t < text.size()) {
        if (p < pat.size() && (pat[p] == '?' || pat[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pat.size() && pat[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pat.size() && pat[p] == '*') {
        ++p;
    }
    return p == pat.size();
}

bool glob_match_parts(const std::vector<std::string>& pat, std::size_t pi,
                      const std::vector<std::string>& path, std::size_t si) {
    if (pi == pat.size()) {
        return si == path.size();
    }
    if (pat[pi] == "**") {
        for (std::size_t skip = si; skip <= path.size(); ++skip) {
            if (glob_match_parts(pat, pi + 1, path, skip)) {
                return true;
            }
        }
        return false;
    }
    if (si == path.size()) {
        return false;
    }
    return match_component(pat[pi], path[si]) && glob_match_parts(pat, pi + 1, path, si + 1);
}

std::vector<std::string> split_path(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == '/') {
            if (!cur.empty()) {
                parts.push_back(cur);
                cur.clear();
            }
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) {
        parts.push_back(cur);
    }
    return parts;
}

} // namespace

bool glob_match(const std::string& pattern, const std::string& path) {
    return glob_match_parts(split_path(pattern), 0, split_path(path), 0);
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) {
        lines.push_back(cur);
    }
    return lines;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return s.substr(b, e - b);
}

std::string collapse_ws(const std::string& s) {
    std::string out;
    bool in_ws = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_ws = true;
        } else {
            if (in_ws && !out.empty()) {
                out += ' ';
            }
            in_ws = false;
            out += c;
        }
    }
    return out;
}

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool starts_with(const std::string& s, const std::string& prefix) {
    return s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string sanitize_component(const std::string& name) {
    std::string out;
    for (char c : name) {
        if (c == '/' || c == '\\') {
            out += "__";
        } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ||
                   c == '_') {
            out += c;
        } else {
            out += '_';
        }
    }
    return out;
}

std::string iso8601_from_time(std::int64_t unix_seconds) {
    std::time_t t = static_cast<std::time_t>(unix_seconds);
    std::tm tm_utc{};
    gmtime_r(&t, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return std::string(buf);
}

std::string iso8601_now() { return iso8601_from_time(unix_now()); }

std::int64_t iso8601_to_time(const std::string& stamp) {
    std::tm tm_utc{};
    if (sscanf(stamp.c_str(), "%d-%d-%dT%d:%d:%d", &tm_utc.tm_year, &tm_utc.tm_mon,
               &tm_utc.tm_mday, &tm_utc.tm_hour, &tm_utc.tm_min, &tm_utc.tm_sec) != 6) {
        throw Error(errkind::IoError, "bad timestamp: " + stamp);
    }
    tm_utc.tm_year -= 1900;
    tm_utc.tm_mon -= 1;
    return static_cast<std::int64_t>(timegm(&tm_utc));
}

std::int64_t unix_now() { return static_cast<std::int64_t>(std::time(nullptr)); }

int count_lines(const std::string& text) {
    if (text.empty()) {
        return 0;
    }
    int n = 0;
    for (char c : text) {
        if (c == '\n') {
            ++n;
        }
    }
    if (text.back() != '\n') {
        ++n;
    }
    return n;
}

} // namespace codemorph::util
