#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace codemorph::util {

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);
void append_line(const std::filesystem::path& path, const std::string& line);

// FNV-1a 64-bit, rendered as 16 lowercase hex digits.
std::uint64_t fnv1a64(const std::string& data);
std::string fnv1a64_hex(const std::string& data);

// Stable content hash of every regular file under root (relative path + bytes).
std::string tree_hash(const std::filesystem::path& root);

// Shell-style glob against a relative path. `*` and `?` do not cross `/`,
// `**` matches any number of path components.
bool glob_match(const std::string& pattern, const std::string& path);

std::vector<std::string> split_lines(const std::string& text);
std::string trim(const std::string& s);
std::string collapse_ws(const std::string& s);
std::string to_lower(std::string s);

bool starts_with(const std::string& s, const std::string& prefix);
bool ends_with(const std::string& s, const std::string& suffix);

// Replace path separators so a repo-relative file name can be used as a
// single directory or file component.
std::string sanitize_component(const std::string& name);

// Current time as ISO-8601 UTC (e.g. 2025-01-30T12:00:00Z) and back.
std::string iso8601_now();
std::string iso8601_from_time(std::int64_t unix_seconds);
std::int64_t iso8601_to_time(const std::string& stamp);
std::int64_t unix_now();

int count_lines(const std::string& text);

} // namespace codemorph::util
