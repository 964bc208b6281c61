#pragma once

#include "codemorph/source.hpp"

namespace codemorph {

// Scans a C or C++ translation unit into headers, globals and function
// definitions without preprocessing it. Throws Error(ParseFailure) when the
// file cannot be segmented (unbalanced braces or parentheses at end of file,
// unterminated namespace block).
FileContext parse_file(const SourceFile& src);

FileContext parse_source(const std::string& text, Language lang,
                         const std::filesystem::path& path = "<memory>");

// Rebuilds the file from the context's stored pieces plus the residue gaps.
// Byte-exact inverse of parse_file for any context it produced.
std::string reconstruct(const FileContext& ctx);

} // namespace codemorph
