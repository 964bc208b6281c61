#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace codemorph {

enum class Language { C, Cpp };

const char* language_name(Language lang);
Language language_from_name(const std::string& name);
Language language_from_extension(const std::filesystem::path& path);

struct SourceFile {
    std::filesystem::path path;
    Language language = Language::C;
    std::string text;
};

// Half-open byte range into SourceFile::text.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct SpannedText {
    Span span;
    std::string text;
};

struct FunctionDef {
    std::string name;
    std::string qualified_signature;
    Span body_span;
    std::string body_text;
    int ordinal = 0;
    bool in_namespace = false;
    bool in_extern_c = false;
};

// Structured view of one source file. headers, globals and functions are
// disjoint byte ranges in document order; the bytes between them (whitespace
// and comments) are residue that reconstruct() restores from the original.
struct FileContext {
    SourceFile file;
    std::vector<SpannedText> headers;
    std::vector<SpannedText> globals;
    std::vector<FunctionDef> functions;

    std::vector<std::string> header_lines() const;
    std::vector<std::string> global_texts() const;
    const FunctionDef* find_function(const std::string& name) const;
};

} // namespace codemorph
