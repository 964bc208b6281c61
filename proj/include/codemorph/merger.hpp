#pragma once

#include "codemorph/source.hpp"

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace codemorph {

struct HelperFunction {
    std::string prototype;  // signature + ";"
    std::string definition; // full definition text
    std::string name;
};

// One function's transformation, normalized for merging: the replacement body,
// any new include lines it introduced and any helper functions it defined.
struct TransformedFunction {
    FunctionDef original;
    std::string replacement_text;
    std::vector<std::string> new_headers;
    std::vector<HelperFunction> helpers;
    bool reverted = false;
};

enum class ProvenanceKind { Original, Transformed, Reverted };

struct MergedFile {
    std::string text;
    std::set<int> modified_ordinals;
    std::map<int, ProvenanceKind> provenance; // ordinal -> how it got there
};

// Splits LLM output into leading include lines and the remaining code. Include
// lines already present in existing_headers are dropped (path comparison is
// quote/bracket and whitespace insensitive).
std::pair<std::vector<std::string>, std::string>
extract_new_headers(const std::string& code_text, const std::vector<std::string>& existing_headers);

// Parses generated code into a TransformedFunction for `original`. Throws
// Error(NameMismatch) when the code does not define exactly one function with
// the original's name, Error(HelperCollision) when an extra definition clashes
// with a name in ctx, and Error(ParseFailure) when the code cannot be scanned.
TransformedFunction analyze_replacement(const FileContext& ctx, const FunctionDef& original,
                                        const std::string& code_text);

TransformedFunction make_reverted(const FunctionDef& original);

// Definition text extended upward over the comment block directly above it.
std::string definition_with_lead_comments(const FileContext& ctx, const FunctionDef& fn);

// Include lines of `current` that are not in `existing` (normalized comparison).
std::vector<std::string> header_delta(const std::vector<std::string>& existing,
                                      const std::vector<std::string>& current);

// Applies transformed functions 1..t to the file: replaces each target's span,
// appends new headers after the last original header, places helper prototypes
// after the globals and helper definitions before the first function. Throws
// Error(TargetNotFound) when a transform does not belong to ctx and
// Error(InvalidPrefix) when the transforms are not functions 1..t.
MergedFile merge(const FileContext& ctx, const std::vector<TransformedFunction>& transformed);

} // namespace codemorph
