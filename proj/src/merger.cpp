#include "codemorph/merger.hpp"

#include "codemorph/error.hpp"
#include "codemorph/extractor.hpp"
#include "codemorph/util.hpp"

#include <algorithm>
#include <cctype>
#include <map>

namespace codemorph {

namespace {

bool is_include_line(const std::string& line) {
    auto t = util::trim(line);
    if (t.empty() || t[0] != '#') {
        return false;
    }
    std::size_t i = 1;
    while (i < t.size() && std::isspace(static_cast<unsigned char>(t[i]))) {
        ++i;
    }
    return t.compare(i, 7, "include") == 0 || t.compare(i, 6, "import") == 0;
}

// Normalization key for dedup: the included path without quote/bracket
// delimiters, whitespace collapsed.
std::string include_key(const std::string& line) {
    auto t = util::collapse_ws(util::trim(line));
    auto open = t.find_first_of("<\"");
    if (open != std::string::npos) {
        char closer = t[open] == '<' ? '>' : '"';
        auto close = t.find(closer, open + 1);
        if (close != std::string::npos) {
            std::string path = t.substr(open + 1, close - open - 1);
            path.erase(std::remove(path.begin(), path.end(), ' '), path.end());
            return path;
        }
    }
    auto word_end = t.find(' ');
    auto rest = word_end == std::string::npos ? "" : t.substr(word_end + 1);
    return rest;
}

std::size_t after_line(const std::string& text, std::size_t from) {
    auto nl = text.find('\n', from);
    return nl == std::string::npos ? text.size() : nl + 1;
}

} // namespace

std::pair<std::vector<std::string>, std::string>
extract_new_headers(const std::string& code_text, const std::vector<std::string>& existing_headers) {
    std::vector<std::string> seen_keys;
    for (const auto& line : existing_headers) {
        seen_keys.push_back(include_key(line));
    }

    std::vector<std::string> new_headers;
    std::size_t pos = 0;
    while (pos < code_text.size()) {
        std::size_t nl = code_text.find('\n', pos);
        std::size_t line_end = nl == std::string::npos ? code_text.size() : nl;
        std::string line = code_text.substr(pos, line_end - pos);
        std::string trimmed = util::trim(line);
        if (trimmed.empty()) {
            pos = nl == std::string::npos ? code_text.size() : nl + 1;
            continue;
        }
        if (!is_include_line(trimmed)) {
            break;
        }
        std::string key = include_key(trimmed);
        if (std::find(seen_keys.begin(), seen_keys.end(), key) == seen_keys.end()) {
            seen_keys.push_back(key);
            new_headers.push_back(trimmed);
        }
        pos = nl == std::string::npos ? code_text.size() : nl + 1;
    }
    return {new_headers, code_text.substr(pos)};
}

TransformedFunction make_reverted(const FunctionDef& original) {
    TransformedFunction tf;
    tf.original = original;
    tf.replacement_text = original.body_text;
    tf.reverted = true;
    return tf;
}

namespace {

// A global item in LLM output that redeclares a snippet function is its
// prototype; detect by the identifier in front of the first paren group.
bool looks_like_prototype_of(const std::string& global_text,
                             const std::vector<std::string>& names) {
    auto flat = util::collapse_ws(global_text);
    for (const auto& name : names) {
        auto at = flat.find(name);
        while (at != std::string::npos) {
            std::size_t after = at + name.size();
            bool left_ok = at == 0 || !(std::isalnum(static_cast<unsigned char>(flat[at - 1])) ||
                                        flat[at - 1] == '_');
            std::size_t p = after;
            while (p < flat.size() && flat[p] == ' ') {
                ++p;
            }
            if (left_ok && p < flat.size() && flat[p] == '(') {
                return true;
            }
            at = flat.find(name, at + 1);
        }
    }
    return false;
}

// Pulls the comment block sitting directly above a definition into its text.
std::size_t lead_with_comments(const std::string& text, std::size_t def_begin,
                               std::size_t floor) {
    std::size_t lead = def_begin;
    std::size_t i = def_begin;
    while (i > floor) {
        std::size_t line_start = text.rfind('\n', i - 1);
        line_start = line_start == std::string::npos ? floor : line_start + 1;
        if (line_start < floor) {
            line_start = floor;
        }
        std::string line = util::trim(text.substr(line_start, i - line_start));
        if (line.empty() && i == def_begin) {
            i = line_start == floor ? floor : line_start - 1;
            continue;
        }
        if (util::starts_with(line, "//") || util::starts_with(line, "/*") ||
            util::starts_with(line, "*")) {
            lead = line_start;
            if (line_start == floor) {
                break;
            }
            i = line_start - 1;
            continue;
        }
        break;
    }
    return lead;
}

} // namespace

TransformedFunction analyze_replacement(const FileContext& ctx, const FunctionDef& original,
                                        const std::string& code_text) {
    auto [top_headers, stripped] = extract_new_headers(code_text, ctx.header_lines());

    FileContext mini = parse_source(stripped, ctx.file.language, "<replacement>");

    TransformedFunction tf;
    tf.original = original;
    tf.new_headers = top_headers;

    // Includes the model buried below the first code line.
    std::vector<std::string> keys;
    for (const auto& line : ctx.header_lines()) {
        keys.push_back(include_key(line));
    }
    for (const auto& line : tf.new_headers) {
        keys.push_back(include_key(line));
    }
    for (const auto& h : mini.headers) {
        std::string key = include_key(h.text);
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            keys.push_back(key);
            tf.new_headers.push_back(util::trim(h.text));
        }
    }

    const FunctionDef* target = nullptr;
    std::vector<const FunctionDef*> extras;
    int target_count = 0;
    for (const auto& fn : mini.functions) {
        if (fn.name == original.name) {
            ++target_count;
            target = &fn;
        } else {
            extras.push_back(&fn);
        }
    }
    if (target_count != 1) {
        std::string found;
        for (const auto& fn : mini.functions) {
            if (!found.empty()) {
                found += ", ";
            }
            found += fn.name;
        }
        throw Error(errkind::NameMismatch,
                    "replacement defines " + std::to_string(target_count) + " function(s) named " +
                        original.name + " (definitions: " + (found.empty() ? "none" : found) + ")");
    }

    std::vector<std::string> snippet_names;
    snippet_names.push_back(target->name);
    for (const auto* fn : extras) {
        snippet_names.push_back(fn->name);
    }

    for (const auto& g : mini.globals) {
        if (looks_like_prototype_of(g.text, snippet_names)) {
            continue; // regenerated below from the definitions
        }
        bool known = false;
        for (const auto& existing : ctx.globals) {
            if (util::collapse_ws(existing.text) == util::collapse_ws(g.text)) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw Error(errkind::HelperCollision,
                        "replacement introduces a global declaration: " +
                            util::collapse_ws(g.text).substr(0, 120));
        }
    }

    auto piece_floor = [&](std::size_t begin) {
        std::size_t floor = 0;
        for (const auto& h : mini.headers) {
            if (h.span.end <= begin) {
                floor = std::max(floor, h.span.end);
            }
        }
        for (const auto& g : mini.globals) {
            if (g.span.end <= begin) {
                floor = std::max(floor, g.span.end);
            }
        }
        for (const auto& fn : mini.functions) {
            if (fn.body_span.end <= begin) {
                floor = std::max(floor, fn.body_span.end);
            }
        }
        return floor;
    };

    auto text_with_lead = [&](const FunctionDef& fn) {
        std::size_t lead = lead_with_comments(stripped, fn.body_span.begin,
                                              piece_floor(fn.body_span.begin));
        return stripped.substr(lead, fn.body_span.end - lead);
    };

    tf.replacement_text = text_with_lead(*target);

    for (const auto* fn : extras) {
        if (ctx.find_function(fn->name) != nullptr) {
            throw Error(errkind::HelperCollision,
                        "helper " + fn->name + " collides with a function in " +
                            ctx.file.path.string());
        }
        for (const auto& prior : tf.helpers) {
            if (prior.name == fn->name) {
                throw Error(errkind::HelperCollision, "helper defined twice: " + fn->name);
            }
        }
        HelperFunction helper;
        helper.name = fn->name;
        helper.prototype = fn->qualified_signature + ";";
        helper.definition = text_with_lead(*fn);
        tf.helpers.push_back(std::move(helper));
    }
    return tf;
}

std::string definition_with_lead_comments(const FileContext& ctx, const FunctionDef& fn) {
    const std::string& text = ctx.file.text;
    std::size_t floor = 0;
    for (const auto& h : ctx.headers) {
        if (h.span.end <= fn.body_span.begin) {
            floor = std::max(floor, h.span.end);
        }
    }
    for (const auto& g : ctx.globals) {
        if (g.span.end <= fn.body_span.begin) {
            floor = std::max(floor, g.span.end);
        }
    }
    for (const auto& other : ctx.functions) {
        if (other.body_span.end <= fn.body_span.begin) {
            floor = std::max(floor, other.body_span.end);
        }
    }
    std::size_t lead = lead_with_comments(text, fn.body_span.begin, floor);
    return text.substr(lead, fn.body_span.end - lead);
}

std::vector<std::string> header_delta(const std::vector<std::string>& existing,
                                      const std::vector<std::string>& current) {
    std::vector<std::string> keys;
    for (const auto& line : existing) {
        keys.push_back(include_key(line));
    }
    std::vector<std::string> fresh;
    for (const auto& line : current) {
        std::string key = include_key(line);
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            keys.push_back(key);
            fresh.push_back(util::trim(line));
        }
    }
    return fresh;
}

MergedFile merge(const FileContext& ctx, const std::vector<TransformedFunction>& transformed) {
    const std::string& original = ctx.file.text;

    MergedFile out;
    for (const auto& fn : ctx.functions) {
        out.provenance[fn.ordinal] = ProvenanceKind::Original;
    }
    if (transformed.empty()) {
        out.text = original;
        return out;
    }

    std::vector<int> ordinals;
    for (const auto& tf : transformed) {
        const FunctionDef* here = nullptr;
        for (const auto& fn : ctx.functions) {
            if (fn.ordinal == tf.original.ordinal) {
                here = &fn;
                break;
            }
        }
        if (!here || here->name != tf.original.name ||
            here->body_span.begin != tf.original.body_span.begin ||
            here->body_span.end != tf.original.body_span.end) {
            throw Error(errkind::TargetNotFound,
                        tf.original.name + " does not belong to " + ctx.file.path.string());
        }
        ordinals.push_back(tf.original.ordinal);
    }
    std::vector<int> sorted = ordinals;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] != static_cast<int>(i) + 1) {
            throw Error(errkind::InvalidPrefix,
                        "transforms must cover functions 1..t of the plan");
        }
    }

    // New headers, deduplicated against the file and across transforms.
    std::vector<std::string> keys;
    for (const auto& h : ctx.headers) {
        keys.push_back(include_key(h.text));
    }
    std::vector<std::string> new_headers;
    for (const auto& tf : transformed) {
        for (const auto& line : tf.new_headers) {
            std::string key = include_key(line);
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
                keys.push_back(key);
                new_headers.push_back(line);
            }
        }
    }

    // Helpers in step order; an identical re-emission is dropped.
    std::vector<const HelperFunction*> helpers;
    for (const auto& tf : transformed) {
        for (const auto& helper : tf.helpers) {
            bool duplicate = false;
            for (const auto* prior : helpers) {
                if (prior->name == helper.name) {
                    if (util::collapse_ws(prior->definition) !=
                        util::collapse_ws(helper.definition)) {
                        throw Error(errkind::HelperCollision,
                                    "helper " + helper.name +
                                        " redefined differently in a later step");
                    }
                    duplicate = true;
                    break;
                }
            }
            if (!duplicate) {
                helpers.push_back(&helper);
            }
        }
    }

    struct Edit {
        std::size_t pos;
        int rank;
        std::size_t skip = 0;
        std::string text;
    };
    std::vector<Edit> edits;

    std::size_t headers_pos = 0;
    if (!ctx.headers.empty()) {
        headers_pos = after_line(original, ctx.headers.back().span.end);
    }
    if (!new_headers.empty()) {
        std::string block;
        if (headers_pos == original.size() && !original.empty() && original.back() != '\n') {
            block += '\n';
        }
        for (const auto& line : new_headers) {
            block += line;
            block += '\n';
        }
        edits.push_back({headers_pos, 0, 0, block});
    }

    std::size_t first_fn = ctx.functions.empty() ? original.size()
                                                 : ctx.functions.front().body_span.begin;
    std::size_t protos_pos = headers_pos;
    const SpannedText* last_global = nullptr;
    for (const auto& g : ctx.globals) {
        if (g.span.begin < first_fn) {
            last_global = &g;
        }
    }
    if (last_global) {
        protos_pos = after_line(original, last_global->span.end);
    }
    if (!helpers.empty()) {
        std::string protos;
        if (protos_pos == original.size() && !original.empty() && original.back() != '\n') {
            protos += '\n';
        }
        for (const auto* helper : helpers) {
            protos += helper->prototype;
            protos += '\n';
        }
        edits.push_back({protos_pos, 1, 0, protos});

        std::string defs;
        if (first_fn == original.size() && !original.empty() && original.back() != '\n') {
            defs += '\n';
        }
        for (const auto* helper : helpers) {
            defs += helper->definition;
            defs += "\n\n";
        }
        edits.push_back({first_fn, 2, 0, defs});
    }

    for (const auto& tf : transformed) {
        const auto& span = tf.original.body_span;
        edits.push_back({span.begin, 3, span.end - span.begin, tf.replacement_text});
        if (tf.reverted) {
            out.provenance[tf.original.ordinal] = ProvenanceKind::Reverted;
        } else {
            out.provenance[tf.original.ordinal] = ProvenanceKind::Transformed;
            if (tf.replacement_text != tf.original.body_text) {
                out.modified_ordinals.insert(tf.original.ordinal);
            }
        }
    }

    std::stable_sort(edits.begin(), edits.end(), [](const Edit& a, const Edit& b) {
        return a.pos != b.pos ? a.pos < b.pos : a.rank < b.rank;
    });

    std::string text;
    text.reserve(original.size() + 1024);
    std::size_t cursor = 0;
    for (const auto& edit : edits) {
        text.append(original, cursor, edit.pos - cursor);
        text.append(edit.text);
        cursor = edit.pos + edit.skip;
    }
    text.append(original, cursor, original.size() - cursor);
    out.text = std::move(text);
    return out;
}

} // namespace codemorph
