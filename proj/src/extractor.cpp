#include "codemorph/extractor.hpp"

#include "codemorph/error.hpp"
#include "codemorph/util.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <unordered_set>

namespace codemorph {

const char* language_name(Language lang) { return lang == Language::C ? "c" : "cpp"; }

Language language_from_name(const std::string& name) {
    auto n = util::to_lower(name);
    if (n == "c") {
        return Language::C;
    }
    if (n == "cpp" || n == "c++" || n == "cxx" || n == "cc") {
        return Language::Cpp;
    }
    throw Error(errkind::ManifestError, "unknown language: " + name);
}

Language language_from_extension(const std::filesystem::path& path) {
    auto ext = util::to_lower(path.extension().string());
    if (ext == ".c" || ext == ".h") {
        return Language::C;
    }
    return Language::Cpp;
}

std::vector<std::string> FileContext::header_lines() const {
    std::vector<std::string> out;
    out.reserve(headers.size());
    for (const auto& h : headers) {
        out.push_back(h.text);
    }
    return out;
}

std::vector<std::string> FileContext::global_texts() const {
    std::vector<std::string> out;
    out.reserve(globals.size());
    for (const auto& g : globals) {
        out.push_back(g.text);
    }
    return out;
}

const FunctionDef* FileContext::find_function(const std::string& name) const {
    for (const auto& fn : functions) {
        if (fn.name == name) {
            return &fn;
        }
    }
    return nullptr;
}

namespace {

enum class TokKind { Ident, Number, Str, Chr, Punct, Preproc };

struct Token {
    TokKind kind;
    std::size_t begin;
    std::size_t end;
};

bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

class Lexer {
public:
    Lexer(const std::string& text, Language lang) : text_(text), lang_(lang) {}

    std::vector<Token> run() {
        std::vector<Token> toks;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
                continue;
            }
            if (c == '/' && peek(1) == '/') {
                skip_line_comment();
                continue;
            }
            if (c == '/' && peek(1) == '*') {
                skip_block_comment();
                continue;
            }
            if (c == '#' && only_ws_since_line_start()) {
                toks.push_back(lex_directive());
                continue;
            }
            if (c == '"') {
                toks.push_back(lex_string());
                continue;
            }
            if (c == '\'') {
                toks.push_back(lex_char());
                continue;
            }
            if (std::isdigit(static_cast<unsigned char>(c)) ||
                (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
                toks.push_back(lex_number());
                continue;
            }
            if (ident_start(c)) {
                toks.push_back(lex_ident_or_raw_string());
                continue;
            }
            toks.push_back({TokKind::Punct, pos_, pos_ + 1});
            ++pos_;
        }
        return toks;
    }

private:
    char peek(std::size_t ahead) const {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }

    bool only_ws_since_line_start() const {
        std::size_t i = pos_;
        while (i > 0 && text_[i - 1] != '\n') {
            char c = text_[i - 1];
            if (c != ' ' && c != '\t' && c != '\r') {
                return false;
            }
            --i;
        }
        return true;
    }

    void skip_line_comment() {
        pos_ += 2;
        while (pos_ < text_.size()) {
            if (text_[pos_] == '\\' && skip_splice()) {
                continue;
            }
            if (text_[pos_] == '\n') {
                break;
            }
            ++pos_;
        }
    }

    void skip_block_comment() {
        pos_ += 2;
        while (pos_ < text_.size()) {
            if (text_[pos_] == '*' && peek(1) == '/') {
                pos_ += 2;
                return;
            }
            ++pos_;
        }
    }

    // Consumes backslash-newline at pos_, returns true if one was there.
    bool skip_splice() {
        if (text_[pos_] != '\\') {
            return false;
        }
        std::size_t i = pos_ + 1;
        if (i < text_.size() && text_[i] == '\r') {
            ++i;
        }
        if (i < text_.size() && text_[i] == '\n') {
            pos_ = i + 1;
            return true;
        }
        return false;
    }

    Token lex_directive() {
        std::size_t begin = pos_;
        ++pos_;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '\\' && skip_splice()) {
                continue;
            }
            if (c == '\n') {
                break;
            }
            if (c == '/' && peek(1) == '*') {
                skip_block_comment();
                continue;
            }
            if (c == '/' && peek(1) == '/') {
                skip_line_comment();
                continue;
            }
            if (c == '"') {
                lex_string();
                continue;
            }
            ++pos_;
        }
        std::size_t end = pos_;
        while (end > begin && (text_[end - 1] == '\r' || text_[end - 1] == ' ' ||
                               text_[end - 1] == '\t')) {
            --end;
        }
        return {TokKind::Preproc, begin, end};
    }

    Token lex_string() {
        std::size_t begin = pos_;
        ++pos_;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '\\' && pos_ + 1 < text_.size()) {
                pos_ += 2;
                continue;
            }
            ++pos_;
            if (c == '"') {
                break;
            }
        }
        return {TokKind::Str, begin, pos_};
    }

    Token lex_char() {
        std::size_t begin = pos_;
        ++pos_;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '\\' && pos_ + 1 < text_.size()) {
                pos_ += 2;
                continue;
            }
            ++pos_;
            if (c == '\'' || c == '\n') {
                break;
            }
        }
        return {TokKind::Chr, begin, pos_};
    }

    Token lex_number() {
        std::size_t begin = pos_;
        ++pos_;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (ident_char(c) || c == '.' || c == '\'') {
                ++pos_;
                continue;
            }
            if ((c == '+' || c == '-') && pos_ > begin) {
                char prev = text_[pos_ - 1];
                if (prev == 'e' || prev == 'E' || prev == 'p' || prev == 'P') {
                    ++pos_;
                    continue;
                }
            }
            break;
        }
        return {TokKind::Number, begin, pos_};
    }

    Token lex_ident_or_raw_string() {
        std::size_t begin = pos_;
        while (pos_ < text_.size() && ident_char(text_[pos_])) {
            ++pos_;
        }
        std::string word = text_.substr(begin, pos_ - begin);
        if (lang_ == Language::Cpp && pos_ < text_.size() && text_[pos_] == '"' &&
            (word == "R" || word == "LR" || word == "uR" || word == "UR" || word == "u8R")) {
            lex_raw_string_tail();
            return {TokKind::Str, begin, pos_};
        }
        return {TokKind::Ident, begin, pos_};
    }

    void lex_raw_string_tail() {
        ++pos_; // opening quote
        std::string delim;
        while (pos_ < text_.size() && text_[pos_] != '(') {
            delim += text_[pos_++];
        }
        if (pos_ < text_.size()) {
            ++pos_; // opening paren
        }
        std::string closer = ")" + delim + "\"";
        std::size_t found = text_.find(closer, pos_);
        pos_ = found == std::string::npos ? text_.size() : found + closer.size();
    }

    const std::string& text_;
    Language lang_;
    std::size_t pos_ = 0;
};

const std::unordered_set<std::string>& declarator_guards() {
    static const std::unordered_set<std::string> guards = {
        "if", "else", "for", "while", "do", "switch", "return", "sizeof", "alignof",
        "alignas", "typeid", "noexcept", "decltype", "throw", "catch", "new", "delete",
        "static_assert", "_Static_assert", "asm", "__asm", "__asm__", "__attribute__",
        "__declspec", "defined", "case", "goto", "int", "char", "long", "short", "float",
        "double", "void", "signed", "unsigned", "bool", "_Bool", "auto", "const",
        "volatile", "static", "extern", "register", "inline", "typedef", "struct",
        "union", "enum", "class", "typename", "constexpr", "consteval", "constinit",
        "mutable", "thread_local", "wchar_t", "char8_t", "char16_t", "char32_t",
        "friend", "virtual", "explicit", "using", "namespace", "template", "requires",
        "concept", "co_await", "co_yield", "co_return", "restrict", "__restrict"};
    return guards;
}

class Scanner {
public:
    Scanner(const SourceFile& src, FileContext& out)
        : text_(src.text), out_(out) {
        toks_ = Lexer(src.text, src.language).run();
    }

    void run() {
        std::size_t i = parse_region(0, false, false, false);
        if (i != toks_.size()) {
            throw Error(errkind::ParseFailure,
                        pos_msg("unexpected closing brace", toks_[i].begin));
        }
        int ordinal = 0;
        for (auto& fn : out_.functions) {
            fn.ordinal = ++ordinal;
        }
    }

private:
    std::string pos_msg(const std::string& what, std::size_t byte) const {
        std::size_t line = 1;
        for (std::size_t i = 0; i < byte && i < text_.size(); ++i) {
            if (text_[i] == '\n') {
                ++line;
            }
        }
        return what + " at " + out_.file.path.string() + ":" + std::to_string(line);
    }

    bool is_punct(std::size_t i, char c) const {
        return i < toks_.size() && toks_[i].kind == TokKind::Punct && text_[toks_[i].begin] == c;
    }

    bool is_ident(std::size_t i, const std::string& word) const {
        return i < toks_.size() && toks_[i].kind == TokKind::Ident &&
               tok_text(i) == word;
    }

    std::string tok_text(std::size_t i) const {
        const Token& t = toks_[i];
        return text_.substr(t.begin, t.end - t.begin);
    }

    void emit_header(const Token& t) {
        out_.headers.push_back({{t.begin, t.end}, text_.substr(t.begin, t.end - t.begin)});
    }

    void emit_global(std::size_t begin, std::size_t end) {
        out_.globals.push_back({{begin, end}, text_.substr(begin, end - begin)});
    }

    void emit_function(std::size_t begin, std::size_t sig_end, std::size_t end,
                       const std::string& name, bool in_namespace, bool in_extern_c) {
        FunctionDef fn;
        fn.name = name;
        fn.qualified_signature = util::trim(text_.substr(begin, sig_end - begin));
        fn.body_span = {begin, end};
        fn.body_text = text_.substr(begin, end - begin);
        fn.in_namespace = in_namespace;
        fn.in_extern_c = in_extern_c;
        out_.functions.push_back(std::move(fn));
    }

    static bool is_header_directive(const std::string& line) {
        std::size_t i = 1; // past '#'
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
        }
        return line.compare(i, 7, "include") == 0 || line.compare(i, 6, "import") == 0;
    }

    // Consumes items until end of tokens or, when stop_at_brace is set, until a
    // closing brace is left for the caller. Returns the index it stopped at.
    std::size_t parse_region(std::size_t i, bool in_namespace, bool in_extern_c,
                             bool stop_at_brace) {
        while (i < toks_.size()) {
            if (is_punct(i, '}')) {
                if (stop_at_brace) {
                    return i;
                }
                emit_global(toks_[i].begin, toks_[i].end);
                ++i;
                continue;
            }
            if (toks_[i].kind == TokKind::Preproc) {
                std::string line = tok_text(i);
                if (is_header_directive(line)) {
                    emit_header(toks_[i]);
                } else {
                    emit_global(toks_[i].begin, toks_[i].end);
                }
                ++i;
                continue;
            }
            i = scan_item(i, in_namespace, in_extern_c);
        }
        if (stop_at_brace) {
            throw Error(errkind::ParseFailure, "unterminated block at end of file");
        }
        return i;
    }

    std::size_t scan_item(std::size_t i, bool in_namespace, bool in_extern_c) {
        std::size_t start = toks_[i].begin;

        // namespace N { ... }  /  inline namespace { ... }
        std::size_t j = i;
        if (is_ident(j, "inline") && is_ident(j + 1, "namespace")) {
            ++j;
        }
        if (is_ident(j, "namespace")) {
            std::size_t k = j + 1;
            while (k < toks_.size() &&
                   (toks_[k].kind == TokKind::Ident || is_punct(k, ':') ||
                    is_punct(k, '[') || is_punct(k, ']'))) {
                ++k;
            }
            if (is_punct(k, '{')) {
                emit_global(start, toks_[k].end);
                std::size_t after = parse_region(k + 1, true, in_extern_c, true);
                emit_global(toks_[after].begin, toks_[after].end);
                return after + 1;
            }
        }

        // extern "C" { ... }  or  extern "C" declaration
        bool item_extern_c = false;
        if (is_ident(i, "extern") && i + 1 < toks_.size() &&
            toks_[i + 1].kind == TokKind::Str) {
            if (is_punct(i + 2, '{')) {
                emit_global(start, toks_[i + 2].end);
                std::size_t after = parse_region(i + 3, in_namespace, true, true);
                emit_global(toks_[after].begin, toks_[after].end);
                return after + 1;
            }
            item_extern_c = true;
        }

        return scan_declaration(i, start, in_namespace, in_extern_c || item_extern_c);
    }

    std::size_t scan_declaration(std::size_t i, std::size_t start, bool in_namespace,
                                 bool in_extern_c) {
        std::size_t j = i;
        while (is_ident(j, "template") && is_punct(j + 1, '<')) {
            j = skip_angles(j + 1);
        }

        bool saw_eq = false;
        bool saw_colon = false;
        bool have_candidate = false;
        std::string candidate;

        // Parens and braces are consumed wholesale, so every case below runs at
        // nesting depth zero.
        while (j < toks_.size()) {
            const Token& tok = toks_[j];
            if (tok.kind == TokKind::Preproc) {
                ++j;
                continue;
            }
            if (tok.kind != TokKind::Punct) {
                ++j;
                continue;
            }
            char c = text_[tok.begin];
            switch (c) {
            case '(': {
                if (!saw_colon) {
                    auto name = declarator_name_before(j, i);
                    if (name) {
                        candidate = *name;
                        have_candidate = true;
                    }
                }
                j = skip_parens(j);
                continue;
            }
            case '=':
                if (!equals_in_operator_name(j)) {
                    saw_eq = true;
                }
                ++j;
                continue;
            case ':':
                if (is_punct(j + 1, ':') || (j > i && is_punct(j - 1, ':'))) {
                    ++j;
                    continue;
                }
                saw_colon = true;
                ++j;
                continue;
            case ';':
                emit_global(start, tok.end);
                return j + 1;
            case '{': {
                if (have_candidate && !saw_eq) {
                    std::size_t sig_end = tok.begin;
                    std::size_t after = skip_braces(j);
                    while (is_ident(after, "catch") && is_punct(after + 1, '(')) {
                        after = skip_parens(after + 1);
                        if (!is_punct(after, '{')) {
                            break;
                        }
                        after = skip_braces(after);
                    }
                    emit_function(start, sig_end, toks_[after - 1].end, candidate,
                                  in_namespace, in_extern_c);
                    return after;
                }
                j = skip_braces(j);
                continue;
            }
            case '}':
                // Stray close: finish the current item before it.
                emit_global(start, toks_[j - 1].end);
                return j;
            default:
                ++j;
                continue;
            }
        }
        emit_global(start, toks_.back().end);
        return j;
    }

    // An `=` that trails the operator keyword (operator=, operator+=, ...)
    // spells a function name, not an initializer. C has no operator functions,
    // so there the word stays an ordinary identifier.
    bool equals_in_operator_name(std::size_t j) const {
        if (out_.file.language != Language::Cpp) {
            return false;
        }
        std::size_t m = j;
        int steps = 0;
        while (m > 0 && toks_[m - 1].kind == TokKind::Punct && steps < 3) {
            --m;
            ++steps;
        }
        return m > 0 && is_ident(m - 1, "operator");
    }

    // Walks back from the opening paren at index j to find a declarator name.
    // Returns nullopt when the preceding tokens cannot name a function.
    std::optional<std::string> declarator_name_before(std::size_t j, std::size_t item_begin) {
        if (j == item_begin) {
            return std::nullopt;
        }
        std::size_t k = j - 1;
        if (toks_[k].kind == TokKind::Punct) {
            // operator symbol, e.g. operator<< or operator()
            std::size_t m = k;
            int steps = 0;
            while (m > item_begin && toks_[m].kind == TokKind::Punct && steps < 6) {
                --m;
                ++steps;
            }
            if (is_ident(m, "operator")) {
                return normalize_name(toks_[m].begin, toks_[j].begin);
            }
            return std::nullopt;
        }
        if (toks_[k].kind != TokKind::Ident) {
            return std::nullopt;
        }
        std::string word = tok_text(k);
        if (declarator_guards().count(word)) {
            // Conversion operator: built-in type names after `operator`.
            std::size_t m = k;
            while (m > item_begin && toks_[m - 1].kind == TokKind::Ident) {
                --m;
                if (is_ident(m, "operator")) {
                    return normalize_name(toks_[m].begin, toks_[j].begin);
                }
            }
            return std::nullopt;
        }
        std::size_t last = k;
        std::size_t first = k;
        if (first > item_begin && is_punct(first - 1, '~')) {
            --first;
        }
        while (true) {
            if (first >= item_begin + 2 && is_punct(first - 1, ':') && is_punct(first - 2, ':')) {
                std::size_t q = first - 3;
                if (q + 1 > item_begin && toks_[q].kind == TokKind::Ident) {
                    first = q;
                    continue;
                }
                if (q + 1 > item_begin && is_punct(q, '>')) {
                    int depth = 1;
                    std::size_t r = q;
                    while (r > item_begin && depth > 0) {
                        --r;
                        if (is_punct(r, '>')) {
                            ++depth;
                        } else if (is_punct(r, '<')) {
                            --depth;
                        }
                    }
                    if (depth == 0 && r > item_begin && toks_[r - 1].kind == TokKind::Ident) {
                        first = r - 1;
                        continue;
                    }
                }
            }
            break;
        }
        if (first > item_begin && is_ident(first - 1, "operator")) {
            --first;
        }
        return normalize_name(toks_[first].begin, toks_[last].end);
    }

    std::string normalize_name(std::size_t begin, std::size_t end) {
        std::string slice = util::collapse_ws(text_.substr(begin, end - begin));
        std::string out;
        for (std::size_t i = 0; i < slice.size(); ++i) {
            if (slice[i] == ' ') {
                char prev = out.empty() ? '\0' : out.back();
                char next = i + 1 < slice.size() ? slice[i + 1] : '\0';
                auto tight = [](char c) {
                    return c == ':' || c == '<' || c == '>' || c == '~' || c == ',' ||
                           c == '*' || c == '&';
                };
                if (tight(prev) || tight(next)) {
                    continue;
                }
            }
            out += slice[i];
        }
        return out;
    }

    std::size_t skip_parens(std::size_t j) {
        int depth = 0;
        while (j < toks_.size()) {
            if (is_punct(j, '(')) {
                ++depth;
            } else if (is_punct(j, ')')) {
                if (--depth == 0) {
                    return j + 1;
                }
            }
            ++j;
        }
        throw Error(errkind::ParseFailure, "unbalanced parentheses at end of file");
    }

    std::size_t skip_braces(std::size_t j) {
        int depth = 0;
        while (j < toks_.size()) {
            if (is_punct(j, '{')) {
                ++depth;
            } else if (is_punct(j, '}')) {
                if (--depth == 0) {
                    return j + 1;
                }
            }
            ++j;
        }
        throw Error(errkind::ParseFailure, "unbalanced braces at end of file");
    }

    // Skips a balanced <...> starting at toks_[j] == '<'. Angle brackets inside
    // parentheses do not count toward the template nesting.
    std::size_t skip_angles(std::size_t j) {
        int angle = 0;
        int paren = 0;
        while (j < toks_.size()) {
            if (is_punct(j, '(')) {
                ++paren;
            } else if (is_punct(j, ')')) {
                --paren;
            } else if (paren == 0 && is_punct(j, '<')) {
                ++angle;
            } else if (paren == 0 && is_punct(j, '>')) {
                if (--angle == 0) {
                    return j + 1;
                }
            }
            ++j;
        }
        throw Error(errkind::ParseFailure, "unbalanced template brackets at end of file");
    }

    const std::string& text_;
    FileContext& out_;
    std::vector<Token> toks_;
};

} // namespace

FileContext parse_file(const SourceFile& src) {
    FileContext ctx;
    ctx.file = src;
    Scanner(src, ctx).run();
    return ctx;
}

FileContext parse_source(const std::string& text, Language lang,
                         const std::filesystem::path& path) {
    return parse_file(SourceFile{path, lang, text});
}

std::string reconstruct(const FileContext& ctx) {
    struct Piece {
        Span span;
        const std::string* text;
    };
    std::vector<Piece> pieces;
    for (const auto& h : ctx.headers) {
        pieces.push_back({h.span, &h.text});
    }
    for (const auto& g : ctx.globals) {
        pieces.push_back({g.span, &g.text});
    }
    for (const auto& f : ctx.functions) {
        pieces.push_back({f.body_span, &f.body_text});
    }
    std::sort(pieces.begin(), pieces.end(),
              [](const Piece& a, const Piece& b) { return a.span.begin < b.span.begin; });

    const std::string& original = ctx.file.text;
    std::string out;
    out.reserve(original.size());
    std::size_t cursor = 0;
    for (const auto& piece : pieces) {
        if (piece.span.begin < cursor || piece.span.end > original.size()) {
            throw Error(errkind::ParseFailure, "overlapping spans in context");
        }
        if (piece.text->size() != piece.span.end - piece.span.begin) {
            throw Error(errkind::ParseFailure, "span does not match stored text");
        }
        out.append(original, cursor, piece.span.begin - cursor);
        out.append(*piece.text);
        cursor = piece.span.end;
    }
    out.append(original, cursor, original.size() - cursor);
    return out;
}

} // namespace codemorph
