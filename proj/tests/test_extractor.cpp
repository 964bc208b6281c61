#include <doctest.h>

#include "codemorph/error.hpp"
#include "codemorph/extractor.hpp"
#include "codemorph/util.hpp"

#include "test_support.hpp"

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

using namespace codemorph;
namespace fs = std::filesystem;

namespace {

struct CorpusExpectation {
    const char* file;
    Language language;
    std::size_t headers;
    std::size_t globals;
    std::vector<std::string> functions;
};

// One row per corpus fixture: counts and function names were tallied by hand
// from the files themselves.
const std::vector<CorpusExpectation>& corpus_table() {
    static const std::vector<CorpusExpectation> table = {
        {"args.c", Language::C, 3, 2, {"usage", "parse_flags", "main"}},
        {"bitset.c", Language::C, 2, 1,
         {"bitset_words", "bitset_set", "bitset_clear", "bitset_test", "bitset_popcount"}},
        {"crc32.c", Language::C, 2, 2, {"crc32_init", "crc32_update", "crc32_of"}},
        {"csv_split.c", Language::C, 2, 0, {"is_quote", "csv_split", "csv_unquote"}},
        {"file_copy.c", Language::C, 1, 1, {"copy_stream", "copy_file"}},
        {"ini_parse.c", Language::C, 3, 2, {"rstrip", "lskip", "ini_parse_stream"}},
        {"linked_list.c", Language::C, 2, 2,
         {"list_push", "list_find", "list_length", "list_clear"}},
        {"platform.c", Language::C, 2, 8, {"base_name", "report", "report", "path_depth"}},
        {"queue.c", Language::C, 2, 2,
         {"queue_init", "queue_push", "queue_pop", "queue_peek", "queue_size"}},
        {"sort_demo.c", Language::C, 2, 0,
         {"insertion_sort", "merge_halves", "msort_range", "merge_sort", "is_sorted"}},
        {"str_util.c", Language::C, 3, 0,
         {"str_trim_right", "str_skip_ws", "str_starts_with", "str_count_char",
          "str_to_upper"}},
        {"temp_conv.c", Language::C, 1, 0,
         {"c_to_f", "f_to_c", "c_to_k", "k_to_c", "print_table"}},
        {"vec_math.c", Language::C, 1, 3,
         {"vec_add", "vec_scale", "vec_dot", "vec_len", "vec_norm"}},
        {"conv_ops.cpp", Language::Cpp, 2, 1,
         {"operator double", "operator std::string", "operator+=", "operator+",
          "round_meters"}},
        {"extern_bridge.cpp", Language::Cpp, 3, 3,
         {"bridge_add_name", "bridge_count", "bridge_get", "bridge_join"}},
        {"logger.cpp", Language::Cpp, 4, 6, {"open_log", "write_line", "info", "warn"}},
        {"matrix.cpp", Language::Cpp, 2, 1,
         {"operator+", "operator*", "operator==", "det", "operator<<"}},
        {"optional_demo.cpp", Language::Cpp, 3, 1,
         {"env_get", "parse_port", "port_or_default"}},
        {"raw_str.cpp", Language::Cpp, 2, 1,
         {"make_record", "looks_like_ipv4", "brace_wrap"}},
        {"scoped_timer.cpp", Language::Cpp, 4, 1,
         {"ScopedTimer::ScopedTimer", "ScopedTimer::~ScopedTimer", "fib"}},
        {"shapes.cpp", Language::Cpp, 3, 3, {"Rect::Rect", "Rect::area", "total_area"}},
        {"string_pool.cpp", Language::Cpp, 3, 1,
         {"StringPool::intern", "StringPool::lookup", "pool_bytes"}},
        {"temp_cache.cpp", Language::Cpp, 4, 1,
         {"LruCache<K,V>::put", "LruCache<K,V>::get", "cache_demo"}},
        {"trycatch.cpp", Language::Cpp, 3, 0,
         {"checked_div", "safe_div", "describe", "sum_or_zero"}},
        {"word_count.cpp", Language::Cpp, 6, 2,
         {"normalize", "count_words", "print_counts", "main"}},
    };
    return table;
}

void check_span_invariants(const FileContext& ctx) {
    struct Ref {
        Span span;
        const std::string* text;
    };
    std::vector<Ref> pieces;
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
              [](const Ref& a, const Ref& b) { return a.span.begin < b.span.begin; });
    std::size_t cursor = 0;
    for (const auto& p : pieces) {
        CHECK(p.span.begin >= cursor);
        CHECK(p.span.end >= p.span.begin);
        CHECK(p.span.end <= ctx.file.text.size());
        CHECK(*p.text == ctx.file.text.substr(p.span.begin, p.span.end - p.span.begin));
        cursor = p.span.end;
    }
    for (std::size_t i = 0; i < ctx.functions.size(); ++i) {
        CHECK(ctx.functions[i].ordinal == static_cast<int>(i) + 1);
    }
}

} // namespace

TEST_CASE("corpus files round-trip byte for byte") {
    fs::path corpus = testsup::data_dir() / "corpus";
    std::size_t seen = 0;
    for (const auto& entry : fs::directory_iterator(corpus)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        ++seen;
        SourceFile src;
        src.path = entry.path().filename();
        src.language = language_from_extension(entry.path());
        src.text = util::read_file(entry.path());
        CAPTURE(src.path.string());
        FileContext ctx = parse_file(src);
        CHECK(reconstruct(ctx) == src.text);
        check_span_invariants(ctx);
    }
    CHECK(seen >= 20);
    CHECK(seen == corpus_table().size());
}

TEST_CASE("corpus files segment into the expected parts") {
    for (const auto& expect : corpus_table()) {
        CAPTURE(expect.file);
        FileContext ctx = testsup::parse_fixture(testsup::data_dir() / "corpus" / expect.file);
        CHECK(ctx.file.language == expect.language);
        CHECK(ctx.headers.size() == expect.headers);
        CHECK(ctx.globals.size() == expect.globals);
        REQUIRE(ctx.functions.size() == expect.functions.size());
        for (std::size_t i = 0; i < expect.functions.size(); ++i) {
            CHECK(ctx.functions[i].name == expect.functions[i]);
        }
    }
}

TEST_CASE("namespace and extern-C membership is tracked") {
    auto logger = testsup::parse_fixture(testsup::data_dir() / "corpus" / "logger.cpp");
    for (const auto& fn : logger.functions) {
        CAPTURE(fn.name);
        CHECK(fn.in_namespace);
        CHECK_FALSE(fn.in_extern_c);
    }

    auto wc = testsup::parse_fixture(testsup::data_dir() / "corpus" / "word_count.cpp");
    REQUIRE(wc.functions.size() == 4);
    CHECK(wc.functions[0].in_namespace);
    CHECK(wc.functions[1].in_namespace);
    CHECK(wc.functions[2].in_namespace);
    CHECK_FALSE(wc.functions[3].in_namespace);

    auto bridge = testsup::parse_fixture(testsup::data_dir() / "corpus" / "extern_bridge.cpp");
    REQUIRE(bridge.functions.size() == 4);
    CHECK(bridge.functions[0].in_extern_c); // extern "C" on the declaration itself
    CHECK(bridge.functions[1].in_extern_c); // extern "C" { ... } block
    CHECK(bridge.functions[2].in_extern_c);
    CHECK_FALSE(bridge.functions[3].in_extern_c);
    // The braces of the extern "C" block stay behind as globals.
    auto texts = bridge.global_texts();
    REQUIRE(texts.size() == 3);
    CHECK(texts[1] == "extern \"C\" {");
    CHECK(texts[2] == "}");
}

TEST_CASE("function-try-blocks and catch clauses belong to the function body") {
    auto ctx = testsup::parse_fixture(testsup::data_dir() / "corpus" / "trycatch.cpp");
    const FunctionDef* safe_div = ctx.find_function("safe_div");
    REQUIRE(safe_div != nullptr);
    CHECK(safe_div->qualified_signature == "int safe_div(int a, int b, int fallback) try");
    CHECK(safe_div->body_text.find("catch (const std::invalid_argument&)") != std::string::npos);
    CHECK(util::ends_with(util::trim(safe_div->body_text), "return fallback;\n}"));

    const FunctionDef* describe = ctx.find_function("describe");
    REQUIRE(describe != nullptr);
    CHECK(describe->body_text.find("catch (const std::out_of_range&)") != std::string::npos);
    CHECK(describe->body_text.find("catch (...)") != std::string::npos);
    CHECK(util::ends_with(util::trim(describe->body_text), "return \"<unknown>\";\n}"));

    // A try inside an ordinary body must not split the function.
    const FunctionDef* sum = ctx.find_function("sum_or_zero");
    REQUIRE(sum != nullptr);
    CHECK(sum->body_text.find("catch (const std::exception&)") != std::string::npos);
}

TEST_CASE("declarator names are normalized") {
    auto conv = testsup::parse_fixture(testsup::data_dir() / "corpus" / "conv_ops.cpp");
    CHECK(conv.find_function("operator double") != nullptr);
    CHECK(conv.find_function("operator std::string") != nullptr);
    CHECK(conv.find_function("operator+=") != nullptr);
    CHECK(conv.find_function("operator+") != nullptr);

    auto cache = testsup::parse_fixture(testsup::data_dir() / "corpus" / "temp_cache.cpp");
    CHECK(cache.find_function("LruCache<K,V>::put") != nullptr);
    CHECK(cache.find_function("LruCache<K,V>::get") != nullptr);

    auto timer = testsup::parse_fixture(testsup::data_dir() / "corpus" / "scoped_timer.cpp");
    CHECK(timer.find_function("ScopedTimer::~ScopedTimer") != nullptr);

    auto shapes = testsup::parse_fixture(testsup::data_dir() / "corpus" / "shapes.cpp");
    const FunctionDef* ctor = shapes.find_function("Rect::Rect");
    REQUIRE(ctor != nullptr);
    // The init list rides along in the signature, ahead of the body.
    CHECK(ctor->qualified_signature == "Rect::Rect(double w, double h) : w_(w), h_(h)");
    CHECK(shapes.find_function("Rect::area")->qualified_signature ==
          "double Rect::area() const");
}

TEST_CASE("bodies start at the declaration and include the whole definition") {
    auto ctx = parse_source("int add(int a, int b) {\n    return a + b;\n}\n", Language::C);
    REQUIRE(ctx.functions.size() == 1);
    const auto& fn = ctx.functions[0];
    CHECK(fn.name == "add");
    CHECK(fn.qualified_signature == "int add(int a, int b)");
    CHECK(fn.body_text == "int add(int a, int b) {\n    return a + b;\n}");
    CHECK(fn.body_span.begin == 0);
}

TEST_CASE("duplicate function names are preserved in document order") {
    auto ctx = testsup::parse_fixture(testsup::data_dir() / "corpus" / "platform.c");
    std::size_t reports = 0;
    for (const auto& fn : ctx.functions) {
        if (fn.name == "report") {
            ++reports;
        }
    }
    CHECK(reports == 2);
    // find_function returns the first match.
    const FunctionDef* first = ctx.find_function("report");
    REQUIRE(first != nullptr);
    CHECK(first->ordinal == 2);
}

TEST_CASE("classes stay globals while out-of-class methods become functions") {
    auto pool = testsup::parse_fixture(testsup::data_dir() / "corpus" / "string_pool.cpp");
    REQUIRE(pool.globals.size() == 1);
    CHECK(pool.globals[0].text.find("class StringPool") == 0);
    CHECK(pool.globals[0].text.find("size() const { return items_.size(); }") !=
          std::string::npos);
    CHECK(pool.find_function("size") == nullptr);

    auto cache = testsup::parse_fixture(testsup::data_dir() / "corpus" / "temp_cache.cpp");
    REQUIRE(cache.globals.size() == 1);
    CHECK(cache.globals[0].text.find("template <typename K, typename V>") == 0);
}

TEST_CASE("raw string literals do not confuse brace tracking") {
    auto ctx = testsup::parse_fixture(testsup::data_dir() / "corpus" / "raw_str.cpp");
    REQUIRE(ctx.globals.size() == 1);
    CHECK(ctx.globals[0].text.find("kJsonTemplate") != std::string::npos);
    CHECK(ctx.globals[0].text.find("\"ok\": true") != std::string::npos);
    REQUIRE(ctx.functions.size() == 3);
    CHECK(ctx.functions[0].name == "make_record");
}

TEST_CASE("headers capture include and import directives only") {
    auto ctx = testsup::parse_fixture(testsup::data_dir() / "corpus" / "queue.c");
    auto lines = ctx.header_lines();
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "#include <stdlib.h>");
    CHECK(lines[1] == "#include <string.h>");
    auto globals = ctx.global_texts();
    REQUIRE(globals.size() == 2);
    CHECK(globals[0] == "#define QUEUE_CAP 64");
    CHECK(globals[1].find("struct ring_queue {") == 0);
}

TEST_CASE("parse failures carry a useful kind and message") {
    auto kind_and_msg = [](const std::string& text, Language lang) {
        try {
            parse_source(text, lang);
        } catch (const Error& e) {
            return std::string(e.kind()) + "|" + e.what();
        }
        return std::string("<no error>");
    };
    CHECK(kind_and_msg("int f() {\n", Language::C).find("ParseFailure|") == 0);
    CHECK(kind_and_msg("int f() {\n", Language::C).find("unbalanced braces") !=
          std::string::npos);
    CHECK(kind_and_msg("namespace n {\nint x;\n", Language::Cpp).find("unterminated block") !=
          std::string::npos);
    CHECK(kind_and_msg("int f(;", Language::C).find("unbalanced parentheses") !=
          std::string::npos);
}

TEST_CASE("stray top-level closing brace is kept as a global") {
    auto ctx = parse_source("int f(void) { return 1; }\n}\n", Language::C);
    REQUIRE(ctx.functions.size() == 1);
    REQUIRE(ctx.globals.size() == 1);
    CHECK(ctx.globals[0].text == "}");
    CHECK(reconstruct(ctx) == "int f(void) { return 1; }\n}\n");
}

TEST_CASE("randomly generated sources round-trip and keep their planted functions") {
    std::mt19937 rng(424242);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<int> small(0, 3);

    for (int trial = 0; trial < 200; ++trial) {
        std::string text;
        std::vector<std::string> planted;
        int headers = small(rng);
        for (int h = 0; h < headers; ++h) {
            text += "#include <header_" + std::to_string(h) + ".h>\n";
        }
        if (coin(rng)) {
            text += "\n#define LIMIT " + std::to_string(small(rng)) + "\n";
        }
        if (coin(rng)) {
            text += "/* filler { comment } with \"quotes\" */\n";
        }
        if (coin(rng)) {
            text += "static int counter_" + std::to_string(trial) + " = 0;\n";
        }
        int fns = 1 + small(rng);
        for (int f = 0; f < fns; ++f) {
            std::string name = "fn_" + std::to_string(trial) + "_" + std::to_string(f);
            planted.push_back(name);
            text += "\nint " + name + "(int x) {\n";
            if (coin(rng)) {
                text += "    const char *s = \"brace { in string }\";\n    (void)s;\n";
            }
            if (coin(rng)) {
                text += "    if (x > 0) {\n        x--;\n    }\n";
            }
            text += "    return x + " + std::to_string(f) + ";\n}\n";
        }
        CAPTURE(trial);
        FileContext ctx = parse_source(text, Language::C);
        CHECK(reconstruct(ctx) == text);
        REQUIRE(ctx.functions.size() == planted.size());
        for (std::size_t i = 0; i < planted.size(); ++i) {
            CHECK(ctx.functions[i].name == planted[i]);
        }
    }
}

TEST_CASE("language helpers map names and extensions") {
    CHECK(language_from_extension("x.c") == Language::C);
    CHECK(language_from_extension("x.h") == Language::C);
    CHECK(language_from_extension("x.cpp") == Language::Cpp);
    CHECK(language_from_extension("x.cc") == Language::Cpp);
    CHECK(language_from_extension("x.hpp") == Language::Cpp);
    CHECK(std::string(language_name(Language::C)) == "c");
    CHECK(std::string(language_name(Language::Cpp)) == "cpp");
    CHECK(language_from_name("c") == Language::C);
    CHECK(language_from_name("cpp") == Language::Cpp);
    CHECK(language_from_name("C++") == Language::Cpp);
    CHECK(language_from_name("cxx") == Language::Cpp);
    CHECK(testsup::thrown_kind([] { language_from_name("fortran"); }) == "ManifestError");
}
