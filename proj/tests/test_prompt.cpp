#include <doctest.h>

#include "codemorph/error.hpp"
#include "codemorph/extractor.hpp"
#include "codemorph/prompt.hpp"
#include "codemorph/strategies.hpp"
#include "codemorph/util.hpp"

#include "test_support.hpp"

#include <cstdlib>
#include <string>
#include <vector>

using namespace codemorph;

namespace {

void check_golden(const std::string& name, const std::string& text) {
    auto path = testsup::data_dir() / "goldens" / name;
    if (std::getenv("GOLDEN_REGEN")) {
        std::filesystem::create_directories(path.parent_path());
        util::write_file(path, text);
        return;
    }
    INFO("golden file: " << path.string());
    REQUIRE(std::filesystem::exists(path));
    CHECK(util::read_file(path) == text);
}

FileContext corpus_ctx(const std::string& name) {
    return testsup::parse_fixture(testsup::data_dir() / "corpus" / name);
}

PromptBundle prompt_for(const std::string& file, const std::string& strategy,
                        const std::string& function) {
    FileContext ctx = corpus_ctx(file);
    const FunctionDef* fn = ctx.find_function(function);
    REQUIRE(fn != nullptr);
    return gen_prompt(get_strategy(strategy), {*fn}, ctx);
}

} // namespace

TEST_CASE("estimate_tokens is ceil(bytes / 4)") {
    CHECK(estimate_tokens("") == 0);
    CHECK(estimate_tokens("a") == 1);
    CHECK(estimate_tokens("ab") == 1);
    CHECK(estimate_tokens("abc") == 1);
    CHECK(estimate_tokens("abcd") == 1);
    CHECK(estimate_tokens("abcde") == 2);
    CHECK(estimate_tokens(std::string(4096, 'x')) == 1024);
    CHECK(estimate_tokens(std::string(4097, 'x')) == 1025);
}

TEST_CASE("system prompt is fixed and the bundle carries its metadata") {
    PromptBundle bundle = prompt_for("str_util.c", "optimization", "str_trim_right");
    CHECK(bundle.system_text ==
          "You are an intelligent coding assistant who is expert in writing, editing, "
          "refactoring and debugging code. You listen to exact instructions and specialize "
          "in systems programming and use of C, C++ and C# languages with Windows platforms");
    CHECK(bundle.strategy == "optimization");
    CHECK(bundle.language == Language::C);
    CHECK(bundle.target_names == std::vector<std::string>{"str_trim_right"});
    CHECK(bundle.token_estimate ==
          estimate_tokens(bundle.system_text) + estimate_tokens(bundle.user_text));
}

TEST_CASE("the five landmark phrases appear in composition order") {
    PromptBundle bundle = prompt_for("str_util.c", "optimization", "str_trim_right");
    std::string all = render_prompt_file(bundle);
    const std::vector<std::string> landmarks = {
        "You are an intelligent coding assistant",
        "GENERATE one VARIANT of each of these functions: ***",
        "REMEMBER, the generated code MUST MAINTAIN the same FUNCTIONALITY",
        "These CRUCIAL instructions below MUST ALWAYS BE FOLLOWED",
        "Here is the code : ",
    };
    std::size_t cursor = 0;
    for (const auto& phrase : landmarks) {
        CAPTURE(phrase);
        std::size_t at = all.find(phrase, cursor);
        REQUIRE(at != std::string::npos);
        cursor = at + phrase.size();
    }
}

TEST_CASE("sections join with one blank line and the intro keeps its trailing space") {
    FileContext ctx = corpus_ctx("str_util.c");
    const FunctionDef* fn = ctx.find_function("str_skip_ws");
    REQUIRE(fn != nullptr);
    StrategySpec strategy = get_strategy("quality");
    PromptBundle bundle = gen_prompt(strategy, {*fn}, ctx);

    // The intro ends with ": " directly before the joiner, so the strategy
    // fragment is preceded by "instructions: \n\n".
    std::size_t at = bundle.user_text.find("following these instructions: \n\n");
    REQUIRE(at != std::string::npos);
    CHECK(bundle.user_text.compare(at + 32, strategy.fragment.size(), strategy.fragment) == 0);

    // Exactly one blank line between the fragment and the preserve section.
    CHECK(bundle.user_text.find(strategy.fragment + "\n\nREMEMBER, the generated code") !=
          std::string::npos);

    // Target names are wrapped in *** and suffixed with ().
    CHECK(bundle.user_text.find("***str_skip_ws()***") != std::string::npos);
}

TEST_CASE("code section stitches headers, globals, then target bodies") {
    FileContext ctx = corpus_ctx("queue.c");
    const FunctionDef* push = ctx.find_function("queue_push");
    REQUIRE(push != nullptr);
    PromptBundle bundle = gen_prompt(get_strategy("windowsapi"), {*push}, ctx);

    std::string expected = "Here is the code : \n";
    expected += "#include <stdlib.h>";
    expected += "\n\n";
    expected += "#include <string.h>";
    expected += "\n\n";
    expected += ctx.globals[0].text;
    expected += "\n\n";
    expected += ctx.globals[1].text;
    expected += "\n\n";
    expected += push->body_text;

    REQUIRE(bundle.user_text.size() >= expected.size());
    CHECK(bundle.user_text.substr(bundle.user_text.size() - expected.size()) == expected);
    // Only the requested body is included, not the other four.
    CHECK(bundle.user_text.find("void queue_init") == std::string::npos);
    CHECK(bundle.user_text.find("int queue_size") == std::string::npos);
}

TEST_CASE("multiple targets are sorted by ordinal and counted") {
    FileContext ctx = corpus_ctx("queue.c");
    const FunctionDef* size = ctx.find_function("queue_size");
    const FunctionDef* init = ctx.find_function("queue_init");
    REQUIRE(size != nullptr);
    REQUIRE(init != nullptr);
    // Pass them in reverse document order; the prompt must restore it.
    PromptBundle bundle = gen_prompt(get_strategy("security"), {*size, *init}, ctx);
    CHECK(bundle.target_names == std::vector<std::string>{"queue_init", "queue_size"});
    CHECK(bundle.user_text.find("and 2 global function definition(s)") != std::string::npos);
    CHECK(bundle.user_text.find("***queue_init(), queue_size()***") != std::string::npos);
    CHECK(bundle.user_text.find("Modify ONLY the 2 free/global function(s)") !=
          std::string::npos);
    std::size_t init_at = bundle.user_text.find("void queue_init");
    std::size_t size_at = bundle.user_text.find("int queue_size");
    REQUIRE(init_at != std::string::npos);
    REQUIRE(size_at != std::string::npos);
    CHECK(init_at < size_at);
}

TEST_CASE("language selects the fenced example and the fence tag") {
    PromptBundle c_bundle = prompt_for("str_util.c", "optimization", "str_trim_right");
    CHECK(c_bundle.user_text.find("```c  ```") != std::string::npos);
    CHECK(c_bundle.user_text.find("#include <stdio.h>") != std::string::npos);
    CHECK(c_bundle.user_text.find("printf(\"%d\", a);") != std::string::npos);

    PromptBundle cpp_bundle = prompt_for("logger.cpp", "obfuscation", "write_line");
    CHECK(cpp_bundle.user_text.find("```cpp  ```") != std::string::npos);
    CHECK(cpp_bundle.user_text.find("#include<iostream>") != std::string::npos);
    CHECK(cpp_bundle.user_text.find("cout << a <<endl;") != std::string::npos);
    CHECK(cpp_bundle.user_text.find("from a cpp source code file") != std::string::npos);
    CHECK(c_bundle.user_text.find("from a c source code file") != std::string::npos);
}

TEST_CASE("prompt errors") {
    FileContext ctx = corpus_ctx("str_util.c");
    CHECK(testsup::thrown_kind([&] { gen_prompt(get_strategy("quality"), {}, ctx); }) ==
          "EmptyTargets");

    FunctionDef ghost;
    ghost.name = "not_in_file";
    ghost.ordinal = 1;
    CHECK(testsup::thrown_kind([&] { gen_prompt(get_strategy("quality"), {ghost}, ctx); }) ==
          "TargetNotFound");

    PromptOptions tiny;
    tiny.model_window = 10;
    const FunctionDef* fn = ctx.find_function("str_to_upper");
    REQUIRE(fn != nullptr);
    CHECK(testsup::thrown_kind([&] { gen_prompt(get_strategy("quality"), {*fn}, ctx, tiny); }) ==
          "ContextOverflow");
}

TEST_CASE("render_prompt_file is system text, blank line, user text") {
    PromptBundle bundle = prompt_for("str_util.c", "reusability", "str_count_char");
    std::string rendered = render_prompt_file(bundle);
    CHECK(rendered == bundle.system_text + "\n\n" + bundle.user_text);
}

TEST_CASE("full prompts match their frozen goldens") {
    check_golden("prompt_str_util_optimization.txt",
                 render_prompt_file(prompt_for("str_util.c", "optimization", "str_trim_right")));
    check_golden("prompt_logger_obfuscation.txt",
                 render_prompt_file(prompt_for("logger.cpp", "obfuscation", "write_line")));
    check_golden("prompt_queue_windowsapi.txt",
                 render_prompt_file(prompt_for("queue.c", "windowsapi", "queue_push")));
}
