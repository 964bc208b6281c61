#include "codemorph/prompt.hpp"

#include "codemorph/error.hpp"

#include <algorithm>

namespace codemorph {

namespace {

constexpr const char* kSystemPrompt =
    "You are an intelligent coding assistant who is expert in writing, editing, "
    "refactoring and debugging code. You listen to exact instructions and specialize "
    "in systems programming and use of C, C++ and C# languages with Windows platforms";

std::string joined_names(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) {
            out += ", ";
        }
        out += names[i];
        out += "()";
    }
    return out;
}

std::string intro_section(int count, const std::string& lang, const std::string& names) {
    return "Below this prompt you are provided headers, global variables, class and struct "
           "definitions and " +
           std::to_string(count) + " global function definition(s) from a " + lang +
           " source code file. The parameters of the functions also have specific types. As "
           "an intelligent coding assistant, GENERATE one VARIANT of each of these "
           "functions: ***" +
           names + "*** following these instructions: ";
}

std::string preserve_section(int count, const std::string& names) {
    std::string n = std::to_string(count);
    return "REMEMBER, the generated code MUST MAINTAIN the same FUNCTIONALITY as the "
           "original code. Keep the usage of globally declared variables as it is. Modify "
           "ONLY the " +
           n + " free/global function(s) named ***" + names +
           "***. If you find any custom functions/custom structure/class objects/custom "
           "types/custom variables that are used inside the given " +
           n +
           " function(s) but not in the provided code snippet, you can safely assume that "
           "these are defined elsewhere and you should use them in your generated code as "
           "it is. DO NOT modify the names of these and do not redefine them.";
}

std::string example_block(Language lang) {
    if (lang == Language::C) {
        return "            ```c\n"
               "\n"
               "            #include <stdio.h>\n"
               "\n"
               "            int func(int a) {\n"
               "                    printf(\"%d\", a);\n"
               "                    return a + 1;\n"
               "                }\n"
               "\n"
               "            ```";
    }
    return "            ```cpp\n"
           "\n"
           "            #include<iostream>\n"
           "\n"
           "            int func(int a) {\n"
           "                    cout << a <<endl;\n"
           "                    return a + 1;\n"
           "                }\n"
           "\n"
           "            ```";
}

std::string additional_section(Language lang, const std::string& lang_name,
                               const std::string& names) {
    std::string tag = "```" + lang_name + "  ```";
    std::string out;
    out += "These CRUCIAL instructions below MUST ALWAYS BE FOLLOWED while generating "
           "variants:\n";
    out += "1. You MUST NOT regenerate the extra information I provided to you such as "
           "headers, global variables, structs and classes for context.\n";
    out += "2. If you modify the functions ***" + names +
           "***, you MUST NOT regenerate the original code. But if a function cannot be "
           "changed, then include the original code.\n";
    out += "3. ONLY generate the function variants and any new headers/libraries you "
           "used.\n";
    out += "4. You MUST NOT generate any extra natural language messages/comments.\n";
    out += "5. You MUST Generate all the modified functions within a single " + tag +
           " tag. For example your response should look like this for one generated "
           "function named `int func(int a)`:\n";
    out += "\n";
    out += example_block(lang) + "\n";
    out += "            \n";
    out += "Remember, if you have generated multiple functions, you should include all of "
           "them within the same " +
           tag + " tag.\n";
    out += "6. Use the global variables as they are inside your generated functions and do "
           "not change/redeclare the global variables.\n";
    out += "7. Always complete the function that you generate. Make sure to fill up the "
           "function body with the appropriate code. DO NOT leave any function "
           "incomplete.\n";
    out += "\n";
    out += "8. DO NOT change the function name, return type, parameters and their types, "
           "or the name and number of parameters of the original functions while "
           "generating variants.";
    return out;
}

std::string code_section(const FileContext& ctx, const std::vector<FunctionDef>& targets) {
    std::vector<std::string> pieces;
    for (const auto& h : ctx.headers) {
        pieces.push_back(h.text);
    }
    for (const auto& g : ctx.globals) {
        pieces.push_back(g.text);
    }
    for (const auto& fn : targets) {
        pieces.push_back(fn.body_text);
    }
    std::string out = "Here is the code : \n";
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (i) {
            out += "\n\n";
        }
        out += pieces[i];
    }
    return out;
}

} // namespace

int estimate_tokens(const std::string& text) {
    return static_cast<int>((text.size() + 3) / 4);
}

PromptBundle gen_prompt(const StrategySpec& strategy, const std::vector<FunctionDef>& targets,
                        const FileContext& ctx, const PromptOptions& opts) {
    if (targets.empty()) {
        throw Error(errkind::EmptyTargets, "gen_prompt needs at least one target");
    }
    std::vector<FunctionDef> ordered = targets;
    std::sort(ordered.begin(), ordered.end(),
              [](const FunctionDef& a, const FunctionDef& b) { return a.ordinal < b.ordinal; });

    for (const auto& fn : ordered) {
        const FunctionDef* here = nullptr;
        for (const auto& candidate : ctx.functions) {
            if (candidate.ordinal == fn.ordinal && candidate.name == fn.name) {
                here = &candidate;
                break;
            }
        }
        if (!here) {
            throw Error(errkind::TargetNotFound,
                        fn.name + " is not a function of " + ctx.file.path.string());
        }
    }

    std::vector<std::string> names;
    for (const auto& fn : ordered) {
        names.push_back(fn.name);
    }
    std::string name_list = joined_names(names);
    std::string lang = language_name(ctx.file.language);
    int count = static_cast<int>(ordered.size());

    PromptBundle bundle;
    bundle.system_text = kSystemPrompt;
    bundle.user_text = intro_section(count, lang, name_list);
    bundle.user_text += "\n\n" + strategy.fragment;
    bundle.user_text += "\n\n" + preserve_section(count, name_list);
    bundle.user_text += "\n\n" + additional_section(ctx.file.language, lang, name_list);
    bundle.user_text += "\n\n" + code_section(ctx, ordered);
    bundle.target_names = names;
    bundle.strategy = strategy.name;
    bundle.language = ctx.file.language;
    bundle.token_estimate = estimate_tokens(bundle.system_text) + estimate_tokens(bundle.user_text);

    if (bundle.token_estimate > opts.model_window) {
        throw Error(errkind::ContextOverflow,
                    "prompt estimate " + std::to_string(bundle.token_estimate) +
                        " exceeds model window " + std::to_string(opts.model_window));
    }
    return bundle;
}

std::string render_prompt_file(const PromptBundle& bundle) {
    return bundle.system_text + "\n\n" + bundle.user_text;
}

} // namespace codemorph
