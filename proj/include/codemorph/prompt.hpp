#pragma once

#include "codemorph/source.hpp"
#include "codemorph/strategies.hpp"

#include <string>
#include <vector>

namespace codemorph {

struct PromptBundle {
    std::string system_text;
    std::string user_text;
    std::vector<std::string> target_names;
    std::string strategy;
    Language language = Language::C;
    int token_estimate = 0;
};

struct PromptOptions {
    int model_window = 32768; // tokens
};

// ceil(bytes / 4)
int estimate_tokens(const std::string& text);

// Composes the system and user prompts for transforming `targets` of `ctx`
// under `strategy`. Sections are joined with a single blank line in the fixed
// order: intro, strategy, preserve rules, additional constraints, code.
// Throws Error(EmptyTargets) when targets is empty and Error(ContextOverflow)
// when the estimate exceeds the model window.
PromptBundle gen_prompt(const StrategySpec& strategy, const std::vector<FunctionDef>& targets,
                        const FileContext& ctx, const PromptOptions& opts = {});

// Full prompt as written to the audit file: system text, blank line, user text.
std::string render_prompt_file(const PromptBundle& bundle);

} // namespace codemorph
