#include "codemorph/strategies.hpp"

#include "codemorph/error.hpp"
#include "codemorph/util.hpp"

namespace codemorph {

namespace {

std::vector<StrategySpec> build_catalog() {
    std::vector<StrategySpec> catalog;

    catalog.push_back({StrategyId::Optimization, "optimization", "Code Optimization",
                       R"(1. Remove code redundancies.
2. Identify performance bottlenecks and fix them.
3. Simplify the code's logic or structure and optimize data structures and algorithms if applicable.
4. Use language-specific features or modern libraries if applicable.)"});

    catalog.push_back({StrategyId::Quality, "quality", "Code Quality and Reliability",
                       R"(1. Check error handling and edge cases.
2. Follow coding practices and style guidelines.
3. Add proper documentation to classes and functions, and comments for complex parts.)"});

    catalog.push_back({StrategyId::Reusability, "reusability", "Code Reusability",
                       R"(Make the code reusable by dividing supplied functions into smaller function blocks if and where applicable. The smaller functions should be called inside the respective supplied functions as needed.)"});

    catalog.push_back({StrategyId::Security, "security", "Code Security",
                       R"(1. Identify security vulnerabilities and fix them.
2. If the function you are modifying contains cryptographic operations, change the cryptographic library used for those operations. If no cryptographic operations are present, no changes are necessary.
3. Follow secure coding standards and guidelines.)"});

    catalog.push_back({StrategyId::Obfuscation, "obfuscation", "Code Obfuscation",
                       R"(1. Change the given function's and LOCAL variable's names to meaningless, hard-to-understand strings which are not real words. DO NOT redefine or rename global variables (given to you) and names of functions that are called inside the given function ( might be defined elsewhere ) under any circumstances.
However if the given function name is any of `main`, `wmain`, `WinMain`, `wWinMain`, `DllMain`, `_tWinMain`, `_tmain` do not change it's name, only change the local variable's names inside the function.
2. Add unnecessary jump instructions, loops, and conditional statements inside the functions.
3. Add unnecessary functions and call those functions inside the original functions.
4. Add anti-debugging techniques to the code.
5. If there are loops/conditional statements in the code change them to their equivalent alternatives and make them more difficult to follow.
6. Incorporate code to the variants that activates under very rare and obscure cases without altering core functionality, making the rare code hard to detect during testing.)"});

    catalog.push_back({StrategyId::WindowsAPI, "windowsapi", "Windows API-Specific Transformation",
                       R"(1. Identify all Windows API function calls in the given functions.
2. If there are such function calls, replace each identified Windows API function call with an alternative Windows API function call or sequence of calls that achieves the same task.
3. If applicable, use indirect methods or wrappers around the Windows API calls to achieve the same functionality.
4. Ensure that the functionality remains the same after the replacement.)"});

    return catalog;
}

} // namespace

const std::vector<StrategySpec>& strategy_catalog() {
    static const std::vector<StrategySpec> catalog = build_catalog();
    return catalog;
}

const StrategySpec& get_strategy(StrategyId id) {
    for (const auto& spec : strategy_catalog()) {
        if (spec.id == id) {
            return spec;
        }
    }
    throw Error(errkind::UnknownStrategy, "id outside the catalog");
}

const StrategySpec& get_strategy(const std::string& name) {
    auto needle = util::to_lower(util::trim(name));
    for (const auto& spec : strategy_catalog()) {
        if (spec.name == needle) {
            return spec;
        }
    }
    throw Error(errkind::UnknownStrategy, name);
}

void StrategyRegistry::add_custom(const std::string& name, const std::string& fragment) {
    auto token = util::to_lower(util::trim(name));
    if (token.empty() || fragment.empty()) {
        throw Error(errkind::ConfigError, "custom strategy needs a name and a fragment");
    }
    for (const auto& spec : strategy_catalog()) {
        if (spec.name == token) {
            throw Error(errkind::ConfigError, "custom strategy shadows built-in: " + token);
        }
    }
    for (const auto& spec : custom) {
        if (spec.name == token) {
            throw Error(errkind::ConfigError, "duplicate custom strategy: " + token);
        }
    }
    StrategySpec spec;
    spec.name = token;
    spec.title = name;
    spec.fragment = fragment;
    spec.custom = true;
    custom.push_back(std::move(spec));
}

StrategySpec StrategyRegistry::resolve(const std::string& name) const {
    auto needle = util::to_lower(util::trim(name));
    for (const auto& spec : strategy_catalog()) {
        if (spec.name == needle) {
            return spec;
        }
    }
    for (const auto& spec : custom) {
        if (spec.name == needle) {
            return spec;
        }
    }
    throw Error(errkind::UnknownStrategy, name);
}

std::vector<std::string> StrategyRegistry::known_names() const {
    std::vector<std::string> names;
    for (const auto& spec : strategy_catalog()) {
        names.push_back(spec.name);
    }
    for (const auto& spec : custom) {
        names.push_back(spec.name);
    }
    return names;
}

} // namespace codemorph
