#pragma once

#include <string>
#include <vector>

namespace codemorph {

enum class StrategyId {
    Optimization,
    Quality,
    Reusability,
    Security,
    Obfuscation,
    WindowsAPI,
};

struct StrategySpec {
    StrategyId id = StrategyId::Optimization;
    std::string name;     // canonical lowercase token
    std::string title;    // display string
    std::string fragment; // verbatim prompt text, never templated
    bool custom = false;
};

// The six built-in strategies, in enum order.
const std::vector<StrategySpec>& strategy_catalog();

// Throws Error(UnknownStrategy) for ids/names outside the catalog.
const StrategySpec& get_strategy(StrategyId id);
const StrategySpec& get_strategy(const std::string& name);

// Case-insensitive lookup that also consults user-defined strategies.
struct StrategyRegistry {
    std::vector<StrategySpec> custom;

    void add_custom(const std::string& name, const std::string& fragment);
    StrategySpec resolve(const std::string& name) const;
    std::vector<std::string> known_names() const;
};

} // namespace codemorph
