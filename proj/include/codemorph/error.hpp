#pragma once

#include <stdexcept>
#include <string>

namespace codemorph {

// Error taxonomy shared across the pipeline. The kind string is stable and
// machine-checkable; the what() text carries human-readable detail.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(kind + ": " + message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

namespace errkind {
inline constexpr const char* ParseFailure = "ParseFailure";
inline constexpr const char* UnknownStrategy = "UnknownStrategy";
inline constexpr const char* EmptySelection = "EmptySelection";
inline constexpr const char* EmptyTargets = "EmptyTargets";
inline constexpr const char* ConfigError = "ConfigError";
inline constexpr const char* ContextOverflow = "ContextOverflow";
inline constexpr const char* TransportError = "TransportError";
inline constexpr const char* TargetNotFound = "TargetNotFound";
inline constexpr const char* NameMismatch = "NameMismatch";
inline constexpr const char* HelperCollision = "HelperCollision";
inline constexpr const char* InvalidPrefix = "InvalidPrefix";
inline constexpr const char* ManifestError = "ManifestError";
inline constexpr const char* WorkspaceDirty = "WorkspaceDirty";
inline constexpr const char* WorkspaceLocked = "WorkspaceLocked";
inline constexpr const char* BuildFailure = "BuildFailure";
inline constexpr const char* BuildToolMissing = "BuildToolMissing";
inline constexpr const char* NegativeDuration = "NegativeDuration";
inline constexpr const char* ZeroDetectors = "ZeroDetectors";
inline constexpr const char* EmptyVariantSet = "EmptyVariantSet";
inline constexpr const char* EmptyBaselineTrace = "EmptyBaselineTrace";
inline constexpr const char* MissingVerdict = "MissingVerdict";
inline constexpr const char* EmptyInput = "EmptyInput";
inline constexpr const char* IoError = "IoError";
inline constexpr const char* UsageError = "UsageError";
} // namespace errkind

} // namespace codemorph
