#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace codemorph {

struct DetectorReport {
    std::string variant_id;
    int run_index = 1;
    int detectors_total = 0;
    int detectors_flagged = 0;
};

struct CallTrace {
    std::string program_id;
    std::vector<std::string> calls;
};

struct PreservationConfig {
    double delta = 0.96;
};

enum class Verdict { Benign, Malicious };

// Mean over runs of 100 * flagged / total. Throws Error(ZeroDetectors) when a
// run reports zero detectors and Error(EmptyInput) for an empty report list.
double detector_rate(const std::vector<DetectorReport>& runs);

// 100 * benign / variants. Throws Error(EmptyVariantSet) for no variants and
// Error(MissingVerdict) when a variant has no verdict.
double asr(const std::vector<std::string>& variant_ids,
           const std::map<std::string, Verdict>& verdicts);

// Standard LCS length over exact call-identifier equality; two-row dynamic
// program, O(|a|*|b|) time.
std::size_t lcs_length(const CallTrace& a, const CallTrace& b);

// lcs(baseline, variant) / |baseline|. Throws Error(EmptyBaselineTrace).
double normalized_lcs(const CallTrace& baseline, const CallTrace& variant);

struct VariantSignal {
    double detector_rate = 0.0;
    double nlcs = 0.0;
};

// Functionality preservation rate over the variants whose detector rate fell
// below the baseline. Returns nullopt (UNDEFINED) when no variant did.
std::optional<double> preservation_rate(double baseline_rate,
                                        const std::vector<VariantSignal>& variants,
                                        const PreservationConfig& cfg = {});

// File formats: traces are JSON Lines ({seq, call}) or plain text with one
// call per line; detector reports are JSON Lines
// {variant_id, run_index, detectors_total, detectors_flagged}.
CallTrace load_trace(const std::filesystem::path& path, const std::string& program_id);
std::vector<DetectorReport> load_detector_reports(const std::filesystem::path& path);
std::map<std::string, Verdict> load_verdicts(const std::filesystem::path& path);

} // namespace codemorph
