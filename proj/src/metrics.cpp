#include "codemorph/metrics.hpp"

#include "codemorph/error.hpp"
#include "codemorph/util.hpp"

#include <algorithm>

#include <json.hpp>

namespace codemorph {

using nlohmann::json;

double detector_rate(const std::vector<DetectorReport>& runs) {
    if (runs.empty()) {
        throw Error(errkind::EmptyInput, "detector_rate needs at least one run");
    }
    double sum = 0.0;
    for (const auto& run : runs) {
        if (run.detectors_total <= 0) {
            throw Error(errkind::ZeroDetectors,
                        "run " + std::to_string(run.run_index) + " of " + run.variant_id);
        }
        if (run.detectors_flagged < 0 || run.detectors_flagged > run.detectors_total) {
            throw Error(errkind::EmptyInput,
                        "flagged count out of range for " + run.variant_id);
        }
        sum += 100.0 * run.detectors_flagged / run.detectors_total;
    }
    return sum / static_cast<double>(runs.size());
}

double asr(const std::vector<std::string>& variant_ids,
           const std::map<std::string, Verdict>& verdicts) {
    if (variant_ids.empty()) {
        throw Error(errkind::EmptyVariantSet, "asr over zero variants");
    }
    std::size_t benign = 0;
    for (const auto& id : variant_ids) {
        auto it = verdicts.find(id);
        if (it == verdicts.end()) {
            throw Error(errkind::MissingVerdict, id);
        }
        if (it->second == Verdict::Benign) {
            ++benign;
        }
    }
    return 100.0 * static_cast<double>(benign) / static_cast<double>(variant_ids.size());
}

std::size_t lcs_length(const CallTrace& a, const CallTrace& b) {
    const auto& x = a.calls;
    const auto& y = b.calls;
    if (x.empty() || y.empty()) {
        return 0;
    }
    std::vector<std::size_t> prev(y.size() + 1, 0);
    std::vector<std::size_t> cur(y.size() + 1, 0);
    for (std::size_t i = 1; i <= x.size(); ++i) {
        for (std::size_t j = 1; j <= y.size(); ++j) {
            if (x[i - 1] == y[j - 1]) {
                cur[j] = prev[j - 1] + 1;
            } else {
                cur[j] = std::max(prev[j], cur[j - 1]);
            }
        }
        std::swap(prev, cur);
    }
    return prev[y.size()];
}

double normalized_lcs(const CallTrace& baseline, const CallTrace& variant) {
    if (baseline.calls.empty()) {
        throw Error(errkind::EmptyBaselineTrace, baseline.program_id);
    }
    return static_cast<double>(lcs_length(baseline, variant)) /
           static_cast<double>(baseline.calls.size());
}

std::optional<double> preservation_rate(double baseline_rate,
                                        const std::vector<VariantSignal>& variants,
                                        const PreservationConfig& cfg) {
    std::size_t psi = 0;
    std::size_t preserved = 0;
    for (const auto& v : variants) {
        if (v.detector_rate < baseline_rate) {
            ++psi;
            if (v.nlcs >= cfg.delta) {
                ++preserved;
            }
        }
    }
    if (psi == 0) {
        return std::nullopt;
    }
    return 100.0 * static_cast<double>(preserved) / static_cast<double>(psi);
}

CallTrace load_trace(const std::filesystem::path& path, const std::string& program_id) {
    CallTrace trace;
    trace.program_id = program_id;
    std::string text = util::read_file(path);
    auto ext = util::to_lower(path.extension().string());
    if (ext == ".jsonl" || ext == ".json") {
        struct Row {
            long seq;
            std::string call;
        };
        std::vector<Row> rows;
        long fallback_seq = 0;
        for (const auto& line : util::split_lines(text)) {
            auto trimmed = util::trim(line);
            if (trimmed.empty()) {
                continue;
            }
            json row = json::parse(trimmed, nullptr, false);
            if (row.is_discarded() || !row.is_object() || !row.contains("call")) {
                throw Error(errkind::IoError, "bad trace line in " + path.string());
            }
            long seq = row.value("seq", fallback_seq);
            rows.push_back({seq, util::trim(row["call"].get<std::string>())});
            fallback_seq = seq + 1;
        }
        std::stable_sort(rows.begin(), rows.end(),
                         [](const Row& a, const Row& b) { return a.seq < b.seq; });
        for (auto& row : rows) {
            if (!row.call.empty()) {
                trace.calls.push_back(std::move(row.call));
            }
        }
    } else {
        for (const auto& line : util::split_lines(text)) {
            auto call = util::trim(line);
            if (!call.empty()) {
                trace.calls.push_back(call);
            }
        }
    }
    return trace;
}

std::vector<DetectorReport> load_detector_reports(const std::filesystem::path& path) {
    std::vector<DetectorReport> reports;
    for (const auto& line : util::split_lines(util::read_file(path))) {
        auto trimmed = util::trim(line);
        if (trimmed.empty()) {
            continue;
        }
        json row = json::parse(trimmed, nullptr, false);
        if (row.is_discarded() || !row.is_object()) {
            throw Error(errkind::IoError, "bad detector report line in " + path.string());
        }
        DetectorReport report;
        report.variant_id = row.at("variant_id").get<std::string>();
        report.run_index = row.value("run_index", 1);
        report.detectors_total = row.at("detectors_total").get<int>();
        report.detectors_flagged = row.at("detectors_flagged").get<int>();
        reports.push_back(std::move(report));
    }
    return reports;
}

std::map<std::string, Verdict> load_verdicts(const std::filesystem::path& path) {
    std::map<std::string, Verdict> verdicts;
    json doc = json::parse(util::read_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        throw Error(errkind::IoError, "verdicts file is not a JSON object: " + path.string());
    }
    for (const auto& [id, value] : doc.items()) {
        auto word = util::to_lower(value.get<std::string>());
        if (word == "benign") {
            verdicts[id] = Verdict::Benign;
        } else if (word == "malicious") {
            verdicts[id] = Verdict::Malicious;
        } else {
            throw Error(errkind::IoError, "unknown verdict '" + word + "' for " + id);
        }
    }
    return verdicts;
}

} // namespace codemorph
