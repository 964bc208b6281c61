#include "codemorph/gateway.hpp"

#include "codemorph/error.hpp"
#include "codemorph/util.hpp"

#include <chrono>
#include <cstdio>

#include <httplib.h>
#include <json.hpp>

namespace codemorph {

using nlohmann::json;

void GenerationConfig::validate() const {
    if (temperature < 0.0) {
        throw Error(errkind::ConfigError, "temperature must be >= 0");
    }
    if (top_p <= 0.0 || top_p > 1.0) {
        throw Error(errkind::ConfigError, "top_p must be in (0, 1]");
    }
    if (top_k < 1) {
        throw Error(errkind::ConfigError, "top_k must be >= 1");
    }
    if (max_retries < 0) {
        throw Error(errkind::ConfigError, "max_retries must be >= 0");
    }
    if (timeout_s <= 0.0) {
        throw Error(errkind::ConfigError, "timeout_s must be > 0");
    }
}

const char* gen_outcome_name(GenOutcome o) {
    switch (o) {
    case GenOutcome::Ok:
        return "Ok";
    case GenOutcome::DescribedNotCoded:
        return "DescribedNotCoded";
    case GenOutcome::MalformedFormat:
        return "MalformedFormat";
    case GenOutcome::Reverted:
        return "Reverted";
    }
    return "Reverted";
}

namespace {

struct Fence {
    std::string tag;
    std::string interior;
};

struct FenceScan {
    std::vector<Fence> closed;
    bool unterminated = false;
};

bool fence_line(const std::string& text, std::size_t line_begin, std::size_t line_end,
                std::string* tag) {
    std::size_t i = line_begin;
    while (i < line_end && (text[i] == ' ' || text[i] == '\t')) {
        ++i;
    }
    if (line_end - i < 3 || text.compare(i, 3, "```") != 0) {
        return false;
    }
    i += 3;
    std::string rest = util::trim(text.substr(i, line_end - i));
    auto space = rest.find_first_of(" \t");
    *tag = util::to_lower(space == std::string::npos ? rest : rest.substr(0, space));
    return true;
}

FenceScan scan_fences(const std::string& raw) {
    FenceScan scan;
    bool in_fence = false;
    std::string open_tag;
    std::size_t interior_begin = 0;
    std::size_t pos = 0;
    while (pos <= raw.size()) {
        std::size_t nl = raw.find('\n', pos);
        std::size_t line_end = nl == std::string::npos ? raw.size() : nl;
        std::string tag;
        if (fence_line(raw, pos, line_end, &tag)) {
            if (!in_fence) {
                in_fence = true;
                open_tag = tag;
                interior_begin = nl == std::string::npos ? raw.size() : nl + 1;
            } else {
                scan.closed.push_back({open_tag, raw.substr(interior_begin, pos - interior_begin)});
                in_fence = false;
            }
        }
        if (nl == std::string::npos) {
            break;
        }
        pos = nl + 1;
    }
    scan.unterminated = in_fence;
    return scan;
}

bool tag_matches(const std::string& tag, Language language) {
    if (language == Language::C) {
        return tag == "c";
    }
    return tag == "cpp" || tag == "c++" || tag == "cxx";
}

} // namespace

std::pair<std::optional<std::string>, GenOutcome> parse_response(const std::string& raw,
                                                                 Language language) {
    FenceScan scan = scan_fences(raw);

    std::string assembled;
    int matched = 0;
    for (const auto& fence : scan.closed) {
        if (!tag_matches(fence.tag, language)) {
            continue;
        }
        if (matched && !assembled.empty() && assembled.back() != '\n') {
            assembled += '\n';
        }
        assembled += fence.interior;
        ++matched;
    }
    if (matched > 0) {
        if (matched > 1) {
            std::fprintf(stderr, "{\"note\":\"response split code across %d fenced blocks\"}\n",
                         matched);
        }
        return {assembled, GenOutcome::Ok};
    }
    if (scan.unterminated) {
        return {std::nullopt, GenOutcome::MalformedFormat};
    }
    for (const auto& fence : scan.closed) {
        if (fence.tag.empty()) {
            return {fence.interior, GenOutcome::Ok};
        }
    }
    if (!scan.closed.empty()) {
        // Only foreign-tagged blocks: code arrived, but not in the requested format.
        return {std::nullopt, GenOutcome::MalformedFormat};
    }
    return {std::nullopt, GenOutcome::DescribedNotCoded};
}

std::string transcript_key(const std::string& system_text, const std::string& user_text) {
    return util::fnv1a64_hex(system_text + "\n\n" + user_text);
}

HttpTransport::HttpTransport(std::string endpoint_url) : endpoint_url_(std::move(endpoint_url)) {}

std::string HttpTransport::send(const ChatRequest& request) {
    if (!util::starts_with(endpoint_url_, "http://")) {
        throw Error(errkind::TransportError,
                    "only http:// endpoints are supported: " + endpoint_url_);
    }
    std::string rest = endpoint_url_.substr(7);
    auto slash = rest.find('/');
    std::string hostport = slash == std::string::npos ? rest : rest.substr(0, slash);
    std::string path = slash == std::string::npos ? "/api/chat" : rest.substr(slash);

    json body = {
        {"model", request.model},
        {"messages",
         {{{"role", "system"}, {"content", request.system_text}},
          {{"role", "user"}, {"content", request.user_text}}}},
        {"options",
         {{"temperature", request.temperature},
          {"top_k", request.top_k},
          {"top_p", request.top_p},
          {"seed", request.seed}}},
        {"stream", false},
    };

    httplib::Client client(("http://" + hostport).c_str());
    auto seconds = static_cast<time_t>(request.timeout_s);
    client.set_connection_timeout(seconds, 0);
    client.set_read_timeout(seconds, 0);
    client.set_write_timeout(seconds, 0);

    auto res = client.Post(path.c_str(), body.dump(), "application/json");
    if (!res) {
        throw Error(errkind::TransportError,
                    "no response from " + endpoint_url_ + ": " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw Error(errkind::TransportError,
                    "HTTP " + std::to_string(res->status) + " from " + endpoint_url_);
    }

    json doc = json::parse(res->body, nullptr, false);
    if (!doc.is_discarded()) {
        if (doc.contains("message") && doc["message"].contains("content")) {
            return doc["message"]["content"].get<std::string>();
        }
        if (doc.contains("choices") && doc["choices"].is_array() && !doc["choices"].empty() &&
            doc["choices"][0].contains("message")) {
            return doc["choices"][0]["message"]["content"].get<std::string>();
        }
        if (doc.contains("response")) {
            return doc["response"].get<std::string>();
        }
    }
    throw Error(errkind::TransportError, "unrecognized response shape from " + endpoint_url_);
}

ReplayTransport::ReplayTransport(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::string ReplayTransport::send(const ChatRequest& request) {
    std::string key = transcript_key(request.system_text, request.user_text);
    auto path = dir_ / (key + ".json");
    if (!std::filesystem::exists(path)) {
        throw Error(errkind::TransportError, "no transcript " + path.string());
    }
    json doc = json::parse(util::read_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.contains("responses") || !doc["responses"].is_array() ||
        doc["responses"].empty()) {
        throw Error(errkind::TransportError, "malformed transcript " + path.string());
    }
    const auto& responses = doc["responses"];
    int index = attempt_counts_[key]++;
    if (index >= static_cast<int>(responses.size())) {
        index = static_cast<int>(responses.size()) - 1;
    }
    return responses[index].get<std::string>();
}

ScriptedTransport::ScriptedTransport(std::vector<std::string> responses)
    : responses_(std::move(responses)) {}

std::string ScriptedTransport::send(const ChatRequest& request) {
    requests.push_back(request);
    if (next_ >= responses_.size()) {
        throw Error(errkind::TransportError, "scripted transport exhausted");
    }
    return responses_[next_++];
}

GenerationResult transform_function(const PromptBundle& bundle, const GenerationConfig& cfg,
                                    const FunctionDef& original, Transport& transport) {
    cfg.validate();

    GenerationResult result;
    auto start = std::chrono::steady_clock::now();
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
        ChatRequest request;
        request.model = cfg.model_name;
        request.system_text = bundle.system_text;
        request.user_text = bundle.user_text;
        request.temperature = cfg.temperature;
        request.top_k = cfg.top_k;
        request.top_p = cfg.top_p;
        request.seed = cfg.seed + attempt;
        request.timeout_s = cfg.timeout_s;

        std::string raw;
        try {
            raw = transport.send(request);
        } catch (const Error&) {
            if (attempt == cfg.max_retries) {
                throw;
            }
            continue;
        }
        result.raw_response = raw;

        auto [code, diagnosis] = parse_response(raw, bundle.language);
        if (code) {
            result.code_text = std::move(code);
            result.outcome = GenOutcome::Ok;
            result.attempts = attempt + 1;
            break;
        }
        (void)diagnosis;
    }

    if (!result.code_text) {
        result.outcome = GenOutcome::Reverted;
        result.code_text = original.body_text;
        result.attempts = cfg.max_retries + 1;
    }
    result.elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.generated_line_count = util::count_lines(*result.code_text);
    return result;
}

} // namespace codemorph
