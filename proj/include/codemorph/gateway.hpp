#pragma once

#include "codemorph/prompt.hpp"
#include "codemorph/source.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace codemorph {

struct GenerationConfig {
    std::string endpoint_url;
    std::string model_name = "local";
    double temperature = 0.8;
    int top_k = 40;
    double top_p = 0.9;
    long seed = 1;
    int max_retries = 5;
    double timeout_s = 300.0;

    // Throws Error(ConfigError) when a field is out of range.
    void validate() const;
};

enum class GenOutcome { Ok, DescribedNotCoded, MalformedFormat, Reverted };

const char* gen_outcome_name(GenOutcome o);

struct GenerationResult {
    std::optional<std::string> code_text;
    std::string raw_response;
    int attempts = 0;
    double elapsed_s = 0.0;
    int generated_line_count = 0;
    GenOutcome outcome = GenOutcome::Reverted;
};

struct ChatRequest {
    std::string model;
    std::string system_text;
    std::string user_text;
    double temperature = 0.8;
    int top_k = 40;
    double top_p = 0.9;
    long seed = 1;
    double timeout_s = 300.0;
};

// Returns the assistant message content; throws Error(TransportError).
class Transport {
public:
    virtual ~Transport() = default;
    virtual std::string send(const ChatRequest& request) = 0;
};

// POSTs the minimal JSON chat body to an http:// chat-completion endpoint and
// accepts the common response shapes ({message:{content}}, {choices:[...]},
// {response}).
class HttpTransport : public Transport {
public:
    explicit HttpTransport(std::string endpoint_url);
    std::string send(const ChatRequest& request) override;

private:
    std::string endpoint_url_;
};

// Key for canned transcripts: hash of the exact prompt pair.
std::string transcript_key(const std::string& system_text, const std::string& user_text);

// Replays canned responses from <dir>/<transcript_key>.json, a JSON object
// {"responses": [...]} indexed by attempt number (clamped to the last entry).
class ReplayTransport : public Transport {
public:
    explicit ReplayTransport(std::filesystem::path dir);
    std::string send(const ChatRequest& request) override;

private:
    std::filesystem::path dir_;
    std::map<std::string, int> attempt_counts_;
};

// Serves responses from an in-memory script; used by tests.
class ScriptedTransport : public Transport {
public:
    explicit ScriptedTransport(std::vector<std::string> responses);
    std::string send(const ChatRequest& request) override;

    std::vector<ChatRequest> requests;

private:
    std::vector<std::string> responses_;
    std::size_t next_ = 0;
};

// Extracts the code block from a raw model response. Returns the code text or
// nullopt plus the diagnosis that applies when no code was usable.
std::pair<std::optional<std::string>, GenOutcome> parse_response(const std::string& raw,
                                                                 Language language);

// Algorithm: send the prompt, parse the fenced reply, retry content failures
// with seed = cfg.seed + attempt_index up to cfg.max_retries extra attempts,
// then fall back to the original function body.
GenerationResult transform_function(const PromptBundle& bundle, const GenerationConfig& cfg,
                                    const FunctionDef& original, Transport& transport);

} // namespace codemorph
