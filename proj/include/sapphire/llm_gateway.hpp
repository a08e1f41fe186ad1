/// @file llm_gateway.hpp
/// @brief Chat-completion provider abstraction, the two generation prompt
///        templates, structured-output parsing, and record/replay fixtures.
#pragma once

#include <deque>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "sapphire/core.hpp"
#include "sapphire/errors.hpp"

namespace sapphire::llm {

struct ChatRequest {
    std::string model_id;
    std::string prompt;
    double temperature = 0.0;
};

/// One recorded chat exchange, stored as a JSON line in a fixture file.
struct Transcript {
    std::string hash;  // stable digest of (model_id, temperature, prompt)
    std::string model;
    double temperature = 0.0;
    std::string prompt;
    std::string response;
};

/// Interface to a chat-completion model. Implementations must be safe for
/// concurrent calls.
class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string complete(const ChatRequest& request) = 0;
};

/// Forwards to the provider; kept as a seam so call sites read uniformly.
std::string complete(const ChatRequest& request, ChatProvider& provider);

// ---------------------------------------------------------------------------
// Prompt templates and assets
// ---------------------------------------------------------------------------

/// Template for hypothetical-model generation (chain-of-thought, one call
/// yields all seven constructs). Placeholders: {Definitions of the SAPPhIRE
/// constructs}, {System name}, {Reasoning steps}, {Output format instructions}.
const std::string& tau_template();

/// Template for per-construct corrected-answer generation. Placeholders:
/// {Definitions of the SAPPhIRE constructs}, {system name}, {query},
/// {hypothetical_answer}, {context_str}.
const std::string& rho_template();

/// Editable prompt building blocks. Compiled-in defaults mirror the files in
/// the repository's assets/ directory; any field can be overridden from a
/// file via the config.
struct PromptAssets {
    std::string definitions;
    std::string reasoning_steps;
    std::string format_instructions;
    std::string judge_groundedness;
    std::string judge_answer_relevance;
    std::string judge_context_relevance;

    static PromptAssets defaults();
};

/// Pure string substitution of {placeholder} tokens; no escaping.
/// Throws MissingPlaceholderValue when value is empty.
std::string replace_placeholder(std::string body, std::string_view token,
                                const std::string& value);

std::string render_tau(const SystemName& system, const std::string& definitions,
                       const std::string& reasoning_steps,
                       const std::string& format_instructions);

std::string render_rho(const SystemName& system, const ConstructQuery& query,
                       const std::string& hypothetical_answer, const std::string& context_str,
                       const std::string& definitions);

/// One retrieved chunk as it appears in a correction prompt.
struct ContextChunk {
    std::string source_title;
    std::string text;
};

/// Joins chunks with "\n\n---\n\n", each prefixed by its source title.
/// Throws InvalidArgument on an empty chunk list.
std::string build_context_str(const std::vector<ContextChunk>& chunks);

// ---------------------------------------------------------------------------
// Structured-output parsing
// ---------------------------------------------------------------------------

/// Extracts the first balanced JSON object from `raw` (tolerating surrounding
/// prose and markdown fences) and reads the seven construct keys out of it.
/// Throws ParseError when no such object exists or any construct answer is
/// missing, non-string, or empty.
HypotheticalModel parse_hypothetical(const std::string& raw, const SystemName& system);

/// Canonical serialization: a JSON object with exactly the seven construct
/// keys, in canonical order. parse_hypothetical(serialize_hypothetical(m)) == m.
std::string serialize_hypothetical(const HypotheticalModel& model);

// ---------------------------------------------------------------------------
// Providers
// ---------------------------------------------------------------------------

/// Talks to an OpenAI-compatible /chat/completions endpoint with
/// retry/backoff.
class OpenAiChatClient : public ChatProvider {
public:
    OpenAiChatClient(std::string base_url, std::string api_key, int max_attempts = 3);

    std::string complete(const ChatRequest& request) override;

private:
    std::string base_url_;
    std::string api_key_;
    int max_attempts_;
};

/// Serves responses from a recorded fixture with no network access. When a
/// request hash was recorded more than once, responses are returned in
/// recorded order, and the last one repeats once the queue is exhausted (so
/// replays of longer runs stay deterministic).
class ReplayChatProvider : public ChatProvider {
public:
    explicit ReplayChatProvider(const std::filesystem::path& fixture);

    std::string complete(const ChatRequest& request) override;

private:
    std::unordered_map<std::string, std::deque<std::string>> by_hash_;
    std::mutex mutex_;
};

/// Wraps a live provider and appends every exchange to a fixture file.
class RecordingChatProvider : public ChatProvider {
public:
    RecordingChatProvider(std::shared_ptr<ChatProvider> inner, std::filesystem::path fixture);

    std::string complete(const ChatRequest& request) override;

private:
    std::shared_ptr<ChatProvider> inner_;
    std::filesystem::path fixture_;
    std::mutex write_mutex_;
};

}  // namespace sapphire::llm
