#include "sapphire/llm_gateway.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "http_util.hpp"
#include "sapphire/hash.hpp"

namespace sapphire::llm {

namespace {

using json = nlohmann::json;

bool is_blank(const std::string& s) {
    return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

/// Locates the first balanced JSON object in `raw`, honoring string literals
/// and escapes. Returns the parsed object, or a discarded value when none of
/// the candidate spans parse.
json first_json_object(const std::string& raw) {
    for (std::size_t start = raw.find('{'); start != std::string::npos;
         start = raw.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (std::size_t i = start; i < raw.size(); ++i) {
            char c = raw[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}') {
                if (--depth == 0) {
                    json parsed = json::parse(raw.substr(start, i - start + 1), nullptr,
                                              /*allow_exceptions=*/false);
                    if (!parsed.is_discarded() && parsed.is_object()) return parsed;
                    break;  // balanced but unparseable; try the next '{'
                }
            }
        }
    }
    return json(json::value_t::discarded);
}

}  // namespace

std::string complete(const ChatRequest& request, ChatProvider& provider) {
    return provider.complete(request);
}

std::string replace_placeholder(std::string body, std::string_view token,
                                const std::string& value) {
    if (is_blank(value)) {
        throw Error(ErrorCode::MissingPlaceholderValue,
                    "no value for placeholder " + std::string(token));
    }
    std::size_t pos = 0;
    while ((pos = body.find(token, pos)) != std::string::npos) {
        body.replace(pos, token.size(), value);
        pos += value.size();
    }
    return body;
}

std::string render_tau(const SystemName& system, const std::string& definitions,
                       const std::string& reasoning_steps,
                       const std::string& format_instructions) {
    std::string out = tau_template();
    out = replace_placeholder(std::move(out), "{Definitions of the SAPPhIRE constructs}",
                              definitions);
    out = replace_placeholder(std::move(out), "{System name}", system.str());
    out = replace_placeholder(std::move(out), "{Reasoning steps}", reasoning_steps);
    out = replace_placeholder(std::move(out), "{Output format instructions}",
                              format_instructions);
    return out;
}

std::string render_rho(const SystemName& system, const ConstructQuery& query,
                       const std::string& hypothetical_answer, const std::string& context_str,
                       const std::string& definitions) {
    std::string out = rho_template();
    out = replace_placeholder(std::move(out), "{Definitions of the SAPPhIRE constructs}",
                              definitions);
    out = replace_placeholder(std::move(out), "{system name}", system.str());
    out = replace_placeholder(std::move(out), "{query}", query.text);
    out = replace_placeholder(std::move(out), "{hypothetical_answer}", hypothetical_answer);
    out = replace_placeholder(std::move(out), "{context_str}", context_str);
    return out;
}

std::string build_context_str(const std::vector<ContextChunk>& chunks) {
    if (chunks.empty()) {
        throw Error(ErrorCode::InvalidArgument, "cannot build a context from zero chunks");
    }
    std::string out;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        if (i > 0) out += "\n\n---\n\n";
        out += "[source: " + chunks[i].source_title + "]\n" + chunks[i].text;
    }
    return out;
}

HypotheticalModel parse_hypothetical(const std::string& raw, const SystemName& system) {
    if (is_blank(raw)) {
        throw Error(ErrorCode::ParseError, "empty hypothetical-model response");
    }
    json object = first_json_object(raw);
    if (object.is_discarded()) {
        throw Error(ErrorCode::ParseError, "no JSON object found in hypothetical-model response");
    }

    HypotheticalModel model{system, {}};
    for (ConstructKind kind : all_constructs()) {
        std::string key(construct_answer_key(kind));
        if (!object.contains(key)) {
            throw Error(ErrorCode::ParseError, "hypothetical model is missing key \"" + key + "\"");
        }
        const json& value = object[key];
        if (!value.is_string() || is_blank(value.get<std::string>())) {
            throw Error(ErrorCode::ParseError,
                        "hypothetical model key \"" + key + "\" is not a non-empty string");
        }
        model.answers[kind] = value.get<std::string>();
    }
    return model;
}

std::string serialize_hypothetical(const HypotheticalModel& model) {
    nlohmann::ordered_json object;
    for (ConstructKind kind : all_constructs()) {
        object[std::string(construct_answer_key(kind))] = model.answers[kind];
    }
    return object.dump(2);
}

// ---------------------------------------------------------------------------
// OpenAI-compatible HTTP provider
// ---------------------------------------------------------------------------

OpenAiChatClient::OpenAiChatClient(std::string base_url, std::string api_key, int max_attempts)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)), max_attempts_(max_attempts) {}

std::string OpenAiChatClient::complete(const ChatRequest& request) {
    json body = {{"model", request.model_id},
                 {"temperature", request.temperature},
                 {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})}};
    std::string raw = netutil::post_json_with_retry(base_url_, "/chat/completions", body.dump(),
                                                    api_key_, max_attempts_,
                                                    ErrorCode::ProviderError);
    try {
        json parsed = json::parse(raw);
        return parsed.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ProviderError, std::string("malformed chat response: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Record / replay
// ---------------------------------------------------------------------------

ReplayChatProvider::ReplayChatProvider(const std::filesystem::path& fixture) {
    std::ifstream in(fixture);
    if (!in) {
        throw Error(ErrorCode::ReplayMiss, "chat fixture not found: " + fixture.string());
    }
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json record = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (record.is_discarded()) {
            throw Error(ErrorCode::CorruptFile, "bad line in " + fixture.string());
        }
        by_hash_[record.at("hash").get<std::string>()].push_back(
            record.at("response").get<std::string>());
    }
}

std::string ReplayChatProvider::complete(const ChatRequest& request) {
    std::string digest =
        request_digest(request.model_id, request.temperature, request.prompt);
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = by_hash_.find(digest);
    if (it == by_hash_.end() || it->second.empty()) {
        throw Error(ErrorCode::ReplayMiss, "no recorded response for prompt starting \"" +
                                               request.prompt.substr(0, 60) + "\"");
    }
    std::deque<std::string>& queue = it->second;
    if (queue.size() == 1) return queue.front();  // last response repeats
    std::string response = std::move(queue.front());
    queue.pop_front();
    return response;
}

RecordingChatProvider::RecordingChatProvider(std::shared_ptr<ChatProvider> inner,
                                             std::filesystem::path fixture)
    : inner_(std::move(inner)), fixture_(std::move(fixture)) {}

std::string RecordingChatProvider::complete(const ChatRequest& request) {
    std::string response = inner_->complete(request);

    std::lock_guard<std::mutex> lock(write_mutex_);
    if (fixture_.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(fixture_.parent_path(), ec);
    }
    std::ofstream out(fixture_, std::ios::app);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot append to " + fixture_.string());
    }
    nlohmann::ordered_json record = {
        {"hash", request_digest(request.model_id, request.temperature, request.prompt)},
        {"model", request.model_id},
        {"temperature", request.temperature},
        {"prompt", request.prompt},
        {"response", response}};
    out << record.dump() << '\n';
    out.flush();
    if (!out) {
        throw Error(ErrorCode::IoError, "failed writing " + fixture_.string());
    }
    return response;
}

}  // namespace sapphire::llm
