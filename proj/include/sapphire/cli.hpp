/// @file cli.hpp
/// @brief Configuration resolution, provider wiring, and the command
///        implementations behind the command-line tool. Exposed as a library
///        so tests can drive commands in-process.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sapphire/errors.hpp"
#include "sapphire/llm_gateway.hpp"
#include "sapphire/pipeline.hpp"

namespace sapphire::cli {

/// Everything a run needs, resolved with precedence
/// flag > config file > environment > built-in default.
struct AppConfig {
    pipeline::PipelineConfig pipeline;
    llm::PromptAssets assets = llm::PromptAssets::defaults();

    std::string wiki_api_url = "https://en.wikipedia.org/w/api.php";

    std::string chat_base_url = "https://api.openai.com/v1";
    std::string chat_api_key_env = "OPENAI_API_KEY";

    std::string embedding_provider = "openai";  // "openai" or "local"
    std::string embedding_model = "text-embedding-3-small";
    std::size_t embedding_local_dim = 256;
    std::string embedding_base_url = "https://api.openai.com/v1";
    std::string embedding_api_key_env = "OPENAI_API_KEY";

    std::filesystem::path cache_dir = ".sapphire-cache";
    std::filesystem::path out_dir = ".";

    bool record = false;
    std::filesystem::path replay_dir;  // non-empty switches every provider to replay
    std::string format = "json";       // "json" or "markdown"

    bool replay() const { return !replay_dir.empty(); }

    /// Where --record appends fixtures: the replay dir when given, else
    /// <cache_dir>/fixtures.
    std::filesystem::path fixture_dir() const;

    /// Replay and record runs keep article/index caches inside the fixture
    /// directory so one directory is a complete offline bundle.
    std::filesystem::path effective_cache_dir() const;
};

/// Flag values collected by the argument parser; unset members leave the
/// config-file/env/default value in force.
struct GlobalFlags {
    std::optional<std::string> config_path;
    std::optional<std::string> cache_dir;
    bool record = false;
    std::optional<std::string> replay_dir;
    std::optional<int> k_articles;
    std::optional<int> top_k;
    std::optional<std::size_t> chunk_size;
    std::optional<std::size_t> chunk_overlap;
    std::optional<int> trials;
    std::optional<std::string> out_dir;
    std::optional<std::string> format;
};

/// Loads the config file (when given), applies SAPPHIRE_CACHE_DIR, flags,
/// and asset file overrides. Throws InvalidConfig on bad values.
AppConfig resolve_config(const GlobalFlags& flags);

/// Builds live, recording, or replay providers according to the config.
pipeline::ProviderSet make_providers(const AppConfig& config);

/// The final model as a Markdown document: a title plus one headed section
/// per construct, in canonical order.
std::string render_model_markdown(const SapphireModel& model);

// Command implementations. Each prints results to `out` (machine or human
// format per config), reports errors on stderr, and returns the process exit
// code. Providers are injected so tests can substitute counting doubles.
int cmd_ingest(const AppConfig& config, const pipeline::ProviderSet& providers,
               const std::string& system_raw, std::ostream& out);
int cmd_generate(const AppConfig& config, const pipeline::ProviderSet& providers,
                 const std::string& system_raw, std::ostream& out);
int cmd_evaluate(const AppConfig& config, const pipeline::ProviderSet& providers,
                 const std::string& artifact_path, std::ostream& out);
int cmd_report(const AppConfig& config, const std::vector<std::string>& artifact_paths,
               std::ostream& out);

/// Maps error classes to documented, distinct exit codes.
int exit_code_for(const Error& error);

}  // namespace sapphire::cli
