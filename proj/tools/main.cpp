/// @file main.cpp
/// @brief Command-line entry point: argument parsing and command dispatch.
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sapphire/cli.hpp"
#include "sapphire/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "sapphire-rag: generates SAPPhIRE causality models of artificial systems,\n"
        "grounded in encyclopedia articles via retrieval-augmented generation, and\n"
        "scores them with an LLM judge (groundedness, answer relevance, context\n"
        "relevance)."};
    app.fallthrough();
    app.require_subcommand(1);

    sapphire::cli::GlobalFlags flags;
    app.add_option("--config", flags.config_path, "JSON config file");
    app.add_option("--cache-dir", flags.cache_dir,
                   "Cache directory (default .sapphire-cache, env SAPPHIRE_CACHE_DIR)");
    app.add_flag("--record", flags.record,
                 "Record live chat/embedding exchanges as replayable fixtures");
    app.add_option("--replay", flags.replay_dir,
                   "Serve every provider from fixtures in this directory (no network)");
    app.add_option("--k-articles", flags.k_articles, "Articles to retrieve per system");
    app.add_option("--top-k", flags.top_k, "Context chunks to retrieve per query");
    app.add_option("--chunk-size", flags.chunk_size, "Chunk size in characters");
    app.add_option("--chunk-overlap", flags.chunk_overlap, "Chunk overlap in characters");
    app.add_option("--trials", flags.trials, "Generation trials per run");
    app.add_option("--out", flags.out_dir, "Output directory for artifacts and models");
    app.add_option("--format", flags.format, "Output format: json or markdown");

    std::string system;
    std::string artifact;
    std::vector<std::string> artifacts;

    CLI::App* ingest =
        app.add_subcommand("ingest", "Fetch, chunk, embed, and cache a system's articles");
    ingest->add_option("system", system, "System name, e.g. \"solenoid valve\"")->required();

    CLI::App* generate =
        app.add_subcommand("generate", "Produce a SAPPhIRE model and its run artifact");
    generate->add_option("system", system, "System name, e.g. \"solenoid valve\"")->required();

    CLI::App* evaluate =
        app.add_subcommand("evaluate", "Re-score an existing run artifact with the LLM judge");
    evaluate->add_option("artifact", artifact, "Run artifact (run_*.json)")->required();

    CLI::App* report =
        app.add_subcommand("report", "Aggregate scores from run artifacts into a report");
    report->add_option("artifacts", artifacts, "Run artifacts (run_*.json)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        sapphire::cli::AppConfig config = sapphire::cli::resolve_config(flags);
        if (app.got_subcommand(ingest)) {
            return sapphire::cli::cmd_ingest(config, sapphire::cli::make_providers(config), system,
                                             std::cout);
        }
        if (app.got_subcommand(generate)) {
            return sapphire::cli::cmd_generate(config, sapphire::cli::make_providers(config),
                                               system, std::cout);
        }
        if (app.got_subcommand(evaluate)) {
            return sapphire::cli::cmd_evaluate(config, sapphire::cli::make_providers(config),
                                               artifact, std::cout);
        }
        return sapphire::cli::cmd_report(config, artifacts, std::cout);
    } catch (const sapphire::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return sapphire::cli::exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
