// concept_forge <command> --config PATH [--out DIR] [--seed N]
//
// Commands: build-graph, sample, quintuples, predict, evaluate, analyze, all.
// Exit codes: 0 success, 1 other failure, 2 configuration error, 3 missing
// upstream artifact, 4 scorer transport failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "concept_forge/errors.hpp"
#include "concept_forge/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Concept co-occurrence graph forecasting and citation quintuple extraction"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    const char* commands[][2] = {
        {"build-graph", "Build the evolving concept graph (graph.json)"},
        {"sample", "Generate positive and negative link samples (samples.jsonl)"},
        {"quintuples", "Extract, bind, filter and split citation quintuples"},
        {"predict", "Forecast the test-year snapshot (prediction.json)"},
        {"evaluate", "Score the forecast against the test-year snapshot (metrics.json, metrics.csv)"},
        {"analyze", "Text overlap, BLEU and ROUGE-L report (text_report.json)"},
        {"all", "Run every stage in order"},
    };
    for (auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "Pipeline config (JSON)")->required();
        sub->add_option("--out", out_dir, "Output directory (overrides output_dir)");
        sub->add_option("--seed", seed, "Seed for sampling, sentence binding and splits");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        cforge::ConfigOverrides overrides;
        if (!out_dir.empty()) overrides.output_dir = out_dir;
        overrides.seed = seed;
        auto cfg = cforge::load_config(config_path, overrides);
        cforge::run_command(command, cfg, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "concept_forge " << command << ": " << e.what() << "\n";
        return cforge::exit_code_for(e);
    }
    return 0;
}
