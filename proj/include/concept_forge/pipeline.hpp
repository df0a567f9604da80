#pragma once
// Config-driven pipeline: ingest -> graph -> samples / quintuples -> predict
// -> evaluate -> analyze. Every artifact lands in the output directory and
// depends only on the inputs and the configured seeds.
//
// Config file (JSON). Relative paths resolve against the config file's directory.
//   {
//     "corpus": "corpus.jsonl", "vocabulary": "vocab.tsv", "output_dir": "out",
//     "years": {"t_start": 2000, "t_end": 2021},
//     "sampler": {"k": 2, "d": 5, "max_negatives_per_anchor": null, "seed": 0},
//     "scorer": {"kind": "heuristic" | "stub" | "remote", "endpoint": null,
//                "table": null, "batch_size": 64, "timeout_seconds": 30,
//                "max_attempts": 3, "parallelism": 1},
//     "eval": {"test_year": 2021, "clamp": true, "top_k": 20, "full_candidates": false},
//     "quintuple": {"citation_threshold": 2, "split": [0.8, 0.1, 0.1], "seed": 0,
//                   "filter": {"keywords": [...], "sections": [...],
//                              "max_numeric_fraction": 0.2, "min_tokens": 5,
//                              "max_tokens": 120}},
//     "analyze": {"generations": null}
//   }
// CONCEPT_FORGE_SCORER_URL overrides scorer.endpoint.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "concept_forge/quintuple.hpp"
#include "concept_forge/sampler.hpp"
#include "concept_forge/scorer.hpp"

namespace cforge {

enum class ScorerKind { Stub, Heuristic, Remote };

struct ScorerConfig {
    ScorerKind kind = ScorerKind::Heuristic;
    std::string endpoint;
    std::filesystem::path table;  // stub lookup table (JSONL); optional
    RemoteOptions remote;
    double timeout_seconds = 30.0;
};

struct EvalConfig {
    int test_year = 2021;
    bool clamp = true;
    std::optional<std::size_t> top_k = 20;
    bool full_candidates = false;
};

struct QuintupleConfig {
    long long citation_threshold = 2;
    FilterRuleSet filter = FilterRuleSet::defaults();
    std::array<double, 3> split{0.8, 0.1, 0.1};
    std::uint64_t seed = 0;
};

struct PipelineConfig {
    std::filesystem::path corpus;
    std::filesystem::path vocabulary;
    std::filesystem::path output_dir = "out";
    int t_start = 2000;
    int t_end = 2021;
    SamplerConfig sampler;
    ScorerConfig scorer;
    EvalConfig eval;
    QuintupleConfig quintuple;
    std::filesystem::path generations;  // analyze input; optional
};

struct ConfigOverrides {
    std::optional<std::filesystem::path> output_dir;
    std::optional<std::uint64_t> seed;
    // Stands in for the environment in tests; nullopt reads CONCEPT_FORGE_SCORER_URL.
    std::optional<std::string> scorer_url;
};

// Parses and validates. Throws ConfigError naming the offending field.
PipelineConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir,
                            const ConfigOverrides& overrides = {});
PipelineConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

// Artifact file names inside the output directory.
namespace artifacts {
inline constexpr const char* kGraph = "graph.json";
inline constexpr const char* kSamples = "samples.jsonl";
inline constexpr const char* kQuintuples = "quintuples.jsonl";
inline constexpr const char* kQuintupleSummary = "quintuple_summary.json";
inline constexpr const char* kTrainIds = "train.ids";
inline constexpr const char* kValidIds = "valid.ids";
inline constexpr const char* kTestIds = "test.ids";
inline constexpr const char* kPrediction = "prediction.json";
inline constexpr const char* kMetricsJson = "metrics.json";
inline constexpr const char* kMetricsCsv = "metrics.csv";
inline constexpr const char* kTextReport = "text_report.json";
}  // namespace artifacts

// Holds <output_dir>/.lock for its lifetime. Throws Error if another run
// holds it.
class OutputLock {
public:
    explicit OutputLock(const std::filesystem::path& output_dir);
    ~OutputLock();
    OutputLock(const OutputLock&) = delete;
    OutputLock& operator=(const OutputLock&) = delete;

private:
    std::filesystem::path path_;
};

std::unique_ptr<Predictor> make_scorer(const ScorerConfig& cfg, const EvolvingGraph& graph);

void cmd_build_graph(const PipelineConfig& cfg, std::ostream& log);
void cmd_sample(const PipelineConfig& cfg, std::ostream& log);
void cmd_quintuples(const PipelineConfig& cfg, std::ostream& log);
void cmd_predict(const PipelineConfig& cfg, std::ostream& log);
void cmd_evaluate(const PipelineConfig& cfg, std::ostream& log);
void cmd_analyze(const PipelineConfig& cfg, std::ostream& log);
void cmd_all(const PipelineConfig& cfg, std::ostream& log);

// Dispatches by command name (build-graph, sample, quintuples, predict,
// evaluate, analyze, all) under the output lock.
void run_command(std::string_view command, const PipelineConfig& cfg, std::ostream& log);

// 0 success, 2 config error, 3 missing upstream artifact, 4 scorer transport,
// 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace cforge
