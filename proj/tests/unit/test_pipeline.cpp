#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "concept_forge/errors.hpp"
#include "concept_forge/eval.hpp"
#include "concept_forge/io.hpp"
#include "concept_forge/parallel.hpp"
#include "concept_forge/pipeline.hpp"
#include "concept_forge/random.hpp"
#include "concept_forge/synthetic.hpp"
#include "../support/oracles.hpp"

using namespace cforge;
namespace ct = cforge::testing;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kSource = CFORGE_SOURCE_DIR;

// Ignores CONCEPT_FORGE_SCORER_URL from the test environment.
ConfigOverrides no_env() {
    ConfigOverrides o;
    o.scorer_url = "";
    return o;
}

// Synthetic corpus plus a heuristic config in a fresh directory.
struct Workspace {
    ct::TempDir dir;
    json config;

    explicit Workspace(std::uint64_t seed = 7) {
        SyntheticOptions opt;
        opt.seed = seed;
        auto corpus = make_synthetic_corpus(opt);
        write_text_atomic(dir / "corpus.jsonl", corpus_to_jsonl(corpus.papers));
        write_text_atomic(dir / "vocab.tsv", vocabulary_to_tsv(corpus.vocabulary));
        config = {{"corpus", "corpus.jsonl"},
                  {"vocabulary", "vocab.tsv"},
                  {"output_dir", "out"},
                  {"years", {{"t_start", 2000}, {"t_end", 2010}}},
                  {"scorer", {{"kind", "heuristic"}}},
                  {"eval", {{"test_year", 2010}}}};
    }

    fs::path out() const { return dir / "out"; }

    fs::path write_config(const std::string& name = "config.json") const {
        write_text_atomic(dir / name, config.dump(2));
        return dir / name;
    }

    PipelineConfig parsed(const ConfigOverrides& o = no_env()) const {
        return parse_config(config.dump(), dir.path(), o);
    }
};

std::string config_error(const std::string& text, const fs::path& base) {
    try {
        parse_config(text, base, no_env());
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

int run_cli(const std::string& args, const std::string& env = "") {
    std::string cmd = env + " '" + std::string(CFORGE_CLI) + "' " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> snapshot_dir(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file()) files[entry.path().filename().string()] = read_text(entry.path());
    }
    return files;
}

}  // namespace

TEST(Config, DefaultsAndRelativePaths) {
    Workspace ws;
    auto cfg = ws.parsed();
    EXPECT_EQ(cfg.corpus, ws.dir / "corpus.jsonl");
    EXPECT_EQ(cfg.output_dir, ws.dir / "out");
    EXPECT_EQ(cfg.sampler.k, 2);
    EXPECT_EQ(cfg.sampler.d, 5);
    EXPECT_EQ(cfg.eval.top_k, std::optional<std::size_t>(20));
    EXPECT_TRUE(cfg.eval.clamp);
    EXPECT_EQ(cfg.quintuple.citation_threshold, 2);
    EXPECT_EQ(cfg.scorer.kind, ScorerKind::Heuristic);

    ws.config["eval"].erase("test_year");
    EXPECT_EQ(ws.parsed().eval.test_year, 2010);
}

TEST(Config, ErrorsNameTheField) {
    Workspace ws;
    auto with = [&](const std::function<void(json&)>& edit) {
        json c = ws.config;
        edit(c);
        return config_error(c.dump(), ws.dir.path());
    };
    EXPECT_NE(with([](json& c) { c["sampler"] = {{"k", 1}}; }).find("sampler.k"), std::string::npos);
    EXPECT_NE(with([](json& c) { c["sampler"] = {{"d", 0}}; }).find("sampler.d"), std::string::npos);
    EXPECT_NE(with([](json& c) { c["scorer"]["kind"] = "oracle"; }).find("scorer.kind"), std::string::npos);
    EXPECT_NE(with([](json& c) { c["eval"]["test_year"] = 2000; }).find("eval.test_year"), std::string::npos);
    EXPECT_NE(with([](json& c) { c["eval"]["top_k"] = "many"; }).find("eval.top_k"), std::string::npos);
    EXPECT_NE(with([](json& c) { c["quintuple"] = {{"split", {0.5, 0.5, 0.5}}}; }).find("quintuple.split"),
              std::string::npos);
    EXPECT_NE(with([](json& c) { c["years"]["t_end"] = 1990; }).find("years"), std::string::npos);
    EXPECT_NE(with([](json& c) { c["vocabulary"] = "missing.tsv"; }).find("vocabulary"), std::string::npos);
    EXPECT_NE(with([](json& c) { c.erase("corpus"); }).find("corpus"), std::string::npos);
    EXPECT_NE(with([](json& c) { c["scorer"] = {{"kind", "remote"}}; }).find("scorer.endpoint"), std::string::npos);
    EXPECT_NE(config_error("{not json", ws.dir.path()), "");
}

TEST(Config, OverridesAndEnvironment) {
    Workspace ws;
    ws.config["scorer"] = {{"kind", "remote"}, {"endpoint", "http://config:1"}};
    EXPECT_EQ(ws.parsed().scorer.endpoint, "http://config:1");
    ConfigOverrides o;
    o.output_dir = ws.dir / "elsewhere";
    o.seed = 42;
    o.scorer_url = "http://override:2";
    auto cfg = ws.parsed(o);
    EXPECT_EQ(cfg.scorer.endpoint, "http://override:2");
    EXPECT_EQ(cfg.output_dir, ws.dir / "elsewhere");
    EXPECT_EQ(cfg.sampler.seed, 42u);
    EXPECT_EQ(cfg.quintuple.seed, 42u);

    ::setenv("CONCEPT_FORGE_SCORER_URL", "http://env:3", 1);
    EXPECT_EQ(parse_config(ws.config.dump(), ws.dir.path()).scorer.endpoint, "http://env:3");
    ::unsetenv("CONCEPT_FORGE_SCORER_URL");
}

TEST(Pipeline, MissingUpstreamArtifact) {
    Workspace ws;
    std::ostringstream log;
    EXPECT_THROW(run_command("evaluate", ws.parsed(), log), UpstreamMissingError);
    EXPECT_THROW(run_command("nonsense", ws.parsed(), log), ConfigError);
}

TEST(Pipeline, GoldenGraphFromThreePaperCorpus) {
    ct::TempDir dir;
    json c = {{"corpus", kSource + "/tests/golden/three_paper_corpus.jsonl"},
              {"vocabulary", kSource + "/tests/golden/three_paper_vocab.tsv"},
              {"output_dir", (dir / "out").string()},
              {"years", {{"t_start", 2000}, {"t_end", 2002}}}};
    std::ostringstream log;
    run_command("build-graph", parse_config(c.dump(), dir.path(), no_env()), log);
    EXPECT_EQ(read_text(dir / "out" / artifacts::kGraph), read_text(kSource + "/tests/golden/three_paper_graph.json"));
    EXPECT_NE(log.str().find("2001"), std::string::npos);
}

TEST(Pipeline, EmptyCorpusRunsEndToEnd) {
    ct::TempDir dir;
    write_text_atomic(dir / "corpus.jsonl", "");
    write_text_atomic(dir / "vocab.tsv", "alpha\ta\n");
    json c = {{"corpus", "corpus.jsonl"}, {"vocabulary", "vocab.tsv"}, {"years", {{"t_start", 2000}, {"t_end", 2003}}}};
    std::ostringstream log;
    run_command("all", parse_config(c.dump(), dir.path(), no_env()), log);
    EXPECT_EQ(read_text(dir / "out" / artifacts::kSamples), "");
    EXPECT_EQ(read_text(dir / "out" / artifacts::kQuintuples), "");
    auto metrics = json::parse(read_text(dir / "out" / artifacts::kMetricsJson));
    EXPECT_TRUE(metrics["accuracy"].is_null());
}

TEST(Pipeline, PerfectStubTableGivesAllOnes) {
    Workspace ws;
    auto cfg = ws.parsed();
    auto store = load_corpus(cfg.corpus);
    auto g = build_evolving_graph(build_index(store, load_vocabulary(cfg.vocabulary)), store, 2000, 2010);
    std::string table;
    for (const auto& e : new_edges(g, 2010)) {
        table += json({{"c_u", e.lo}, {"c_v", e.hi}, {"t", 2010}, {"related", 1.0}, {"unrelated", 0.0}}).dump() + "\n";
    }
    ASSERT_FALSE(table.empty());
    write_text_atomic(ws.dir / "table.jsonl", table);
    ws.config["scorer"] = {{"kind", "stub"}, {"table", "table.jsonl"}};
    ws.config["eval"]["top_k"] = nullptr;
    ws.config["eval"]["full_candidates"] = true;
    std::ostringstream log;
    run_command("all", ws.parsed(), log);
    auto m = json::parse(read_text(ws.out() / artifacts::kMetricsJson));
    for (const auto& key : {"accuracy", "all_precision", "all_recall", "all_f1", "new_precision", "new_recall", "new_f1"}) {
        EXPECT_EQ(m[key], 1.0) << key;
    }
}

TEST(Pipeline, RerunsAreByteIdentical) {
    Workspace ws;
    ws.config["sampler"] = {{"d", 2}, {"max_negatives_per_anchor", 2}, {"seed", 5}};
    std::ostringstream log;
    run_command("all", ws.parsed(), log);
    auto first = snapshot_dir(ws.out());
    fs::remove_all(ws.out());
    run_command("all", ws.parsed(), log);
    auto second = snapshot_dir(ws.out());
    EXPECT_EQ(first, second);
    for (const char* name : {artifacts::kGraph, artifacts::kSamples, artifacts::kQuintuples, artifacts::kPrediction,
                             artifacts::kMetricsJson, artifacts::kMetricsCsv, artifacts::kTextReport,
                             artifacts::kTrainIds, artifacts::kValidIds, artifacts::kTestIds}) {
        EXPECT_EQ(first.count(name), 1u) << name;
    }
    EXPECT_EQ(first.count(".lock"), 0u);
}

TEST(Pipeline, LockConflictIsRejected) {
    Workspace ws;
    fs::create_directories(ws.out());
    {
        OutputLock held(ws.out());
        std::ostringstream log;
        EXPECT_THROW(run_command("build-graph", ws.parsed(), log), StateError);
        EXPECT_THROW(OutputLock again(ws.out()), StateError);
    }
    OutputLock after(ws.out());
}

TEST(ExitCodes, MapErrorKinds) {
    EXPECT_EQ(exit_code_for(ConfigError("x")), 2);
    EXPECT_EQ(exit_code_for(UpstreamMissingError("f", "p")), 3);
    EXPECT_EQ(exit_code_for(TransportError("x", 3)), 4);
    EXPECT_EQ(exit_code_for(StateError("x")), 1);
    EXPECT_EQ(exit_code_for(std::runtime_error("x")), 1);
}

TEST(Cli, ExitCodes) {
    Workspace ws;
    auto config = ws.write_config().string();
    EXPECT_EQ(run_cli("evaluate --config '" + config + "'"), 3);
    EXPECT_EQ(run_cli("all --config '" + config + "'"), 0);
    EXPECT_TRUE(fs::exists(ws.out() / artifacts::kMetricsCsv));
    EXPECT_EQ(run_cli("all --config '" + (ws.dir / "absent.json").string() + "'"), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);
    EXPECT_EQ(run_cli(""), 2);

    ws.config["scorer"] = {{"kind", "remote"}, {"endpoint", "http://config.invalid:1"}};
    auto remote = ws.write_config("remote.json").string();
    EXPECT_EQ(run_cli("predict --config '" + remote + "'", "CONCEPT_FORGE_SCORER_URL=http://127.0.0.1:1"), 4);
}

TEST(Cli, BadConfigFailsBeforeWritingAnything) {
    Workspace ws;
    ws.config["sampler"] = {{"k", 0}};
    auto config = ws.write_config().string();
    EXPECT_EQ(run_cli("all --config '" + config + "'"), 2);
    EXPECT_FALSE(fs::exists(ws.out()));
}

TEST(Cli, OutAndSeedFlags) {
    Workspace ws;
    auto config = ws.write_config().string();
    auto out = ws.dir / "custom";
    EXPECT_EQ(run_cli("sample --config '" + config + "' --out '" + out.string() + "' --seed 3"), 3);
    EXPECT_EQ(run_cli("build-graph --config '" + config + "' --out '" + out.string() + "'"), 0);
    EXPECT_EQ(run_cli("sample --config '" + config + "' --out '" + out.string() + "' --seed 3"), 0);
    EXPECT_TRUE(fs::exists(out / artifacts::kSamples));
    EXPECT_FALSE(fs::exists(ws.out()));
}

TEST(Random, KnownValuesAndDeterminism) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
    EXPECT_EQ(derive_seed(1, "x"), derive_seed(1, "x"));
    EXPECT_NE(derive_seed(1, "x"), derive_seed(2, "x"));
    EXPECT_NE(derive_seed(1, "x"), derive_seed(1, "y"));
    EXPECT_NE(derive_seed(1, "x", 1), derive_seed(1, "x", 2));
}

TEST(Random, UniformIndexAndShuffle) {
    std::mt19937_64 rng(1);
    std::array<int, 5> counts{};
    for (int i = 0; i < 50000; ++i) ++counts[uniform_index(rng, 5)];
    for (int c : counts) EXPECT_NEAR(c / 50000.0, 0.2, 0.01);

    std::vector<int> v(20);
    std::iota(v.begin(), v.end(), 0);
    auto a = v, b = v;
    std::mt19937_64 r1(9), r2(9);
    stable_shuffle(a.begin(), a.end(), r1);
    stable_shuffle(b.begin(), b.end(), r2);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, v);
    std::sort(a.begin(), a.end());
    EXPECT_EQ(a, v);
}

TEST(Parallel, ChunksCoverTheRangeInOrder) {
    for (std::size_t n : {0u, 1u, 63u, 64u, 65u, 1000u}) {
        auto parts = parallel_chunks(n, [](std::size_t b, std::size_t e) { return std::pair{b, e}; }, 16);
        std::size_t next = 0;
        for (auto [b, e] : parts) {
            EXPECT_EQ(b, next);
            EXPECT_GT(e, b);
            next = e;
        }
        EXPECT_EQ(next, n);
    }
}
