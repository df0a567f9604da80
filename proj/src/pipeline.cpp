#include "concept_forge/pipeline.hpp"

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <fcntl.h>
#include <ostream>
#include <set>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#include "concept_forge/errors.hpp"
#include "concept_forge/eval.hpp"
#include "concept_forge/graph.hpp"
#include "concept_forge/io.hpp"
#include "concept_forge/textmetrics.hpp"

namespace cforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Typed field access that names the field on failure.
class Section {
public:
    Section(const json& node, std::string prefix) : node_(node), prefix_(std::move(prefix)) {
        if (!node_.is_object()) throw ConfigError("config field '" + name_or_root() + "' must be an object");
    }

    bool has(const char* key) const { return node_.contains(key) && !node_.at(key).is_null(); }
    // Present and explicitly null, which disables an optional limit.
    bool is_null(const char* key) const { return node_.contains(key) && node_.at(key).is_null(); }

    std::string field(const char* key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

    Section child(const char* key) const {
        static const json kEmpty = json::object();
        return has(key) ? Section(node_.at(key), field(key)) : Section(kEmpty, field(key));
    }

    const json& raw(const char* key) const { return node_.at(key); }

    std::string string(const char* key) const {
        const auto& v = node_.at(key);
        if (!v.is_string()) fail(key, "must be a string");
        return v.get<std::string>();
    }

    long long integer(const char* key) const {
        const auto& v = node_.at(key);
        if (!v.is_number_integer()) fail(key, "must be an integer");
        return v.get<long long>();
    }

    long long integer_at_least(const char* key, long long min) const {
        long long v = integer(key);
        if (v < min) fail(key, "must be >= " + std::to_string(min));
        return v;
    }

    double number(const char* key) const {
        const auto& v = node_.at(key);
        if (!v.is_number()) fail(key, "must be a number");
        return v.get<double>();
    }

    bool boolean(const char* key) const {
        const auto& v = node_.at(key);
        if (!v.is_boolean()) fail(key, "must be a boolean");
        return v.get<bool>();
    }

    std::vector<std::string> strings(const char* key) const {
        const auto& v = node_.at(key);
        if (!v.is_array()) fail(key, "must be an array of strings");
        std::vector<std::string> out;
        for (const auto& e : v) {
            if (!e.is_string()) fail(key, "must be an array of strings");
            out.push_back(e.get<std::string>());
        }
        return out;
    }

    [[noreturn]] void fail(const char* key, const std::string& why) const {
        throw ConfigError("config field '" + field(key) + "' " + why);
    }

private:
    std::string name_or_root() const { return prefix_.empty() ? "<root>" : prefix_; }

    const json& node_;
    std::string prefix_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

ScorerKind parse_scorer_kind(const Section& s) {
    auto kind = s.string("kind");
    if (kind == "heuristic") return ScorerKind::Heuristic;
    if (kind == "stub") return ScorerKind::Stub;
    if (kind == "remote") return ScorerKind::Remote;
    s.fail("kind", "must be one of heuristic, stub, remote (got '" + kind + "')");
}

fs::path artifact(const PipelineConfig& cfg, const char* name) { return cfg.output_dir / name; }

// Existing upstream artifact, or UpstreamMissingError naming its producer.
fs::path upstream(const PipelineConfig& cfg, const char* name, const char* producer) {
    auto path = artifact(cfg, name);
    if (!fs::exists(path)) throw UpstreamMissingError(path.string(), producer);
    return path;
}

struct Loaded {
    CorpusStore corpus;
    CorpusIndex index;
};

Loaded load_inputs(const PipelineConfig& cfg) {
    auto corpus = load_corpus(cfg.corpus);
    auto vocab = load_vocabulary(cfg.vocabulary);
    auto index = build_index(corpus, vocab);
    return {std::move(corpus), std::move(index)};
}

// History visible to training and prediction: everything before the test year.
EvolvingGraph history_of(const EvolvingGraph& g, int test_year) { return g.truncated(test_year - 1); }

void ensure_output_dir(const PipelineConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + cfg.output_dir.string() + "': " + ec.message());
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::istringstream in(read_text(path));
    std::vector<std::string> out;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty()) out.push_back(line);
    }
    return out;
}

struct Generation {
    std::string input;
    std::string output;
    std::string reference;
};

std::vector<Generation> read_generations(const fs::path& path) {
    std::istringstream in(read_text(path));
    std::vector<Generation> out;
    std::size_t line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json row;
        try {
            row = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
        }
        Generation g;
        for (auto [key, dst] : {std::pair<const char*, std::string*>{"input", &g.input},
                                {"output", &g.output},
                                {"reference", &g.reference}}) {
            if (!row.is_object() || !row.contains(key) || !row.at(key).is_string()) {
                throw ParseError(line_no, std::string("field '") + key + "' must be a string");
            }
            *dst = row.at(key).get<std::string>();
        }
        out.push_back(std::move(g));
    }
    return out;
}

}  // namespace

PipelineConfig parse_config(std::string_view json_text, const fs::path& base_dir,
                            const ConfigOverrides& overrides) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    Section root(doc, "");
    PipelineConfig cfg;

    for (const char* key : {"corpus", "vocabulary"}) {
        if (!root.has(key)) root.fail(key, "is required");
    }
    cfg.corpus = resolve(base_dir, root.string("corpus"));
    cfg.vocabulary = resolve(base_dir, root.string("vocabulary"));
    if (!fs::is_regular_file(cfg.corpus)) root.fail("corpus", "names a missing file '" + cfg.corpus.string() + "'");
    if (!fs::is_regular_file(cfg.vocabulary)) {
        root.fail("vocabulary", "names a missing file '" + cfg.vocabulary.string() + "'");
    }
    if (root.has("output_dir")) cfg.output_dir = resolve(base_dir, root.string("output_dir"));
    else cfg.output_dir = base_dir / cfg.output_dir;

    auto years = root.child("years");
    if (years.has("t_start")) cfg.t_start = static_cast<int>(years.integer("t_start"));
    if (years.has("t_end")) cfg.t_end = static_cast<int>(years.integer("t_end"));
    if (cfg.t_start > cfg.t_end) years.fail("t_start", "must not exceed years.t_end");

    auto sampler = root.child("sampler");
    if (sampler.has("k")) cfg.sampler.k = static_cast<int>(sampler.integer_at_least("k", 2));
    if (sampler.has("d")) cfg.sampler.d = static_cast<int>(sampler.integer_at_least("d", 1));
    if (sampler.has("max_negatives_per_anchor")) {
        cfg.sampler.max_negatives_per_anchor =
            static_cast<std::size_t>(sampler.integer_at_least("max_negatives_per_anchor", 0));
    }
    if (sampler.has("seed")) cfg.sampler.seed = static_cast<std::uint64_t>(sampler.integer_at_least("seed", 0));

    auto scorer = root.child("scorer");
    if (scorer.has("kind")) cfg.scorer.kind = parse_scorer_kind(scorer);
    if (scorer.has("endpoint")) cfg.scorer.endpoint = scorer.string("endpoint");
    if (scorer.has("table")) cfg.scorer.table = resolve(base_dir, scorer.string("table"));
    if (scorer.has("batch_size")) {
        cfg.scorer.remote.batch_size = static_cast<std::size_t>(scorer.integer_at_least("batch_size", 1));
    }
    if (scorer.has("max_attempts")) {
        cfg.scorer.remote.max_attempts = static_cast<int>(scorer.integer_at_least("max_attempts", 1));
    }
    if (scorer.has("parallelism")) {
        cfg.scorer.remote.parallelism = static_cast<std::size_t>(scorer.integer_at_least("parallelism", 1));
    }
    if (scorer.has("timeout_seconds")) {
        cfg.scorer.timeout_seconds = scorer.number("timeout_seconds");
        if (!(cfg.scorer.timeout_seconds > 0)) scorer.fail("timeout_seconds", "must be positive");
    }
    std::optional<std::string> env_url = overrides.scorer_url;
    if (!env_url) {
        if (const char* v = std::getenv("CONCEPT_FORGE_SCORER_URL"); v && *v) env_url = v;
    }
    if (env_url && !env_url->empty()) cfg.scorer.endpoint = *env_url;
    if (cfg.scorer.kind == ScorerKind::Remote && cfg.scorer.endpoint.empty()) {
        scorer.fail("endpoint", "is required for the remote scorer (or set CONCEPT_FORGE_SCORER_URL)");
    }
    if (cfg.scorer.kind == ScorerKind::Stub && !cfg.scorer.table.empty() &&
        !fs::is_regular_file(cfg.scorer.table)) {
        scorer.fail("table", "names a missing file '" + cfg.scorer.table.string() + "'");
    }

    auto eval = root.child("eval");
    cfg.eval.test_year = eval.has("test_year") ? static_cast<int>(eval.integer("test_year")) : cfg.t_end;
    if (cfg.eval.test_year <= cfg.t_start || cfg.eval.test_year > cfg.t_end) {
        eval.fail("test_year", "must satisfy years.t_start < test_year <= years.t_end");
    }
    if (eval.has("clamp")) cfg.eval.clamp = eval.boolean("clamp");
    if (eval.has("full_candidates")) cfg.eval.full_candidates = eval.boolean("full_candidates");
    if (eval.has("top_k")) cfg.eval.top_k = static_cast<std::size_t>(eval.integer_at_least("top_k", 1));
    else if (eval.is_null("top_k")) cfg.eval.top_k.reset();

    auto quint = root.child("quintuple");
    if (quint.has("citation_threshold")) cfg.quintuple.citation_threshold = quint.integer_at_least("citation_threshold", 0);
    if (quint.has("seed")) cfg.quintuple.seed = static_cast<std::uint64_t>(quint.integer_at_least("seed", 0));
    if (quint.has("split")) {
        const auto& v = quint.raw("split");
        if (!v.is_array() || v.size() != 3) quint.fail("split", "must be an array of three numbers");
        for (std::size_t i = 0; i < 3; ++i) {
            if (!v[i].is_number()) quint.fail("split", "must be an array of three numbers");
            cfg.quintuple.split[i] = v[i].get<double>();
        }
        double sum = cfg.quintuple.split[0] + cfg.quintuple.split[1] + cfg.quintuple.split[2];
        for (double r : cfg.quintuple.split) {
            if (!(r > 0)) quint.fail("split", "ratios must be positive");
        }
        if (std::abs(sum - 1.0) > 1e-9) quint.fail("split", "ratios must sum to 1");
    }
    auto filter = quint.child("filter");
    auto& rules = cfg.quintuple.filter;
    if (filter.has("keywords")) rules.keyword_blocklist = filter.strings("keywords");
    if (filter.has("sections")) rules.section_blocklist = filter.strings("sections");
    if (filter.has("max_numeric_fraction")) {
        rules.max_numeric_fraction = filter.number("max_numeric_fraction");
        if (*rules.max_numeric_fraction < 0 || *rules.max_numeric_fraction > 1) {
            filter.fail("max_numeric_fraction", "must lie in [0, 1]");
        }
    } else if (filter.is_null("max_numeric_fraction")) {
        rules.max_numeric_fraction.reset();
    }
    if (filter.has("min_tokens")) rules.min_tokens = static_cast<std::size_t>(filter.integer_at_least("min_tokens", 0));
    else if (filter.is_null("min_tokens")) rules.min_tokens.reset();
    if (filter.has("max_tokens")) rules.max_tokens = static_cast<std::size_t>(filter.integer_at_least("max_tokens", 0));
    else if (filter.is_null("max_tokens")) rules.max_tokens.reset();
    if (rules.min_tokens && rules.max_tokens && *rules.min_tokens > *rules.max_tokens) {
        filter.fail("min_tokens", "must not exceed " + filter.field("max_tokens"));
    }

    auto analyze = root.child("analyze");
    if (analyze.has("generations")) {
        cfg.generations = resolve(base_dir, analyze.string("generations"));
        if (!fs::is_regular_file(cfg.generations)) {
            analyze.fail("generations", "names a missing file '" + cfg.generations.string() + "'");
        }
    }

    if (overrides.output_dir) cfg.output_dir = *overrides.output_dir;
    if (overrides.seed) {
        cfg.sampler.seed = *overrides.seed;
        cfg.quintuple.seed = *overrides.seed;
    }
    return cfg;
}

PipelineConfig load_config(const fs::path& path, const ConfigOverrides& overrides) {
    if (!fs::is_regular_file(path)) throw ConfigError("config file '" + path.string() + "' does not exist");
    return parse_config(read_text(path), path.parent_path(), overrides);
}

OutputLock::OutputLock(const fs::path& output_dir) : path_(output_dir / ".lock") {
    int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
        if (errno == EEXIST) {
            throw StateError("output directory '" + output_dir.string() +
                             "' is locked by another run (remove '" + path_.string() + "' if stale)");
        }
        throw IoError("cannot create lock '" + path_.string() + "': " + std::strerror(errno));
    }
    auto pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto written = ::write(fd, pid.data(), pid.size());
    ::close(fd);
}

OutputLock::~OutputLock() {
    std::error_code ec;
    fs::remove(path_, ec);
}

std::unique_ptr<Predictor> make_scorer(const ScorerConfig& cfg, const EvolvingGraph& graph) {
    switch (cfg.kind) {
    case ScorerKind::Heuristic:
        return std::make_unique<HeuristicScorer>(graph);
    case ScorerKind::Stub:
        if (cfg.table.empty()) return std::make_unique<StubScorer>();
        return std::make_unique<StubScorer>(StubScorer::from_jsonl(cfg.table));
    case ScorerKind::Remote:
        return std::make_unique<RemoteScorer>(
            std::make_shared<HttpTransport>(cfg.endpoint, cfg.timeout_seconds), cfg.remote);
    }
    throw ConfigError("unknown scorer kind");
}

void cmd_build_graph(const PipelineConfig& cfg, std::ostream& log) {
    auto in = load_inputs(cfg);
    auto g = build_evolving_graph(in.index, in.corpus, cfg.t_start, cfg.t_end);
    ensure_output_dir(cfg);
    write_graph(g, artifact(cfg, artifacts::kGraph));

    log << "graph: " << g.num_concepts() << " concepts, years " << g.t_start() << ".." << g.t_end() << "\n";
    log << "year\tnodes\tedges\tnew_edges\n";
    std::size_t previous = 0;
    for (int t = g.t_start(); t <= g.t_end(); ++t) {
        auto edges = g.edges(t);
        std::set<ConceptId> nodes;
        for (const auto& e : edges) {
            nodes.insert(e.lo);
            nodes.insert(e.hi);
        }
        log << t << "\t" << nodes.size() << "\t" << edges.size() << "\t" << edges.size() - previous << "\n";
        previous = edges.size();
    }
}

void cmd_sample(const PipelineConfig& cfg, std::ostream& log) {
    auto g = read_graph(upstream(cfg, artifacts::kGraph, "build-graph"));
    auto history = history_of(g, cfg.eval.test_year);
    auto samples = generate_positives(history);
    auto negatives = generate_negatives(history, cfg.sampler);
    std::size_t positives = samples.size();
    samples.insert(samples.end(), negatives.begin(), negatives.end());
    write_text_atomic(artifact(cfg, artifacts::kSamples), samples_to_jsonl(std::move(samples)));
    log << "samples: " << positives << " positive, " << negatives.size() << " negative (years "
        << history.t_start() << ".." << history.t_end() << ", k=" << cfg.sampler.k << ", d=" << cfg.sampler.d
        << ")\n";
}

void cmd_quintuples(const PipelineConfig& cfg, std::ostream& log) {
    auto in = load_inputs(cfg);
    ExtractionSummary extraction;
    auto raw = extract_quintuples(in.index, in.corpus, cfg.quintuple.citation_threshold, &extraction);
    BindSummary binding;
    auto bound = bind_all(raw, in.corpus, in.index, cfg.quintuple.seed, &binding);
    auto kept = filter_quintuples(bound, cfg.quintuple.filter);
    auto split = split_dataset(kept, cfg.quintuple.split, cfg.quintuple.seed);

    ensure_output_dir(cfg);
    write_text_atomic(artifact(cfg, artifacts::kQuintuples), quintuples_to_jsonl(kept));
    write_text_atomic(artifact(cfg, artifacts::kTrainIds), manifest_of(split.train));
    write_text_atomic(artifact(cfg, artifacts::kValidIds), manifest_of(split.valid));
    write_text_atomic(artifact(cfg, artifacts::kTestIds), manifest_of(split.test));

    nlohmann::ordered_json summary;
    summary["targets_considered"] = extraction.targets_considered;
    summary["targets_below_threshold"] = extraction.targets_below_threshold;
    summary["dangling_references"] = extraction.dangling_references;
    summary["extracted"] = raw.size();
    summary["bound"] = binding.bound;
    summary["unbindable"] = binding.dropped;
    summary["filtered_out"] = bound.size() - kept.size();
    summary["kept"] = kept.size();
    summary["train"] = split.train.size();
    summary["valid"] = split.valid.size();
    summary["test"] = split.test.size();
    write_text_atomic(artifact(cfg, artifacts::kQuintupleSummary), summary.dump(2) + "\n");

    log << "quintuples: " << raw.size() << " extracted, " << binding.dropped << " unbindable, "
        << bound.size() - kept.size() << " filtered, " << kept.size() << " kept (train " << split.train.size()
        << ", valid " << split.valid.size() << ", test " << split.test.size() << ")\n";
    if (extraction.dangling_references > 0) {
        log << "quintuples: " << extraction.dangling_references << " references point outside the corpus\n";
    }
}

void cmd_predict(const PipelineConfig& cfg, std::ostream& log) {
    auto g = read_graph(upstream(cfg, artifacts::kGraph, "build-graph"));
    auto history = history_of(g, cfg.eval.test_year);
    auto scorer = make_scorer(cfg.scorer, history);
    PredictOptions options;
    options.clamp_existing = cfg.eval.clamp;
    options.top_k = cfg.eval.top_k;
    options.k = cfg.sampler.k;
    options.full_candidates = cfg.eval.full_candidates;
    auto result = predict_snapshot(history, *scorer, cfg.eval.test_year, options);
    write_text_atomic(artifact(cfg, artifacts::kPrediction), prediction_to_json(result));
    log << "predict: " << result.predicted_edges.size() << " edges predicted for " << result.target_year << " ("
        << result.ranked_candidates.size() << " ranked candidates kept)\n";
}

void cmd_evaluate(const PipelineConfig& cfg, std::ostream& log) {
    auto g = read_graph(upstream(cfg, artifacts::kGraph, "build-graph"));
    auto prediction = prediction_from_json(read_text(upstream(cfg, artifacts::kPrediction, "predict")));
    auto metrics = evaluate_prediction(g, prediction, cfg.eval.test_year);
    write_text_atomic(artifact(cfg, artifacts::kMetricsJson), metrics_to_json(metrics));
    write_text_atomic(artifact(cfg, artifacts::kMetricsCsv), metrics_to_csv(metrics));
    log << metrics_to_csv(metrics);
}

void cmd_analyze(const PipelineConfig& cfg, std::ostream& log) {
    std::vector<Generation> items;
    if (!cfg.generations.empty()) {
        items = read_generations(cfg.generations);
    } else {
        // Extractive baseline over the test split: the two cited sentences
        // stand in for a generated idea.
        auto all = import_quintuples(upstream(cfg, artifacts::kQuintuples, "quintuples"));
        auto ids = read_lines(upstream(cfg, artifacts::kTestIds, "quintuples"));
        std::set<std::string> wanted(ids.begin(), ids.end());
        for (const auto& q : all) {
            if (wanted.count(q.id()) == 0) continue;
            items.push_back({serialize_seq(q), q.sent_i + " " + q.sent_j, q.idea()});
        }
    }

    TextReport mean;
    std::array<std::size_t, 5> defined{};
    std::array<double, 5> overlap_sum{};
    for (const auto& item : items) {
        auto overlap = overlap_report(item.input, item.output);
        for (std::size_t n = 0; n < 5; ++n) {
            if (overlap.percent[n]) {
                overlap_sum[n] += *overlap.percent[n];
                ++defined[n];
            }
        }
        std::string refs[] = {item.reference};
        mean.bleu += bleu(item.output, refs);
        mean.rouge_l += rouge_l(item.output, item.reference);
    }
    for (std::size_t n = 0; n < 5; ++n) {
        if (defined[n] > 0) mean.overlap.percent[n] = overlap_sum[n] / static_cast<double>(defined[n]);
    }
    if (!items.empty()) {
        mean.bleu /= static_cast<double>(items.size());
        mean.rouge_l /= static_cast<double>(items.size());
    }
    ensure_output_dir(cfg);
    write_text_atomic(artifact(cfg, artifacts::kTextReport), text_report_to_json(mean));
    log << "analyze: " << items.size() << " items, bleu " << mean.bleu << ", rouge_l " << mean.rouge_l << "\n";
}

void cmd_all(const PipelineConfig& cfg, std::ostream& log) {
    cmd_build_graph(cfg, log);
    cmd_sample(cfg, log);
    cmd_quintuples(cfg, log);
    cmd_predict(cfg, log);
    cmd_evaluate(cfg, log);
    cmd_analyze(cfg, log);
}

void run_command(std::string_view command, const PipelineConfig& cfg, std::ostream& log) {
    using Fn = void (*)(const PipelineConfig&, std::ostream&);
    static const std::pair<std::string_view, Fn> kCommands[] = {
        {"build-graph", cmd_build_graph}, {"sample", cmd_sample},     {"quintuples", cmd_quintuples},
        {"predict", cmd_predict},         {"evaluate", cmd_evaluate}, {"analyze", cmd_analyze},
        {"all", cmd_all},
    };
    for (auto [name, fn] : kCommands) {
        if (name != command) continue;
        ensure_output_dir(cfg);
        OutputLock lock(cfg.output_dir);
        fn(cfg, log);
        return;
    }
    throw ConfigError("unknown command '" + std::string(command) + "'");
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 2;
    if (dynamic_cast<const UpstreamMissingError*>(&e)) return 3;
    if (dynamic_cast<const TransportError*>(&e)) return 4;
    return 1;
}

}  // namespace cforge
