#pragma once
// Link scoring and snapshot prediction.
//
// Every scorer maps serialized link samples to a pair of logits for the two
// label words. A pair is predicted connected iff related > unrelated.
//
// Wire protocol (JSON over HTTP POST, or one JSON document per line on a
// stream):
//   request  {"sequences": [str, ...]}
//   response {"logits": [[related, unrelated], ...]}   same length as request

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "concept_forge/graph.hpp"
#include "concept_forge/sampler.hpp"

namespace cforge {

struct PairLogits {
    double related = 0.0;
    double unrelated = 0.0;

    double margin() const { return related - unrelated; }
    // Ties count as unrelated.
    bool is_related() const { return related > unrelated; }

    friend bool operator==(const PairLogits&, const PairLogits&) = default;
};

class Predictor {
public:
    virtual ~Predictor() = default;
    // One result per sample, in input order.
    virtual std::vector<PairLogits> score(std::span<const LinkSample> samples) = 0;
};

// Scores through `scorer` and checks the result length and finiteness.
std::vector<PairLogits> score_batch(Predictor& scorer, std::span<const LinkSample> samples);

// Lookup table keyed by (c_u, c_v, t); either orientation of the pair matches.
class StubScorer final : public Predictor {
public:
    using Key = std::tuple<ConceptId, ConceptId, int>;

    explicit StubScorer(PairLogits fallback = {0.0, 0.0}) : fallback_(fallback) {}
    void set(const ConceptId& u, const ConceptId& v, int t, PairLogits logits);
    std::vector<PairLogits> score(std::span<const LinkSample> samples) override;

    // JSONL rows {"c_u", "c_v", "t", "related", "unrelated"}.
    static StubScorer from_jsonl(const std::filesystem::path& path, PairLogits fallback = {});

private:
    std::map<Key, PairLogits> table_;
    PairLogits fallback_;
};

// related = log(1 + common neighbours) + Jaccard, unrelated = 0, evaluated on
// snapshot t.
PairLogits heuristic_score(const EvolvingGraph& g, int t, const ConceptPair& pair);

// Scores a sample dated t on the latest snapshot strictly before t (clamped to
// the graph's last year); before t_start the graph is empty and the score is 0.
class HeuristicScorer final : public Predictor {
public:
    explicit HeuristicScorer(const EvolvingGraph& g) : graph_(g) {}
    std::vector<PairLogits> score(std::span<const LinkSample> samples) override;

private:
    const EvolvingGraph& graph_;
};

// Independent U(0, 1) logits per sample text; a knowledge-free baseline.
class UniformRandomScorer final : public Predictor {
public:
    explicit UniformRandomScorer(std::uint64_t seed) : seed_(seed) {}
    std::vector<PairLogits> score(std::span<const LinkSample> samples) override;

private:
    std::uint64_t seed_;
};

std::string encode_score_request(std::span<const std::string> sequences);
std::vector<std::string> decode_score_request(std::string_view body);
std::string encode_score_response(std::span<const PairLogits> logits);
// Throws ProtocolError on malformed JSON, a wrong length or non-finite values.
std::vector<PairLogits> decode_score_response(std::string_view body, std::size_t expected);

// Carries one request body and returns the response body. Implementations
// must be safe to call from several threads. Failures throw TransportError.
class Transport {
public:
    virtual ~Transport() = default;
    virtual std::string roundtrip(const std::string& request) = 0;
};

class HttpTransport final : public Transport {
public:
    // url is http://host[:port][/path]; the path defaults to /score.
    explicit HttpTransport(const std::string& url, double timeout_seconds = 30.0);
    std::string roundtrip(const std::string& request) override;

private:
    std::string origin_;
    std::string path_;
    double timeout_seconds_;
};

// Line-delimited JSON over a pair of streams (e.g. a child process's stdio).
class StreamTransport final : public Transport {
public:
    StreamTransport(std::istream& in, std::ostream& out) : in_(in), out_(out) {}
    std::string roundtrip(const std::string& request) override;

private:
    std::istream& in_;
    std::ostream& out_;
    std::mutex mutex_;
};

struct RemoteOptions {
    std::size_t batch_size = 64;
    int max_attempts = 3;
    std::size_t parallelism = 1;
};

class RemoteScorer final : public Predictor {
public:
    RemoteScorer(std::shared_ptr<Transport> transport, RemoteOptions options = {});
    std::vector<PairLogits> score(std::span<const LinkSample> samples) override;

    // Requests sent so far, including retries.
    std::size_t requests_sent() const { return requests_sent_; }

private:
    std::vector<PairLogits> send_batch(std::span<const LinkSample> batch);

    std::shared_ptr<Transport> transport_;
    RemoteOptions options_;
    std::atomic<std::size_t> requests_sent_{0};
};

struct RankedPair {
    ConceptPair pair;
    PairLogits logits;
    double score = 0.0;  // related - unrelated
};

struct PredictionResult {
    int target_year = 0;
    std::vector<ConceptId> concepts;
    std::vector<ConceptPair> predicted_edges;    // sorted
    std::vector<RankedPair> ranked_candidates;   // score descending, ties by pair
};

struct PredictOptions {
    bool clamp_existing = true;
    std::optional<std::size_t> top_k;
    int k = 2;
    // Score every non-edge instead of the k-hop non-edges.
    bool full_candidates = false;
};

// Non-edges of snapshot `year` within k hops (or all non-edges), sorted.
std::vector<ConceptPair> candidate_pairs(const EvolvingGraph& g, int year, int k, bool all_pairs);

// Forecasts snapshot `target_year` from snapshot target_year - 1. The target
// is g.t_end() + 1 (forecast) or g.t_end() (the last snapshot is held out).
PredictionResult predict_snapshot(const EvolvingGraph& g, Predictor& scorer, int target_year,
                                  const PredictOptions& options = {});

std::string prediction_to_json(const PredictionResult& r);
PredictionResult prediction_from_json(std::string_view text);

}  // namespace cforge
