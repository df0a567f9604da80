#pragma once
// Evolving concept co-occurrence graph.
//
// Each edge is stored once with the first year it appears. Snapshot t holds
// every edge born at or before t, so edges never disappear and
// edges(t - 1) is a subset of edges(t) without any extra bookkeeping.

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "concept_forge/corpus.hpp"

namespace cforge {

// Unordered concept pair in canonical form: lo < hi.
struct ConceptPair {
    ConceptId lo;
    ConceptId hi;

    // Throws Error when a == b.
    static ConceptPair of(const ConceptId& a, const ConceptId& b);

    friend auto operator<=>(const ConceptPair&, const ConceptPair&) = default;
    friend bool operator==(const ConceptPair&, const ConceptPair&) = default;
};

struct Snapshot {
    int year = 0;
    std::vector<ConceptPair> edges;  // sorted, unique
};

class EvolvingGraph {
public:
    EvolvingGraph() = default;
    // `first_seen` maps each edge to the year it appears. Throws Error for an
    // endpoint outside `concepts` or a year outside [t_start, t_end].
    EvolvingGraph(std::vector<ConceptId> concepts, int t_start, int t_end,
                  std::map<ConceptPair, int> first_seen);

    const std::vector<ConceptId>& concepts() const { return concepts_; }
    std::size_t num_concepts() const { return concepts_.size(); }
    int t_start() const { return t_start_; }
    int t_end() const { return t_end_; }
    bool contains(const ConceptId& c) const { return index_.count(c) != 0; }

    // A_t(u, v). Years before t_start have no edges; years after t_end throw RangeError.
    bool has_edge(const ConceptId& u, const ConceptId& v, int t) const;
    std::optional<int> first_seen(const ConceptPair& pair) const;
    const std::map<ConceptPair, int>& first_seen_years() const { return first_seen_; }

    std::vector<ConceptPair> edges(int t) const;
    std::size_t edge_count(int t) const;
    std::vector<Snapshot> snapshots() const;

    // Neighbours of c in snapshot t, sorted. Throws LookupError for unknown c.
    std::vector<ConceptId> neighbors(const ConceptId& c, int t) const;

    // Same concepts and history, cut at `new_end` (t_start <= new_end <= t_end).
    EvolvingGraph truncated(int new_end) const;

    // Dense index helpers for hot loops.
    std::size_t index_of(const ConceptId& c) const;
    const std::vector<std::pair<std::size_t, int>>& adjacency(std::size_t i) const {
        return adjacency_[i];
    }

private:
    void check_year(int t) const;

    std::vector<ConceptId> concepts_;
    std::unordered_map<ConceptId, std::size_t> index_;
    int t_start_ = 0;
    int t_end_ = -1;
    std::map<ConceptPair, int> first_seen_;
    // (neighbour index, first year) per concept.
    std::vector<std::vector<std::pair<std::size_t, int>>> adjacency_;
};

// A_t(u, v) = 1 iff some paper with t_start <= year <= t has both u and v.
// Papers outside [t_start, t_end] are ignored. Throws RangeError if t_start > t_end.
EvolvingGraph build_evolving_graph(const CorpusIndex& index, const CorpusStore& corpus,
                                   int t_start, int t_end);

// edges(t) \ edges(t - 1). Requires t_start < t <= t_end.
std::vector<ConceptPair> new_edges(const EvolvingGraph& g, int t);

// Concepts within shortest-path distance k of c in snapshot t, excluding c.
std::vector<ConceptId> k_hop_neighborhood(const EvolvingGraph& g, int t, const ConceptId& c,
                                          int k);

std::size_t common_neighbors(const EvolvingGraph& g, int t, const ConceptId& u,
                             const ConceptId& v);
// |N(u) & N(v)| / |N(u) | N(v)|, zero when both are isolated.
double jaccard(const EvolvingGraph& g, int t, const ConceptId& u, const ConceptId& v);

// Export format: {"t_start", "t_end", "concepts", "snapshots": [{"year", "edges"}]}
// with canonical, lexicographically sorted edges.
std::string graph_to_json(const EvolvingGraph& g);
EvolvingGraph graph_from_json(const std::string& text);
void write_graph(const EvolvingGraph& g, const std::filesystem::path& path);
EvolvingGraph read_graph(const std::filesystem::path& path);

}  // namespace cforge
