#include "concept_forge/graph.hpp"

#include <algorithm>
#include <deque>
#include <set>

#include <json.hpp>

#include "concept_forge/errors.hpp"
#include "concept_forge/io.hpp"

namespace cforge {

ConceptPair ConceptPair::of(const ConceptId& a, const ConceptId& b) {
    if (a == b) throw Error("self pair on concept '" + a + "'");
    return a < b ? ConceptPair{a, b} : ConceptPair{b, a};
}

EvolvingGraph::EvolvingGraph(std::vector<ConceptId> concepts, int t_start, int t_end,
                             std::map<ConceptPair, int> first_seen)
    : concepts_(std::move(concepts)),
      t_start_(t_start),
      t_end_(t_end),
      first_seen_(std::move(first_seen)) {
    if (t_start_ > t_end_) {
        throw RangeError("empty year range " + std::to_string(t_start_) + ".." +
                         std::to_string(t_end_));
    }
    std::sort(concepts_.begin(), concepts_.end());
    concepts_.erase(std::unique(concepts_.begin(), concepts_.end()), concepts_.end());
    index_.reserve(concepts_.size());
    for (std::size_t i = 0; i < concepts_.size(); ++i) index_.emplace(concepts_[i], i);
    adjacency_.resize(concepts_.size());

    for (const auto& [pair, year] : first_seen_) {
        if (pair.lo >= pair.hi) throw Error("non-canonical pair (" + pair.lo + ", " + pair.hi + ")");
        if (year < t_start_ || year > t_end_) {
            throw Error("edge (" + pair.lo + ", " + pair.hi + ") dated " + std::to_string(year) +
                        " outside the graph range");
        }
        auto lo = index_.find(pair.lo);
        auto hi = index_.find(pair.hi);
        if (lo == index_.end() || hi == index_.end()) {
            throw Error("edge (" + pair.lo + ", " + pair.hi + ") has an unknown endpoint");
        }
        adjacency_[lo->second].emplace_back(hi->second, year);
        adjacency_[hi->second].emplace_back(lo->second, year);
    }
    for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
}

void EvolvingGraph::check_year(int t) const {
    if (t < t_start_ || t > t_end_) {
        throw RangeError("year " + std::to_string(t) + " outside graph range " +
                         std::to_string(t_start_) + ".." + std::to_string(t_end_));
    }
}

std::size_t EvolvingGraph::index_of(const ConceptId& c) const {
    auto it = index_.find(c);
    if (it == index_.end()) throw LookupError("unknown concept '" + c + "'");
    return it->second;
}

bool EvolvingGraph::has_edge(const ConceptId& u, const ConceptId& v, int t) const {
    if (t > t_end_) check_year(t);
    index_of(u);
    index_of(v);
    if (u == v || t < t_start_) return false;
    auto it = first_seen_.find(ConceptPair::of(u, v));
    return it != first_seen_.end() && it->second <= t;
}

std::optional<int> EvolvingGraph::first_seen(const ConceptPair& pair) const {
    auto it = first_seen_.find(pair);
    if (it == first_seen_.end()) return std::nullopt;
    return it->second;
}

std::vector<ConceptPair> EvolvingGraph::edges(int t) const {
    check_year(t);
    std::vector<ConceptPair> out;
    for (const auto& [pair, year] : first_seen_) {
        if (year <= t) out.push_back(pair);
    }
    return out;
}

std::size_t EvolvingGraph::edge_count(int t) const {
    check_year(t);
    return static_cast<std::size_t>(std::count_if(
        first_seen_.begin(), first_seen_.end(), [t](const auto& e) { return e.second <= t; }));
}

std::vector<Snapshot> EvolvingGraph::snapshots() const {
    std::vector<Snapshot> out;
    for (int t = t_start_; t <= t_end_; ++t) out.push_back(Snapshot{t, edges(t)});
    return out;
}

std::vector<ConceptId> EvolvingGraph::neighbors(const ConceptId& c, int t) const {
    check_year(t);
    std::vector<ConceptId> out;
    for (const auto& [j, year] : adjacency_[index_of(c)]) {
        if (year <= t) out.push_back(concepts_[j]);
    }
    return out;
}

EvolvingGraph EvolvingGraph::truncated(int new_end) const {
    check_year(new_end);
    std::map<ConceptPair, int> kept;
    for (const auto& [pair, year] : first_seen_) {
        if (year <= new_end) kept.emplace(pair, year);
    }
    return EvolvingGraph(concepts_, t_start_, new_end, std::move(kept));
}

EvolvingGraph build_evolving_graph(const CorpusIndex& index, const CorpusStore& corpus,
                                   int t_start, int t_end) {
    if (t_start > t_end) {
        throw RangeError("t_start " + std::to_string(t_start) + " > t_end " +
                         std::to_string(t_end));
    }
    std::set<ConceptId> nodes;
    std::map<ConceptPair, int> first_seen;
    for (const auto& paper : corpus.papers()) {
        if (paper.year < t_start || paper.year > t_end) continue;
        const auto& cs = index.concepts_of(paper.id);
        nodes.insert(cs.begin(), cs.end());
        for (std::size_t i = 0; i < cs.size(); ++i) {
            for (std::size_t j = i + 1; j < cs.size(); ++j) {
                auto [it, inserted] = first_seen.emplace(ConceptPair{cs[i], cs[j]}, paper.year);
                if (!inserted) it->second = std::min(it->second, paper.year);
            }
        }
    }
    return EvolvingGraph({nodes.begin(), nodes.end()}, t_start, t_end, std::move(first_seen));
}

std::vector<ConceptPair> new_edges(const EvolvingGraph& g, int t) {
    if (t <= g.t_start() || t > g.t_end()) {
        throw RangeError("new_edges needs t_start < t <= t_end; got " + std::to_string(t));
    }
    std::vector<ConceptPair> out;
    for (const auto& [pair, year] : g.first_seen_years()) {
        if (year == t) out.push_back(pair);
    }
    return out;
}

std::vector<ConceptId> k_hop_neighborhood(const EvolvingGraph& g, int t, const ConceptId& c,
                                          int k) {
    if (k < 1) throw RangeError("k must be positive");
    if (t < g.t_start() || t > g.t_end()) {
        throw RangeError("year " + std::to_string(t) + " outside graph range");
    }
    const std::size_t source = g.index_of(c);
    std::vector<int> dist(g.num_concepts(), -1);
    std::deque<std::size_t> queue{source};
    dist[source] = 0;
    std::vector<ConceptId> out;
    while (!queue.empty()) {
        std::size_t u = queue.front();
        queue.pop_front();
        if (dist[u] == k) continue;
        for (const auto& [v, year] : g.adjacency(u)) {
            if (year > t || dist[v] != -1) continue;
            dist[v] = dist[u] + 1;
            out.push_back(g.concepts()[v]);
            queue.push_back(v);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t common_neighbors(const EvolvingGraph& g, int t, const ConceptId& u,
                             const ConceptId& v) {
    auto nu = g.neighbors(u, t);
    auto nv = g.neighbors(v, t);
    std::vector<ConceptId> both;
    std::set_intersection(nu.begin(), nu.end(), nv.begin(), nv.end(), std::back_inserter(both));
    return both.size();
}

double jaccard(const EvolvingGraph& g, int t, const ConceptId& u, const ConceptId& v) {
    auto nu = g.neighbors(u, t);
    auto nv = g.neighbors(v, t);
    std::vector<ConceptId> both;
    std::vector<ConceptId> either;
    std::set_intersection(nu.begin(), nu.end(), nv.begin(), nv.end(), std::back_inserter(both));
    std::set_union(nu.begin(), nu.end(), nv.begin(), nv.end(), std::back_inserter(either));
    if (either.empty()) return 0.0;
    return static_cast<double>(both.size()) / static_cast<double>(either.size());
}

std::string graph_to_json(const EvolvingGraph& g) {
    nlohmann::ordered_json doc;
    doc["t_start"] = g.t_start();
    doc["t_end"] = g.t_end();
    doc["concepts"] = g.concepts();
    auto snaps = nlohmann::ordered_json::array();
    for (const auto& s : g.snapshots()) {
        nlohmann::ordered_json snap;
        snap["year"] = s.year;
        auto edges = nlohmann::ordered_json::array();
        for (const auto& e : s.edges) edges.push_back({e.lo, e.hi});
        snap["edges"] = std::move(edges);
        snaps.push_back(std::move(snap));
    }
    doc["snapshots"] = std::move(snaps);
    return doc.dump(2) + "\n";
}

EvolvingGraph graph_from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
        int t_start = doc.at("t_start").get<int>();
        int t_end = doc.at("t_end").get<int>();
        auto concepts = doc.at("concepts").get<std::vector<ConceptId>>();
        const auto& snaps = doc.at("snapshots");
        if (snaps.size() != static_cast<std::size_t>(t_end - t_start + 1)) {
            throw Error("graph JSON: expected one snapshot per year in range");
        }
        std::map<ConceptPair, int> first_seen;
        for (std::size_t i = 0; i < snaps.size(); ++i) {
            int year = snaps[i].at("year").get<int>();
            if (year != t_start + static_cast<int>(i)) {
                throw Error("graph JSON: snapshots are not contiguous at year " +
                            std::to_string(year));
            }
            std::set<ConceptPair> current;
            for (const auto& e : snaps[i].at("edges")) {
                auto pair = ConceptPair::of(e.at(0).get<ConceptId>(), e.at(1).get<ConceptId>());
                first_seen.emplace(pair, year);
                current.insert(std::move(pair));
            }
            // Every earlier edge must be repeated in this snapshot.
            if (first_seen.size() != current.size()) {
                throw Error("graph JSON: snapshot " + std::to_string(year) +
                            " drops an edge from an earlier year");
            }
        }
        return EvolvingGraph(std::move(concepts), t_start, t_end, std::move(first_seen));
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("graph JSON: ") + e.what());
    }
}

void write_graph(const EvolvingGraph& g, const std::filesystem::path& path) {
    write_text_atomic(path, graph_to_json(g));
}

EvolvingGraph read_graph(const std::filesystem::path& path) {
    return graph_from_json(read_text(path));
}

}  // namespace cforge
