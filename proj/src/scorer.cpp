#include "concept_forge/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <istream>
#include <ostream>
#include <random>
#include <set>

#include <httplib.h>
#include <json.hpp>

#include "concept_forge/errors.hpp"
#include "concept_forge/io.hpp"
#include "concept_forge/random.hpp"

namespace cforge {

namespace {

using json = nlohmann::json;

void check_finite(const PairLogits& l, std::size_t i) {
    if (!std::isfinite(l.related) || !std::isfinite(l.unrelated)) {
        throw ProtocolError("non-finite logits at index " + std::to_string(i));
    }
}

}  // namespace

std::vector<PairLogits> score_batch(Predictor& scorer, std::span<const LinkSample> samples) {
    if (samples.empty()) return {};
    auto out = scorer.score(samples);
    if (out.size() != samples.size()) {
        throw ProtocolError("scorer returned " + std::to_string(out.size()) + " results for " +
                            std::to_string(samples.size()) + " samples");
    }
    for (std::size_t i = 0; i < out.size(); ++i) check_finite(out[i], i);
    return out;
}

void StubScorer::set(const ConceptId& u, const ConceptId& v, int t, PairLogits logits) {
    auto pair = ConceptPair::of(u, v);
    table_[{pair.lo, pair.hi, t}] = logits;
}

std::vector<PairLogits> StubScorer::score(std::span<const LinkSample> samples) {
    std::vector<PairLogits> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        const auto& [lo, hi] = std::minmax(s.c_u, s.c_v);
        auto it = table_.find({lo, hi, s.t});
        out.push_back(it == table_.end() ? fallback_ : it->second);
    }
    return out;
}

StubScorer StubScorer::from_jsonl(const std::filesystem::path& path, PairLogits fallback) {
    StubScorer stub(fallback);
    auto text = read_text(path);
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? text.size() : nl + 1;
        ++lineno;
        if (line.empty()) continue;
        try {
            auto row = json::parse(line);
            stub.set(row.at("c_u").get<std::string>(), row.at("c_v").get<std::string>(),
                     row.at("t").get<int>(),
                     {row.at("related").get<double>(), row.at("unrelated").get<double>()});
        } catch (const json::exception& e) {
            throw ParseError(lineno, e.what());
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(lineno, e.what());
        }
    }
    return stub;
}

PairLogits heuristic_score(const EvolvingGraph& g, int t, const ConceptPair& pair) {
    auto common = common_neighbors(g, t, pair.lo, pair.hi);
    double related = std::log1p(static_cast<double>(common)) + jaccard(g, t, pair.lo, pair.hi);
    return {related, 0.0};
}

std::vector<PairLogits> HeuristicScorer::score(std::span<const LinkSample> samples) {
    std::vector<PairLogits> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        int year = std::min(s.t - 1, graph_.t_end());
        if (year < graph_.t_start()) {
            graph_.index_of(s.c_u);
            graph_.index_of(s.c_v);
            out.push_back({0.0, 0.0});
            continue;
        }
        out.push_back(heuristic_score(graph_, year, ConceptPair::of(s.c_u, s.c_v)));
    }
    return out;
}

std::vector<PairLogits> UniformRandomScorer::score(std::span<const LinkSample> samples) {
    std::vector<PairLogits> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        std::mt19937_64 rng(derive_seed(seed_, s.text));
        auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
        double related = unit();
        out.push_back({related, unit()});
    }
    return out;
}

std::string encode_score_request(std::span<const std::string> sequences) {
    json body;
    body["sequences"] = json::array();
    for (const auto& s : sequences) body["sequences"].push_back(s);
    return body.dump();
}

std::vector<std::string> decode_score_request(std::string_view body) {
    try {
        auto doc = json::parse(body);
        const auto& seqs = doc.at("sequences");
        if (!seqs.is_array()) throw ProtocolError("'sequences' must be an array");
        return seqs.get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed score request: ") + e.what());
    }
}

std::string encode_score_response(std::span<const PairLogits> logits) {
    json body;
    body["logits"] = json::array();
    for (const auto& l : logits) body["logits"].push_back({l.related, l.unrelated});
    return body.dump();
}

std::vector<PairLogits> decode_score_response(std::string_view body, std::size_t expected) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed score response: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("logits") || !doc["logits"].is_array()) {
        throw ProtocolError("score response lacks a 'logits' array");
    }
    const auto& rows = doc["logits"];
    if (rows.size() != expected) {
        throw ProtocolError("score response has " + std::to_string(rows.size()) +
                            " rows, expected " + std::to_string(expected));
    }
    std::vector<PairLogits> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number()) {
            throw ProtocolError("score response row " + std::to_string(i) +
                                " is not a pair of numbers");
        }
        PairLogits l{row[0].get<double>(), row[1].get<double>()};
        check_finite(l, i);
        out.push_back(l);
    }
    return out;
}

HttpTransport::HttpTransport(const std::string& url, double timeout_seconds)
    : timeout_seconds_(timeout_seconds) {
    auto scheme = url.find("://");
    if (scheme == std::string::npos || url.compare(0, scheme, "http") != 0) {
        throw ConfigError("scorer endpoint must be an http:// URL, got '" + url + "'");
    }
    auto slash = url.find('/', scheme + 3);
    origin_ = url.substr(0, slash);
    path_ = slash == std::string::npos ? "/score" : url.substr(slash);
    if (origin_.size() == scheme + 3) throw ConfigError("scorer endpoint has no host: '" + url + "'");
}

std::string HttpTransport::roundtrip(const std::string& request) {
    httplib::Client client(origin_);
    auto secs = static_cast<time_t>(timeout_seconds_);
    auto usecs = static_cast<time_t>((timeout_seconds_ - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);
    auto res = client.Post(path_, request, "application/json");
    if (!res) {
        throw TransportError("POST " + origin_ + path_ + " failed: " + httplib::to_string(res.error()), 1);
    }
    if (res->status >= 500) {
        throw TransportError("POST " + origin_ + path_ + " returned HTTP " +
                             std::to_string(res->status), 1);
    }
    if (res->status != 200) {
        throw ProtocolError("POST " + origin_ + path_ + " returned HTTP " +
                            std::to_string(res->status) + ": " + res->body);
    }
    return res->body;
}

std::string StreamTransport::roundtrip(const std::string& request) {
    std::lock_guard lock(mutex_);
    out_ << request << '\n';
    out_.flush();
    if (!out_) throw TransportError("scorer stream closed for writing", 1);
    std::string line;
    if (!std::getline(in_, line)) throw TransportError("scorer stream closed before a response", 1);
    return line;
}

RemoteScorer::RemoteScorer(std::shared_ptr<Transport> transport, RemoteOptions options)
    : transport_(std::move(transport)), options_(options) {
    if (!transport_) throw ConfigError("remote scorer needs a transport");
    if (options_.batch_size == 0) throw ConfigError("scorer.batch_size must be positive");
    if (options_.max_attempts < 1) throw ConfigError("scorer.max_attempts must be positive");
    options_.parallelism = std::max<std::size_t>(1, options_.parallelism);
}

std::vector<PairLogits> RemoteScorer::send_batch(std::span<const LinkSample> batch) {
    std::vector<std::string> sequences;
    sequences.reserve(batch.size());
    for (const auto& s : batch) sequences.push_back(s.text);
    const auto request = encode_score_request(sequences);

    std::string last_error;
    for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
        ++requests_sent_;
        try {
            return decode_score_response(transport_->roundtrip(request), batch.size());
        } catch (const TransportError& e) {
            last_error = e.what();
        }
    }
    throw TransportError(last_error, options_.max_attempts);
}

std::vector<PairLogits> RemoteScorer::score(std::span<const LinkSample> samples) {
    std::vector<PairLogits> out(samples.size());
    const std::size_t n = samples.size();
    const std::size_t batch = options_.batch_size;
    std::vector<std::size_t> starts;
    for (std::size_t b = 0; b < n; b += batch) starts.push_back(b);

    for (std::size_t wave = 0; wave < starts.size(); wave += options_.parallelism) {
        std::vector<std::future<std::vector<PairLogits>>> pending;
        std::size_t wave_end = std::min(starts.size(), wave + options_.parallelism);
        for (std::size_t i = wave; i < wave_end; ++i) {
            auto part = samples.subspan(starts[i], std::min(batch, n - starts[i]));
            if (options_.parallelism == 1) {
                std::promise<std::vector<PairLogits>> ready;
                ready.set_value(send_batch(part));
                pending.push_back(ready.get_future());
            } else {
                pending.push_back(std::async(std::launch::async,
                                             [this, part] { return send_batch(part); }));
            }
        }
        for (std::size_t i = wave; i < wave_end; ++i) {
            auto logits = pending[i - wave].get();
            std::copy(logits.begin(), logits.end(), out.begin() + static_cast<std::ptrdiff_t>(starts[i]));
        }
    }
    return out;
}

std::vector<ConceptPair> candidate_pairs(const EvolvingGraph& g, int year, int k, bool all_pairs) {
    std::vector<ConceptPair> out;
    const auto& cs = g.concepts();
    if (all_pairs) {
        for (std::size_t i = 0; i < cs.size(); ++i) {
            for (std::size_t j = i + 1; j < cs.size(); ++j) {
                if (!g.has_edge(cs[i], cs[j], year)) out.push_back({cs[i], cs[j]});
            }
        }
        return out;
    }
    for (const auto& u : cs) {
        for (const auto& v : k_hop_neighborhood(g, year, u, k)) {
            if (u < v && !g.has_edge(u, v, year)) out.push_back({u, v});
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

PredictionResult predict_snapshot(const EvolvingGraph& g, Predictor& scorer, int target_year,
                                  const PredictOptions& options) {
    if (target_year != g.t_end() && target_year != g.t_end() + 1) {
        throw RangeError("target year " + std::to_string(target_year) + " must be " +
                         std::to_string(g.t_end()) + " or " + std::to_string(g.t_end() + 1));
    }
    const int known = target_year - 1;
    if (known < g.t_start()) throw RangeError("no snapshot precedes target year " + std::to_string(target_year));

    auto candidates = candidate_pairs(g, known, options.k, options.full_candidates);
    std::vector<LinkSample> samples;
    samples.reserve(candidates.size());
    for (const auto& pair : candidates) {
        samples.push_back(LinkSample{pair.lo, pair.hi, target_year, PromptWord::Unknown,
                                     LinkLabel::Unrelated,
                                     serialize_sample(pair.lo, pair.hi, target_year, PromptWord::Unknown)});
    }
    auto logits = score_batch(scorer, samples);

    PredictionResult result;
    result.target_year = target_year;
    result.concepts = g.concepts();
    std::set<ConceptPair> predicted;
    if (options.clamp_existing) {
        auto prior = g.edges(known);
        predicted.insert(prior.begin(), prior.end());
    }
    result.ranked_candidates.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (logits[i].is_related()) predicted.insert(candidates[i]);
        result.ranked_candidates.push_back({candidates[i], logits[i], logits[i].margin()});
    }
    std::stable_sort(result.ranked_candidates.begin(), result.ranked_candidates.end(),
                     [](const RankedPair& a, const RankedPair& b) {
                         if (a.score != b.score) return a.score > b.score;
                         return a.pair < b.pair;
                     });
    if (options.top_k && result.ranked_candidates.size() > *options.top_k) {
        result.ranked_candidates.resize(*options.top_k);
    }
    result.predicted_edges.assign(predicted.begin(), predicted.end());
    return result;
}

std::string prediction_to_json(const PredictionResult& r) {
    nlohmann::ordered_json doc;
    doc["target_year"] = r.target_year;
    doc["concepts"] = r.concepts;
    auto edges = nlohmann::ordered_json::array();
    for (const auto& e : r.predicted_edges) edges.push_back({e.lo, e.hi});
    doc["predicted_edges"] = std::move(edges);
    auto ranked = nlohmann::ordered_json::array();
    for (const auto& c : r.ranked_candidates) {
        nlohmann::ordered_json row;
        row["pair"] = {c.pair.lo, c.pair.hi};
        row["score"] = c.score;
        row["related"] = c.logits.related;
        row["unrelated"] = c.logits.unrelated;
        ranked.push_back(std::move(row));
    }
    doc["ranked_candidates"] = std::move(ranked);
    return doc.dump(2) + "\n";
}

PredictionResult prediction_from_json(std::string_view text) {
    try {
        auto doc = json::parse(text);
        PredictionResult r;
        r.target_year = doc.at("target_year").get<int>();
        r.concepts = doc.at("concepts").get<std::vector<ConceptId>>();
        for (const auto& e : doc.at("predicted_edges")) {
            r.predicted_edges.push_back(
                ConceptPair::of(e.at(0).get<std::string>(), e.at(1).get<std::string>()));
        }
        std::sort(r.predicted_edges.begin(), r.predicted_edges.end());
        r.predicted_edges.erase(std::unique(r.predicted_edges.begin(), r.predicted_edges.end()),
                                r.predicted_edges.end());
        for (const auto& row : doc.at("ranked_candidates")) {
            const auto& p = row.at("pair");
            RankedPair c{ConceptPair::of(p.at(0).get<std::string>(), p.at(1).get<std::string>()),
                         {row.at("related").get<double>(), row.at("unrelated").get<double>()},
                         row.at("score").get<double>()};
            r.ranked_candidates.push_back(std::move(c));
        }
        return r;
    } catch (const json::exception& e) {
        throw Error(std::string("prediction JSON: ") + e.what());
    }
}

}  // namespace cforge
