#include "concept_forge/eval.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <set>

#include <json.hpp>

#include "concept_forge/errors.hpp"

namespace cforge {

namespace {

using Field = Metric LinkMetrics::*;

constexpr std::array<std::pair<const char*, Field>, 7> kFields{{
    {"accuracy", &LinkMetrics::accuracy},
    {"all_precision", &LinkMetrics::all_precision},
    {"all_recall", &LinkMetrics::all_recall},
    {"all_f1", &LinkMetrics::all_f1},
    {"new_precision", &LinkMetrics::new_precision},
    {"new_recall", &LinkMetrics::new_recall},
    {"new_f1", &LinkMetrics::new_f1},
}};

double ratio(std::size_t num, std::size_t den) {
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Metric precision_of(const ConfusionCounts& c) {
    if (c.predicted_positive == 0) return std::nullopt;
    return ratio(c.true_positive, c.predicted_positive);
}

Metric recall_of(const ConfusionCounts& c) {
    if (c.actual_positive == 0) return std::nullopt;
    return ratio(c.true_positive, c.actual_positive);
}

Metric f1_of(Metric precision, Metric recall) {
    if (!precision || !recall || *precision + *recall == 0.0) return std::nullopt;
    return 2.0 * *precision * *recall / (*precision + *recall);
}

LinkMetrics evaluate_prediction(const EvolvingGraph& truth, const PredictionResult& predicted,
                                int test_year) {
    if (test_year <= truth.t_start() || test_year > truth.t_end()) {
        throw RangeError("test year " + std::to_string(test_year) + " must satisfy " +
                         std::to_string(truth.t_start()) + " < t <= " + std::to_string(truth.t_end()));
    }
    std::vector<ConceptId> universe = predicted.concepts;
    std::sort(universe.begin(), universe.end());
    universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
    if (universe != truth.concepts()) {
        std::vector<ConceptId> diff;
        std::set_symmetric_difference(universe.begin(), universe.end(), truth.concepts().begin(),
                                      truth.concepts().end(), std::back_inserter(diff));
        std::string list;
        for (const auto& c : diff) list += (list.empty() ? "" : ", ") + c;
        throw Error("prediction and truth cover different concepts: {" + list + "}");
    }
    std::set<ConceptPair> pred(predicted.predicted_edges.begin(), predicted.predicted_edges.end());
    for (const auto& e : pred) {
        if (!truth.contains(e.lo) || !truth.contains(e.hi)) {
            throw Error("predicted edge (" + e.lo + ", " + e.hi + ") uses an unknown concept");
        }
    }

    const auto truth_edges = truth.edges(test_year);
    const std::set<ConceptPair> actual(truth_edges.begin(), truth_edges.end());
    const std::size_t n = truth.num_concepts();
    const std::size_t pairs = n * (n - (n > 0 ? 1 : 0)) / 2;

    ConfusionCounts all;
    ConfusionCounts fresh;
    all.actual_positive = actual.size();
    all.predicted_positive = pred.size();
    for (const auto& e : pred) {
        const bool hit = actual.count(e) != 0;
        all.true_positive += hit;
        if (!truth.has_edge(e.lo, e.hi, test_year - 1)) {
            ++fresh.predicted_positive;
            fresh.true_positive += hit;
        }
    }
    fresh.actual_positive = new_edges(truth, test_year).size();

    // Disagreements are false positives plus false negatives.
    const std::size_t wrong = (all.predicted_positive - all.true_positive) +
                              (all.actual_positive - all.true_positive);

    LinkMetrics m;
    if (pairs > 0) m.accuracy = ratio(pairs - wrong, pairs);
    m.all_precision = precision_of(all);
    m.all_recall = recall_of(all);
    m.all_f1 = f1_of(m.all_precision, m.all_recall);
    m.new_precision = precision_of(fresh);
    m.new_recall = recall_of(fresh);
    m.new_f1 = f1_of(m.new_precision, m.new_recall);
    return m;
}

LinkMetrics aggregate_metrics(std::span<const LinkMetrics> per_graph) {
    if (per_graph.empty()) throw Error("cannot aggregate an empty metrics list");
    LinkMetrics out;
    for (const auto& [name, field] : kFields) {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& m : per_graph) {
            if (const auto& v = m.*field) {
                sum += *v;
                ++count;
            }
        }
        if (count > 0) out.*field = sum / static_cast<double>(count);
    }
    return out;
}

std::string metrics_to_json(const LinkMetrics& m) {
    nlohmann::ordered_json doc;
    for (const auto& [name, field] : kFields) {
        const auto& v = m.*field;
        doc[name] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    }
    return doc.dump(2) + "\n";
}

std::string metrics_to_csv(const LinkMetrics& m) {
    std::string header;
    std::string row;
    for (const auto& [name, field] : kFields) {
        if (!header.empty()) {
            header += ',';
            row += ',';
        }
        header += name;
        const auto& v = m.*field;
        if (v) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6f", *v);
            row += buf;
        } else {
            row += "N/A";
        }
    }
    return header + "\n" + row + "\n";
}

}  // namespace cforge
