#pragma once
// Link-prediction metrics over one held-out snapshot.
//
// Accuracy counts every unordered pair of distinct concepts once. Precision,
// recall and F1 are reported for all edges and for new edges (absent the year
// before). An undefined value is std::nullopt: precision with no predicted
// positives, recall with no true positives, F1 when either is undefined or
// both are zero. Reports print it as null (JSON) or N/A (CSV).

#include <optional>
#include <span>
#include <string>

#include "concept_forge/graph.hpp"
#include "concept_forge/scorer.hpp"

namespace cforge {

using Metric = std::optional<double>;

struct LinkMetrics {
    Metric accuracy;
    Metric all_precision;
    Metric all_recall;
    Metric all_f1;
    Metric new_precision;
    Metric new_recall;
    Metric new_f1;
};

struct ConfusionCounts {
    std::size_t true_positive = 0;
    std::size_t predicted_positive = 0;
    std::size_t actual_positive = 0;
};
Metric precision_of(const ConfusionCounts& c);
Metric recall_of(const ConfusionCounts& c);
Metric f1_of(Metric precision, Metric recall);

// Throws Error when the prediction's concept set differs from the truth's
// (the message lists the symmetric difference) and RangeError unless
// t_start < test_year <= t_end.
LinkMetrics evaluate_prediction(const EvolvingGraph& truth, const PredictionResult& predicted,
                                int test_year);

// Field-wise unweighted mean over the defined entries. Throws Error on an empty list.
LinkMetrics aggregate_metrics(std::span<const LinkMetrics> per_graph);

std::string metrics_to_json(const LinkMetrics& m);
// Header line plus one row; undefined cells are "N/A".
std::string metrics_to_csv(const LinkMetrics& m);

}  // namespace cforge
