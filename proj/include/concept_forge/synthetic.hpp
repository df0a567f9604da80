#pragma once
// Synthetic paper corpora with triangle-closing concept dynamics.
//
// Concepts are split into communities. Early papers pair concepts inside a
// community; later papers mostly repeat known co-occurrences or close a
// triangle (a-b, b-c known, paper mentions a, b and c), with rare exploratory
// pairs that may bridge communities. Papers cite earlier papers that share a
// concept, and citation counts are the in-corpus citation totals.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "concept_forge/corpus.hpp"

namespace cforge {

struct SyntheticOptions {
    std::size_t num_concepts = 30;
    std::size_t num_communities = 4;
    std::size_t num_papers = 200;
    int t_start = 2000;
    int t_end = 2010;
    // Papers in the first year that seed intra-community edges.
    std::size_t seed_papers = 24;
    double close_probability = 0.3;
    double explore_probability = 0.05;
    double bridge_probability = 0.2;
    std::size_t max_references = 5;
    std::uint64_t seed = 7;
};

struct SyntheticCorpus {
    std::vector<PaperRecord> papers;
    // (surface, concept id); every concept has its canonical surface, some
    // have an extra abbreviation.
    std::vector<std::pair<std::string, ConceptId>> vocabulary;
};

SyntheticCorpus make_synthetic_corpus(const SyntheticOptions& options = {});

// Parsed through the regular corpus and vocabulary readers.
CorpusStore to_corpus_store(const SyntheticCorpus& corpus);
ConceptVocabulary to_vocabulary(const SyntheticCorpus& corpus);

std::string corpus_to_jsonl(const std::vector<PaperRecord>& papers);
std::string vocabulary_to_tsv(const std::vector<std::pair<std::string, ConceptId>>& entries);

}  // namespace cforge
