#pragma once
// Co-occurrence citation quintuples (p_i, p_j, c_u, c_v, p): target paper p
// cites p_i and p_j (p_i != p_j), c_u appears in p_i and p, c_v appears in p_j
// and p, and c_u != c_v.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "concept_forge/corpus.hpp"

namespace cforge {

struct Quintuple {
    PaperId p_i;
    PaperId p_j;
    PaperId p;
    ConceptId c_u;
    ConceptId c_v;

    // Filled by bind_sentences.
    bool bound = false;
    std::string sent_i;
    std::string sent_j;
    std::string section_i;
    std::string section_j;
    std::vector<std::string> idea_sentences;

    std::string idea() const;
    // Stable 16-hex-digit id derived from the five keys.
    std::string id() const;

    friend bool operator==(const Quintuple&, const Quintuple&) = default;
};

// Orders by (p, p_i, p_j, c_u, c_v).
bool quintuple_key_less(const Quintuple& a, const Quintuple& b);

struct ExtractionSummary {
    std::size_t targets_considered = 0;
    std::size_t targets_below_threshold = 0;
    std::size_t dangling_references = 0;
};

// Every quintuple whose target has citation_count >= citation_threshold,
// sorted and unique. References missing from the corpus are skipped and counted.
std::vector<Quintuple> extract_quintuples(const CorpusIndex& index, const CorpusStore& corpus,
                                          long long citation_threshold = 2,
                                          ExtractionSummary* summary = nullptr);

// Picks one sentence mentioning c_u from p_i and one mentioning c_v from p_j,
// uniformly with a generator seeded from `seed` and the quintuple's keys, and
// collects the target's idea sentences. Returns nullopt when either side has
// no mentioning sentence.
std::optional<Quintuple> bind_sentences(const Quintuple& q, const CorpusStore& corpus,
                                        const CorpusIndex& index, std::uint64_t seed);

struct BindSummary {
    std::size_t bound = 0;
    std::size_t dropped = 0;
};
std::vector<Quintuple> bind_all(std::span<const Quintuple> qs, const CorpusStore& corpus,
                                const CorpusIndex& index, std::uint64_t seed,
                                BindSummary* summary = nullptr);

struct FilterRuleSet {
    // Matched against the start of any token, case-insensitively.
    std::vector<std::string> keyword_blocklist;
    // Drop when the fraction of numeric tokens exceeds this value.
    std::optional<double> max_numeric_fraction;
    std::optional<std::size_t> min_tokens;
    std::optional<std::size_t> max_tokens;
    std::vector<std::string> section_blocklist;

    // Acknowledgment/funding/experiment-detail blocklists, 0.2 numeric
    // density, 5..120 tokens.
    static FilterRuleSet defaults();
    // Throws ConfigError for a threshold outside [0, 1] or min > max.
    void validate() const;
};

double numeric_fraction(std::string_view sentence);
bool sentence_passes(std::string_view sentence, std::string_view section, const FilterRuleSet& rules);

// Keeps quintuples whose two bound sentences pass every rule. Throws
// StateError for an unbound quintuple.
std::vector<Quintuple> filter_quintuples(std::span<const Quintuple> qs, const FilterRuleSet& rules);

// "<HEAD> {c_u} <TAIL> {c_v} <SEP> {sent_i} <SEP> {sent_j}". Throws StateError
// when sentences are not bound.
std::string serialize_seq(const Quintuple& q);

struct SeqParts {
    std::string c_u;
    std::string c_v;
    std::string sent_i;
    std::string sent_j;
    friend bool operator==(const SeqParts&, const SeqParts&) = default;
};
// Throws ProtocolError if the markers are missing.
SeqParts parse_seq(std::string_view seq);

struct QuintupleDataset {
    std::vector<Quintuple> train;
    std::vector<Quintuple> valid;
    std::vector<Quintuple> test;
    std::uint64_t seed = 0;
};

// Seeded shuffle followed by a contiguous split. Ratios must be positive and
// sum to 1 within 1e-9 (ConfigError otherwise).
QuintupleDataset split_dataset(std::span<const Quintuple> qs,
                               std::array<double, 3> ratios = {0.8, 0.1, 0.1},
                               std::uint64_t seed = 0);

// JSONL rows {"p_i", "p_j", "p", "c_u", "c_v", "sent_i", "sent_j", "idea", "seq"}.
std::string quintuples_to_jsonl(std::span<const Quintuple> qs);
std::vector<Quintuple> quintuples_from_jsonl(std::string_view text);
void export_quintuples(std::span<const Quintuple> qs, const std::filesystem::path& path);
std::vector<Quintuple> import_quintuples(const std::filesystem::path& path);
// One quintuple id per line.
std::string manifest_of(std::span<const Quintuple> qs);

}  // namespace cforge
