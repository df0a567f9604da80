#pragma once
// Prompt-based link-prediction samples.
//
// A sample for concepts (u, v) at year t is the sequence
//   [CLS] {prompt}: in {t}, {u} is [MASK] to {v}.[SEP]
// where prompt is "Existing" when u and v were already connected at t - 1 and
// "Unknown" otherwise. The mask is filled with "related" or "unrelated".

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "concept_forge/graph.hpp"

namespace cforge {

enum class PromptWord { Existing, Unknown };
enum class LinkLabel { Related, Unrelated };

std::string_view to_string(PromptWord p);
std::string_view to_string(LinkLabel l);
PromptWord parse_prompt_word(std::string_view s);
LinkLabel parse_link_label(std::string_view s);

struct LinkSample {
    ConceptId c_u;
    ConceptId c_v;
    int t = 0;
    PromptWord prompt = PromptWord::Unknown;
    LinkLabel label = LinkLabel::Unrelated;
    std::string text;

    friend bool operator==(const LinkSample&, const LinkSample&) = default;
};

struct SamplerConfig {
    int k = 2;
    int d = 5;
    std::optional<std::size_t> max_negatives_per_anchor;
    std::uint64_t seed = 0;

    // Throws ConfigError unless k >= 2 and d >= 1.
    void validate() const;
};

// Existing iff A_{t-1}(u, v) = 1. At t = t_start the previous year is empty.
PromptWord prompt_of(const EvolvingGraph& g, const ConceptId& u, const ConceptId& v, int t);

std::string serialize_sample(const ConceptId& u, const ConceptId& v, int t, PromptWord prompt);

struct ParsedSample {
    ConceptId c_u;
    ConceptId c_v;
    int t = 0;
    PromptWord prompt = PromptWord::Unknown;
};
// Inverse of serialize_sample. Throws ProtocolError on text that does not fit
// the template.
ParsedSample parse_sample_text(std::string_view text);

// One related sample per (edge, year) with the edge present at that year,
// written in canonical (lo, hi) order.
std::vector<LinkSample> generate_positives(const EvolvingGraph& g);

// (u, v, t) with v in the k-hop neighbourhood of u at t, no edge at t + d,
// and t <= t_end - d. One sample per canonical pair and year.
std::vector<LinkSample> generate_negatives(const EvolvingGraph& g, const SamplerConfig& cfg);

// Sorts by (t, c_u, c_v).
void sort_samples(std::vector<LinkSample>& samples);

// JSONL: {"c_u", "c_v", "t", "prompt", "label", "text"} per line, sorted.
std::string samples_to_jsonl(std::vector<LinkSample> samples);
std::vector<LinkSample> samples_from_jsonl(std::string_view text);
void export_samples(const std::vector<LinkSample>& samples, const std::filesystem::path& path);
std::vector<LinkSample> import_samples(const std::filesystem::path& path);

}  // namespace cforge
