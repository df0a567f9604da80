#pragma once
// Text metrics for generated ideas. All of them share one tokenizer:
// lowercase, split on whitespace, strip punctuation at token edges.

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cforge {

std::vector<std::string> text_tokens(std::string_view text);

// Percentage of distinct input n-grams that also occur in the output.
// nullopt when the input has fewer than n tokens.
std::optional<double> ngram_overlap(std::string_view input_text, std::string_view output_text, int n);

// BLEU-4, uniform weights, brevity penalty against the closest reference
// length. Returns 0 for an empty candidate or when no unigram matches; a
// higher order with zero matches uses (0 + 1) / (count + 1).
double bleu(std::string_view candidate, std::span<const std::string> references);

// LCS F-measure, (1 + beta^2) P R / (R + beta^2 P). 0 when either side is empty.
double rouge_l(std::string_view candidate, std::string_view reference, double beta = 1.2);

struct OverlapReport {
    std::array<std::optional<double>, 5> percent;  // n = 1..5
};

OverlapReport overlap_report(std::string_view input_text, std::string_view output_text);

struct TextReport {
    OverlapReport overlap;
    double bleu = 0.0;
    double rouge_l = 0.0;
};

// {"overlap": {"1": float|null, ..., "5": float|null}, "bleu": float, "rouge_l": float}
std::string text_report_to_json(const TextReport& r);

}  // namespace cforge
