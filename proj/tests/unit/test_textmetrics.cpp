#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "concept_forge/errors.hpp"
#include "concept_forge/textmetrics.hpp"
#include "../support/oracles.hpp"

using namespace cforge;
namespace ct = cforge::testing;

namespace {

double bleu1(const std::string& candidate, const std::string& reference) {
    std::vector<std::string> refs{reference};
    return bleu(candidate, refs);
}

std::string random_text(std::mt19937_64& rng, std::size_t max_tokens) {
    static const std::vector<std::string> words{"graph", "neural", "network", "link", "the", "a", "of", "model"};
    std::string s;
    std::size_t n = ct::draw(rng, max_tokens + 1);
    for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + words[ct::draw(rng, words.size())];
    return s;
}

}  // namespace

TEST(Tokens, LowercaseAndStripEdgePunctuation) {
    EXPECT_EQ(text_tokens("Hello, World!  x-ray (GNN)."), (std::vector<std::string>{"hello", "world", "x-ray", "gnn"}));
    EXPECT_TRUE(text_tokens(" ... ").empty());
}

TEST(Overlap, HandCases) {
    EXPECT_DOUBLE_EQ(*ngram_overlap("a b c", "b c d", 2), 50.0);
    EXPECT_NEAR(*ngram_overlap("a b c", "b c d", 1), 200.0 / 3.0, 1e-9);
    EXPECT_DOUBLE_EQ(*ngram_overlap("a b c", "a b c", 3), 100.0);
    EXPECT_DOUBLE_EQ(*ngram_overlap("a b c", "x y z", 1), 0.0);
    EXPECT_FALSE(ngram_overlap("a b", "a b", 3).has_value());
    EXPECT_FALSE(ngram_overlap("", "a", 1).has_value());
}

TEST(Bleu, IdentityAndDisjoint) {
    EXPECT_NEAR(bleu1("the cat sat on the mat", "the cat sat on the mat"), 100.0, 1e-9);
    EXPECT_NEAR(bleu1("the cat sat", "the cat sat"), 100.0, 1e-9);
    EXPECT_EQ(bleu1("x y z", "a b c"), 0.0);
    EXPECT_EQ(bleu1("", "a b c"), 0.0);
    EXPECT_THROW(bleu("a", std::span<const std::string>{}), Error);
}

TEST(Bleu, HandComputedFixtures) {
    // Every n-gram matches, higher orders have no n-grams; only the brevity penalty applies.
    EXPECT_NEAR(bleu1("the cat sat", "the cat sat down"), 100.0 * std::exp(1.0 - 4.0 / 3.0), 1e-9);
    // Precisions 5/6, 3/5, 1/4 and a smoothed 4-gram (0 + 1) / (3 + 1).
    EXPECT_NEAR(bleu1("the cat sat on the mat", "the cat is on the mat"),
                100.0 * std::pow(5.0 / 6.0 * 3.0 / 5.0 * 1.0 / 4.0 * 1.0 / 4.0, 0.25), 1e-9);
    // Closest reference length wins.
    std::vector<std::string> refs{"the cat sat down on it", "the cat sat down"};
    EXPECT_NEAR(bleu("the cat sat", refs), 100.0 * std::exp(1.0 - 4.0 / 3.0), 1e-9);
}

TEST(RougeL, HandCases) {
    const double p = 3.0 / 4.0, r = 1.0, b2 = 1.44;
    EXPECT_NEAR(rouge_l("a b c d", "a c d"), (1 + b2) * p * r / (r + b2 * p), 1e-9);
    EXPECT_NEAR(rouge_l("a b c", "a b c"), 1.0, 1e-12);
    EXPECT_EQ(rouge_l("a b", "c d"), 0.0);
    EXPECT_EQ(rouge_l("", "c d"), 0.0);
}

TEST(TextMetricsProperty, StayInBounds) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        auto a = random_text(rng, 12);
        auto b = random_text(rng, 12);
        std::vector<std::string> refs{b};
        double bl = bleu(a, refs);
        EXPECT_GE(bl, 0.0);
        EXPECT_LE(bl, 100.0 + 1e-9);
        double rl = rouge_l(a, b);
        EXPECT_GE(rl, 0.0);
        EXPECT_LE(rl, 1.0 + 1e-12);
        for (int n = 1; n <= 5; ++n) {
            if (auto o = ngram_overlap(a, b, n)) {
                EXPECT_GE(*o, 0.0);
                EXPECT_LE(*o, 100.0);
            }
        }
    }
}

TEST(TextMetricsProperty, AppendingToOutputNeverLowersOverlap) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 300; ++trial) {
        auto input = random_text(rng, 10);
        auto output = random_text(rng, 10);
        auto longer = output + " " + random_text(rng, 6);
        for (int n = 1; n <= 5; ++n) {
            auto before = ngram_overlap(input, output, n);
            auto after = ngram_overlap(input, longer, n);
            ASSERT_EQ(before.has_value(), after.has_value());
            if (before) {
                EXPECT_GE(*after, *before);
            }
        }
    }
}

TEST(TextReport, JsonShape) {
    TextReport r;
    r.overlap = overlap_report("a b c", "b c d");
    r.bleu = 12.5;
    r.rouge_l = 0.25;
    EXPECT_EQ(text_report_to_json(r),
              "{\n  \"overlap\": {\n    \"1\": 66.66666666666667,\n    \"2\": 50.0,\n    \"3\": 0.0,\n"
              "    \"4\": null,\n    \"5\": null\n  },\n  \"bleu\": 12.5,\n  \"rouge_l\": 0.25\n}\n");
}
