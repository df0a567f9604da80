#include "concept_forge/textmetrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <json.hpp>

#include "concept_forge/corpus.hpp"
#include "concept_forge/errors.hpp"

namespace cforge {

namespace {

using Gram = std::vector<std::string>;

std::map<Gram, std::size_t> ngram_counts(const std::vector<std::string>& toks, std::size_t n) {
    std::map<Gram, std::size_t> out;
    if (toks.size() < n) return out;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
        ++out[Gram(toks.begin() + static_cast<std::ptrdiff_t>(i),
                   toks.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return out;
}

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace

std::vector<std::string> text_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (auto& t : tokenize(text)) {
        if (!t.normalized.empty()) out.push_back(std::move(t.normalized));
    }
    return out;
}

std::optional<double> ngram_overlap(std::string_view input_text, std::string_view output_text,
                                    int n) {
    if (n < 1) throw RangeError("n-gram order must be positive");
    const auto order = static_cast<std::size_t>(n);
    auto input = ngram_counts(text_tokens(input_text), order);
    if (input.empty()) return std::nullopt;
    auto output = ngram_counts(text_tokens(output_text), order);
    std::size_t present = 0;
    for (const auto& [gram, count] : input) present += output.count(gram);
    return 100.0 * static_cast<double>(present) / static_cast<double>(input.size());
}

double bleu(std::string_view candidate, std::span<const std::string> references) {
    if (references.empty()) throw Error("bleu needs at least one reference");
    const auto cand = text_tokens(candidate);
    if (cand.empty()) return 0.0;
    std::vector<std::vector<std::string>> refs;
    for (const auto& r : references) refs.push_back(text_tokens(r));

    double log_sum = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        auto counts = ngram_counts(cand, n);
        std::map<Gram, std::size_t> max_ref;
        for (const auto& r : refs) {
            for (const auto& [gram, c] : ngram_counts(r, n)) {
                auto& slot = max_ref[gram];
                slot = std::max(slot, c);
            }
        }
        std::size_t matched = 0;
        std::size_t total = 0;
        for (const auto& [gram, c] : counts) {
            total += c;
            auto it = max_ref.find(gram);
            if (it != max_ref.end()) matched += std::min(c, it->second);
        }
        double p;
        if (matched > 0) {
            p = static_cast<double>(matched) / static_cast<double>(total);
        } else if (n == 1) {
            return 0.0;
        } else {
            p = 1.0 / static_cast<double>(total + 1);
        }
        log_sum += std::log(p) / 4.0;
    }

    // Closest reference length; ties go to the shorter one.
    std::size_t ref_len = refs.front().size();
    for (const auto& r : refs) {
        auto d = [&](std::size_t len) {
            return len > cand.size() ? len - cand.size() : cand.size() - len;
        };
        if (d(r.size()) < d(ref_len) || (d(r.size()) == d(ref_len) && r.size() < ref_len)) {
            ref_len = r.size();
        }
    }
    double bp = 1.0;
    if (cand.size() < ref_len) {
        bp = std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand.size()));
    }
    return 100.0 * bp * std::exp(log_sum);
}

double rouge_l(std::string_view candidate, std::string_view reference, double beta) {
    const auto cand = text_tokens(candidate);
    const auto ref = text_tokens(reference);
    if (cand.empty() || ref.empty()) return 0.0;
    const auto lcs = static_cast<double>(lcs_length(cand, ref));
    if (lcs == 0.0) return 0.0;
    const double p = lcs / static_cast<double>(cand.size());
    const double r = lcs / static_cast<double>(ref.size());
    const double b2 = beta * beta;
    return (1.0 + b2) * p * r / (r + b2 * p);
}

OverlapReport overlap_report(std::string_view input_text, std::string_view output_text) {
    OverlapReport r;
    for (int n = 1; n <= 5; ++n) r.percent[n - 1] = ngram_overlap(input_text, output_text, n);
    return r;
}

std::string text_report_to_json(const TextReport& r) {
    nlohmann::ordered_json doc;
    nlohmann::ordered_json overlap;
    for (int n = 1; n <= 5; ++n) {
        const auto& v = r.overlap.percent[n - 1];
        overlap[std::to_string(n)] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    }
    doc["overlap"] = std::move(overlap);
    doc["bleu"] = r.bleu;
    doc["rouge_l"] = r.rouge_l;
    return doc.dump(2) + "\n";
}

}  // namespace cforge
