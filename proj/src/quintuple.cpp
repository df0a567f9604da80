#include "concept_forge/quintuple.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "concept_forge/errors.hpp"
#include "concept_forge/io.hpp"
#include "concept_forge/parallel.hpp"
#include "concept_forge/random.hpp"

namespace cforge {

namespace {

constexpr std::string_view kHead = "<HEAD> ";
constexpr std::string_view kTail = " <TAIL> ";
constexpr std::string_view kSep = " <SEP> ";

auto key_of(const Quintuple& q) { return std::tie(q.p, q.p_i, q.p_j, q.c_u, q.c_v); }

std::string key_string(const Quintuple& q) {
    return q.p_i + '\t' + q.p_j + '\t' + q.c_u + '\t' + q.c_v + '\t' + q.p;
}

std::vector<ConceptId> intersect(const std::vector<ConceptId>& a, const std::vector<ConceptId>& b) {
    std::vector<ConceptId> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

// Sentence indices of `paper` that mention `concept_id`, ascending.
std::vector<std::size_t> sentences_mentioning(const CorpusIndex& index, const PaperId& paper,
                                              const ConceptId& concept_id) {
    std::vector<std::size_t> out;
    for (const auto& m : index.mentions_of(paper)) {
        if (m.concept_id == concept_id) out.push_back(m.sentence_index);
    }
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool is_idea_section(const std::string& label) {
    auto norm = normalize_text(label);
    return norm == "abstract" || norm == "introduction";
}

bool is_numeric_token(const std::string& tok) {
    bool digit = false;
    for (char c : tok) {
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digit = true;
        } else if (c != '.' && c != ',' && c != '-' && c != '+' && c != '%') {
            return false;
        }
    }
    return digit;
}

}  // namespace

std::string Quintuple::idea() const {
    std::string out;
    for (const auto& s : idea_sentences) {
        if (!out.empty()) out.push_back(' ');
        out += s;
    }
    return out;
}

std::string Quintuple::id() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(key_string(*this))));
    return buf;
}

bool quintuple_key_less(const Quintuple& a, const Quintuple& b) { return key_of(a) < key_of(b); }

std::vector<Quintuple> extract_quintuples(const CorpusIndex& index, const CorpusStore& corpus,
                                          long long citation_threshold,
                                          ExtractionSummary* summary) {
    const auto& papers = corpus.papers();
    struct Part {
        std::vector<Quintuple> found;
        ExtractionSummary stats;
    };
    auto parts = parallel_chunks(papers.size(), [&](std::size_t begin, std::size_t end) {
        Part part;
        for (std::size_t i = begin; i < end; ++i) {
            const auto& target = papers[i];
            if (target.citation_count < citation_threshold) {
                ++part.stats.targets_below_threshold;
                continue;
            }
            ++part.stats.targets_considered;
            const auto& target_concepts = index.concepts_of(target.id);
            std::vector<PaperId> refs;
            for (const auto& r : target.references) {
                if (corpus.find(r) == nullptr) {
                    ++part.stats.dangling_references;
                } else {
                    refs.push_back(r);
                }
            }
            std::sort(refs.begin(), refs.end());
            refs.erase(std::unique(refs.begin(), refs.end()), refs.end());
            if (refs.size() < 2 || target_concepts.size() < 2) continue;

            std::vector<std::vector<ConceptId>> shared;
            shared.reserve(refs.size());
            for (const auto& r : refs) shared.push_back(intersect(index.concepts_of(r), target_concepts));

            for (std::size_t a = 0; a < refs.size(); ++a) {
                for (std::size_t b = 0; b < refs.size(); ++b) {
                    if (a == b) continue;
                    for (const auto& cu : shared[a]) {
                        for (const auto& cv : shared[b]) {
                            if (cu == cv) continue;
                            Quintuple q;
                            q.p_i = refs[a];
                            q.p_j = refs[b];
                            q.p = target.id;
                            q.c_u = cu;
                            q.c_v = cv;
                            part.found.push_back(std::move(q));
                        }
                    }
                }
            }
        }
        return part;
    });

    std::vector<Quintuple> out;
    ExtractionSummary total;
    for (auto& part : parts) {
        out.insert(out.end(), std::make_move_iterator(part.found.begin()),
                   std::make_move_iterator(part.found.end()));
        total.targets_considered += part.stats.targets_considered;
        total.targets_below_threshold += part.stats.targets_below_threshold;
        total.dangling_references += part.stats.dangling_references;
    }
    std::sort(out.begin(), out.end(), quintuple_key_less);
    out.erase(std::unique(out.begin(), out.end(),
                          [](const Quintuple& a, const Quintuple& b) { return key_of(a) == key_of(b); }),
              out.end());
    if (summary) *summary = total;
    return out;
}

std::optional<Quintuple> bind_sentences(const Quintuple& q, const CorpusStore& corpus,
                                        const CorpusIndex& index, std::uint64_t seed) {
    const auto& ref_i = corpus.at(q.p_i);
    const auto& ref_j = corpus.at(q.p_j);
    const auto& target = corpus.at(q.p);
    auto cand_i = sentences_mentioning(index, q.p_i, q.c_u);
    auto cand_j = sentences_mentioning(index, q.p_j, q.c_v);
    if (cand_i.empty() || cand_j.empty()) return std::nullopt;

    std::mt19937_64 rng(derive_seed(seed, key_string(q)));
    std::size_t pick_i = cand_i[uniform_index(rng, cand_i.size())];
    std::size_t pick_j = cand_j[uniform_index(rng, cand_j.size())];

    Quintuple out = q;
    out.bound = true;
    out.sent_i = ref_i.sentences[pick_i];
    out.sent_j = ref_j.sentences[pick_j];
    out.section_i = ref_i.section_of(pick_i);
    out.section_j = ref_j.section_of(pick_j);

    // Target sentences mentioning c_u and/or c_v.
    std::vector<int> hits(target.sentences.size(), 0);
    for (const auto& m : index.mentions_of(q.p)) {
        if (m.concept_id == q.c_u) hits[m.sentence_index] |= 1;
        if (m.concept_id == q.c_v) hits[m.sentence_index] |= 2;
    }
    std::vector<std::size_t> either;
    std::vector<std::size_t> both;
    if (target.has_section_labels()) {
        for (std::size_t s = 0; s < hits.size(); ++s) {
            if (hits[s] == 0 || !is_idea_section(target.section_of(s))) continue;
            either.push_back(s);
            if (hits[s] == 3) both.push_back(s);
        }
    }
    const auto& chosen = both.empty() ? either : both;
    if (!chosen.empty()) {
        for (auto s : chosen) out.idea_sentences.push_back(target.sentences[s]);
    } else {
        auto first = std::find_if(hits.begin(), hits.end(), [](int h) { return h != 0; });
        if (first != hits.end()) {
            out.idea_sentences.push_back(
                target.sentences[static_cast<std::size_t>(first - hits.begin())]);
        }
    }
    return out;
}

std::vector<Quintuple> bind_all(std::span<const Quintuple> qs, const CorpusStore& corpus,
                                const CorpusIndex& index, std::uint64_t seed,
                                BindSummary* summary) {
    std::vector<Quintuple> out;
    BindSummary stats;
    for (const auto& q : qs) {
        if (auto b = bind_sentences(q, corpus, index, seed)) {
            out.push_back(std::move(*b));
            ++stats.bound;
        } else {
            ++stats.dropped;
        }
    }
    if (summary) *summary = stats;
    return out;
}

FilterRuleSet FilterRuleSet::defaults() {
    FilterRuleSet rules;
    rules.keyword_blocklist = {"thank", "acknowledg", "grant", "funded", "funding", "supported by"};
    rules.max_numeric_fraction = 0.2;
    rules.min_tokens = 5;
    rules.max_tokens = 120;
    rules.section_blocklist = {"acknowledgments", "acknowledgements", "funding",
                               "experiments", "experimental setup", "references"};
    return rules;
}

void FilterRuleSet::validate() const {
    if (max_numeric_fraction && (*max_numeric_fraction < 0.0 || *max_numeric_fraction > 1.0)) {
        throw ConfigError("numeric-density threshold must lie in [0, 1]");
    }
    if (min_tokens && max_tokens && *min_tokens > *max_tokens) {
        throw ConfigError("min_tokens exceeds max_tokens");
    }
}

double numeric_fraction(std::string_view sentence) {
    std::size_t total = 0;
    std::size_t numeric = 0;
    for (const auto& t : tokenize(sentence)) {
        if (t.normalized.empty()) continue;
        ++total;
        numeric += is_numeric_token(t.normalized);
    }
    return total == 0 ? 0.0 : static_cast<double>(numeric) / static_cast<double>(total);
}

bool sentence_passes(std::string_view sentence, std::string_view section,
                     const FilterRuleSet& rules) {
    if (!rules.section_blocklist.empty() && !section.empty()) {
        auto norm = normalize_text(section);
        for (const auto& blocked : rules.section_blocklist) {
            if (norm == normalize_text(blocked)) return false;
        }
    }
    const auto norm = " " + normalize_text(sentence);
    for (const auto& kw : rules.keyword_blocklist) {
        auto needle = " " + normalize_text(kw);
        if (needle.size() > 1 && norm.find(needle) != std::string::npos) return false;
    }
    if (rules.max_numeric_fraction && numeric_fraction(sentence) > *rules.max_numeric_fraction) {
        return false;
    }
    if (rules.min_tokens || rules.max_tokens) {
        std::size_t n = 0;
        for (const auto& t : tokenize(sentence)) n += !t.normalized.empty();
        if (rules.min_tokens && n < *rules.min_tokens) return false;
        if (rules.max_tokens && n > *rules.max_tokens) return false;
    }
    return true;
}

std::vector<Quintuple> filter_quintuples(std::span<const Quintuple> qs, const FilterRuleSet& rules) {
    rules.validate();
    std::vector<Quintuple> out;
    for (const auto& q : qs) {
        if (!q.bound) throw StateError("cannot filter quintuple " + q.id() + " before binding sentences");
        if (sentence_passes(q.sent_i, q.section_i, rules) &&
            sentence_passes(q.sent_j, q.section_j, rules)) {
            out.push_back(q);
        }
    }
    return out;
}

std::string serialize_seq(const Quintuple& q) {
    if (!q.bound) throw StateError("quintuple " + q.id() + " has no bound sentences");
    std::string out;
    out.reserve(32 + q.c_u.size() + q.c_v.size() + q.sent_i.size() + q.sent_j.size());
    out += kHead;
    out += q.c_u;
    out += kTail;
    out += q.c_v;
    out += kSep;
    out += q.sent_i;
    out += kSep;
    out += q.sent_j;
    return out;
}

SeqParts parse_seq(std::string_view seq) {
    auto fail = [&] { return ProtocolError("not a Seq(q) string: '" + std::string(seq) + "'"); };
    if (!seq.starts_with(kHead)) throw fail();
    seq.remove_prefix(kHead.size());
    auto tail = seq.find(kTail);
    if (tail == std::string_view::npos) throw fail();
    SeqParts out;
    out.c_u = std::string(seq.substr(0, tail));
    seq.remove_prefix(tail + kTail.size());
    auto sep1 = seq.find(kSep);
    if (sep1 == std::string_view::npos) throw fail();
    out.c_v = std::string(seq.substr(0, sep1));
    seq.remove_prefix(sep1 + kSep.size());
    auto sep2 = seq.find(kSep);
    if (sep2 == std::string_view::npos) throw fail();
    out.sent_i = std::string(seq.substr(0, sep2));
    out.sent_j = std::string(seq.substr(sep2 + kSep.size()));
    return out;
}

QuintupleDataset split_dataset(std::span<const Quintuple> qs, std::array<double, 3> ratios,
                               std::uint64_t seed) {
    for (double r : ratios) {
        if (!(r > 0.0)) throw ConfigError("split ratios must be positive");
    }
    if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
        throw ConfigError("split ratios must sum to 1");
    }
    std::vector<Quintuple> items(qs.begin(), qs.end());
    std::mt19937_64 rng(splitmix64(seed));
    stable_shuffle(items.begin(), items.end(), rng);

    const auto n = items.size();
    auto n_train = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(ratios[0] * static_cast<double>(n))));
    auto n_valid = std::min<std::size_t>(n - n_train, static_cast<std::size_t>(std::llround(ratios[1] * static_cast<double>(n))));

    QuintupleDataset ds;
    ds.seed = seed;
    auto first = std::make_move_iterator(items.begin());
    ds.train.assign(first, first + static_cast<std::ptrdiff_t>(n_train));
    ds.valid.assign(first + static_cast<std::ptrdiff_t>(n_train),
                    first + static_cast<std::ptrdiff_t>(n_train + n_valid));
    ds.test.assign(first + static_cast<std::ptrdiff_t>(n_train + n_valid), std::make_move_iterator(items.end()));
    return ds;
}

std::string quintuples_to_jsonl(std::span<const Quintuple> qs) {
    std::string out;
    for (const auto& q : qs) {
        nlohmann::ordered_json row;
        row["p_i"] = q.p_i;
        row["p_j"] = q.p_j;
        row["p"] = q.p;
        row["c_u"] = q.c_u;
        row["c_v"] = q.c_v;
        row["sent_i"] = q.sent_i;
        row["sent_j"] = q.sent_j;
        row["idea"] = q.idea();
        row["seq"] = q.bound ? serialize_seq(q) : std::string{};
        out += row.dump();
        out.push_back('\n');
    }
    return out;
}

std::vector<Quintuple> quintuples_from_jsonl(std::string_view text) {
    std::vector<Quintuple> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            auto row = nlohmann::json::parse(line);
            Quintuple q;
            q.p_i = row.at("p_i").get<std::string>();
            q.p_j = row.at("p_j").get<std::string>();
            q.p = row.at("p").get<std::string>();
            q.c_u = row.at("c_u").get<std::string>();
            q.c_v = row.at("c_v").get<std::string>();
            q.sent_i = row.value("sent_i", std::string{});
            q.sent_j = row.value("sent_j", std::string{});
            auto idea = row.value("idea", std::string{});
            if (!idea.empty()) q.idea_sentences.push_back(idea);
            q.bound = !row.value("seq", std::string{}).empty();
            out.push_back(std::move(q));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(lineno, e.what());
        }
    }
    return out;
}

void export_quintuples(std::span<const Quintuple> qs, const std::filesystem::path& path) {
    write_text_atomic(path, quintuples_to_jsonl(qs));
}

std::vector<Quintuple> import_quintuples(const std::filesystem::path& path) {
    return quintuples_from_jsonl(read_text(path));
}

std::string manifest_of(std::span<const Quintuple> qs) {
    std::string out;
    for (const auto& q : qs) {
        out += q.id();
        out.push_back('\n');
    }
    return out;
}

}  // namespace cforge
