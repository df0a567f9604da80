#include "concept_forge/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "concept_forge/errors.hpp"
#include "concept_forge/random.hpp"

namespace cforge {

namespace {

constexpr std::array<const char*, 30> kNames{
    "graph neural network",  "neural network",        "contrastive learning",
    "text summarization",    "knowledge graph",       "link prediction",
    "language model",        "reinforcement learning", "transfer learning",
    "attention mechanism",   "question answering",    "machine translation",
    "image segmentation",    "object detection",      "generative adversarial network",
    "variational autoencoder", "domain adaptation",   "few-shot learning",
    "meta learning",         "recommender system",    "topic model",
    "word embedding",        "named entity recognition", "sentiment analysis",
    "protein folding",       "drug discovery",        "molecular dynamics",
    "climate model",         "time series forecasting", "anomaly detection",
};

const std::map<std::string, std::string> kAbbreviations{
    {"graph neural network", "GNN"},          {"generative adversarial network", "GAN"},
    {"variational autoencoder", "VAE"},       {"named entity recognition", "NER"},
    {"machine translation", "NMT"},           {"question answering", "QA"},
};

constexpr std::array<const char*, 4> kPairTemplates{
    "We study {a} together with {b} in a unified framework.",
    "This paper combines {a} with {b} to improve robustness.",
    "We propose a method that uses {a} to enhance {b}.",
    "Our work investigates how {a} benefits {b} in practice.",
};
constexpr std::array<const char*, 3> kThirdTemplates{
    "Our analysis also connects {a} to {b} through shared structure.",
    "The same idea extends {b} with insights from {a}.",
    "We further relate {a} and {b} within one model.",
};
constexpr std::array<const char*, 3> kClosingTemplates{
    "Results show that the approach is effective.",
    "Extensive evaluation confirms the benefits.",
    "The findings suggest several directions for future work.",
};
constexpr std::array<const char*, 3> kIntroTemplates{
    "Recent work on {a} has attracted broad attention.",
    "Interest in {a} has grown steadily over the past years.",
    "Many open problems remain in {a} research.",
};

std::string fill(std::string text, const std::string& a, const std::string& b = {}) {
    for (auto [key, value] : {std::pair<std::string, const std::string*>{"{a}", &a}, {"{b}", &b}}) {
        for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key)) {
            text.replace(pos, key.size(), *value);
        }
    }
    return text;
}

class Generator {
public:
    explicit Generator(const SyntheticOptions& o) : opt_(o), rng_(splitmix64(o.seed)) {}

    SyntheticCorpus run();

private:
    double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    std::size_t pick(std::size_t n) { return static_cast<std::size_t>(uniform_index(rng_, n)); }
    template <class Seq>
    const auto& choice(const Seq& s) { return s[pick(s.size())]; }

    std::pair<std::size_t, std::size_t> community_pair(bool bridge);
    std::vector<std::size_t> concepts_for_paper(bool seeding);
    void connect(const std::vector<std::size_t>& cs);
    PaperRecord write_paper(std::size_t number, int year, const std::vector<std::size_t>& cs);

    const SyntheticOptions& opt_;
    std::mt19937_64 rng_;
    std::vector<std::string> names_;
    std::vector<std::size_t> community_;
    std::vector<std::vector<std::size_t>> members_;
    std::vector<std::set<std::size_t>> adjacency_;
    std::vector<std::pair<std::size_t, std::size_t>> edges_;
};

std::pair<std::size_t, std::size_t> Generator::community_pair(bool bridge) {
    for (;;) {
        std::size_t a = pick(names_.size());
        std::size_t b = pick(names_.size());
        if (a == b) continue;
        if (bridge != (community_[a] != community_[b])) continue;
        return {a, b};
    }
}

std::vector<std::size_t> Generator::concepts_for_paper(bool seeding) {
    const double r = unit();
    if (seeding || edges_.empty() || r < opt_.explore_probability) {
        bool bridge = !seeding && members_.size() > 1 && unit() < opt_.bridge_probability;
        auto [a, b] = community_pair(bridge);
        return {a, b};
    }
    if (r < opt_.explore_probability + opt_.close_probability) {
        for (int attempt = 0; attempt < 16; ++attempt) {
            auto [a, b] = choice(edges_);
            if (unit() < 0.5) std::swap(a, b);
            std::vector<std::size_t> open;
            for (auto c : adjacency_[b]) {
                if (c != a && adjacency_[a].count(c) == 0) open.push_back(c);
            }
            if (!open.empty()) return {a, b, choice(open)};
        }
    }
    auto [a, b] = choice(edges_);
    return {a, b};
}

void Generator::connect(const std::vector<std::size_t>& cs) {
    for (std::size_t i = 0; i < cs.size(); ++i) {
        for (std::size_t j = i + 1; j < cs.size(); ++j) {
            auto [lo, hi] = std::minmax(cs[i], cs[j]);
            if (adjacency_[lo].insert(hi).second) {
                adjacency_[hi].insert(lo);
                edges_.emplace_back(lo, hi);
            }
        }
    }
}

PaperRecord Generator::write_paper(std::size_t number, int year, const std::vector<std::size_t>& cs) {
    char id[16];
    std::snprintf(id, sizeof id, "P%04zu", number);
    const auto& a = names_[cs[0]];
    const auto& b = names_[cs[1]];

    PaperRecord p;
    p.id = id;
    p.year = year;
    p.title = "On " + a + " and " + b;

    std::string abstract = fill(choice(kPairTemplates), a, b);
    if (cs.size() > 2) abstract += " " + fill(choice(kThirdTemplates), names_[cs[2]], a);
    abstract += " ";
    abstract += choice(kClosingTemplates);

    const auto& focus = names_[choice(cs)];
    auto abbrev = kAbbreviations.find(focus);
    const std::string& intro_surface =
        (abbrev != kAbbreviations.end() && unit() < 0.5) ? abbrev->second : focus;

    p.sentences = {
        abstract,
        fill(choice(kIntroTemplates), intro_surface),
        fill("Our method builds on {a} and keeps the training procedure simple.", names_[choice(cs)]),
        fill("We obtain 91.2 and 87.5 on 4 of 5 benchmarks with {a}.", names_[choice(cs)]),
        fill("We thank the reviewers for their comments on {a}.", a),
    };
    p.section_labels = {"abstract", "introduction", "method", "experiments", "acknowledgments"};
    return p;
}

SyntheticCorpus Generator::run() {
    if (opt_.num_concepts < 2) throw ConfigError("synthetic corpus needs at least two concepts");
    if (opt_.t_start > opt_.t_end) throw ConfigError("synthetic corpus has an empty year range");
    const std::size_t communities = std::max<std::size_t>(1, std::min(opt_.num_communities, opt_.num_concepts / 2));

    for (std::size_t i = 0; i < opt_.num_concepts; ++i) {
        names_.push_back(i < kNames.size() ? kNames[i] : "concept " + std::to_string(i));
    }
    // Shuffled round-robin keeps community sizes within one of each other.
    std::vector<std::size_t> order(names_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    stable_shuffle(order.begin(), order.end(), rng_);
    community_.assign(names_.size(), 0);
    members_.assign(communities, {});
    for (std::size_t i = 0; i < order.size(); ++i) {
        community_[order[i]] = i % communities;
        members_[i % communities].push_back(order[i]);
    }
    adjacency_.assign(names_.size(), {});

    const auto years = static_cast<std::size_t>(opt_.t_end - opt_.t_start + 1);
    const std::size_t seed_count = std::min(opt_.seed_papers, opt_.num_papers);
    const std::size_t rest = opt_.num_papers - seed_count;

    SyntheticCorpus out;
    std::vector<std::vector<std::size_t>> paper_concepts;
    std::size_t number = 0;
    for (std::size_t y = 0; y < years; ++y) {
        const int year = opt_.t_start + static_cast<int>(y);
        std::size_t count = rest / years + (y < rest % years ? 1 : 0);
        if (y == 0) count += seed_count;
        const std::size_t year_begin = out.papers.size();
        for (std::size_t k = 0; k < count; ++k) {
            bool seeding = y == 0 && k < seed_count;
            auto cs = concepts_for_paper(seeding);
            connect(cs);
            auto paper = write_paper(++number, year, cs);

            // Cite earlier-year papers sharing a concept.
            std::vector<std::size_t> related;
            for (std::size_t i = 0; i < year_begin; ++i) {
                const auto& other = paper_concepts[i];
                bool shares = std::any_of(cs.begin(), cs.end(), [&](std::size_t c) {
                    return std::find(other.begin(), other.end(), c) != other.end();
                });
                if (shares) related.push_back(i);
            }
            stable_shuffle(related.begin(), related.end(), rng_);
            related.resize(std::min(related.size(), opt_.max_references));
            std::sort(related.begin(), related.end());
            for (auto i : related) {
                paper.references.push_back(out.papers[i].id);
                ++out.papers[i].citation_count;
            }
            out.papers.push_back(std::move(paper));
            paper_concepts.push_back(std::move(cs));
        }
    }

    for (const auto& name : names_) {
        out.vocabulary.emplace_back(name, name);
        auto abbrev = kAbbreviations.find(name);
        if (abbrev != kAbbreviations.end()) out.vocabulary.emplace_back(abbrev->second, name);
    }
    return out;
}

}  // namespace

SyntheticCorpus make_synthetic_corpus(const SyntheticOptions& options) {
    return Generator(options).run();
}

CorpusStore to_corpus_store(const SyntheticCorpus& corpus) {
    std::istringstream in(corpus_to_jsonl(corpus.papers));
    return read_corpus(in);
}

ConceptVocabulary to_vocabulary(const SyntheticCorpus& corpus) {
    std::istringstream in(vocabulary_to_tsv(corpus.vocabulary));
    return read_vocabulary(in);
}

std::string corpus_to_jsonl(const std::vector<PaperRecord>& papers) {
    std::string out;
    for (const auto& p : papers) {
        nlohmann::ordered_json row;
        row["id"] = p.id;
        row["year"] = p.year;
        row["title"] = p.title;
        row["sentences"] = p.sentences;
        row["references"] = p.references;
        row["citation_count"] = p.citation_count;
        if (p.has_section_labels()) row["section_labels"] = p.section_labels;
        out += row.dump();
        out.push_back('\n');
    }
    return out;
}

std::string vocabulary_to_tsv(const std::vector<std::pair<std::string, ConceptId>>& entries) {
    std::string out;
    for (const auto& [surface, id] : entries) {
        out += surface;
        out.push_back('\t');
        out += id;
        out.push_back('\n');
    }
    return out;
}

}  // namespace cforge
