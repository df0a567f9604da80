#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "concept_forge/corpus.hpp"
#include "concept_forge/errors.hpp"
#include "../support/oracles.hpp"

using namespace cforge;
using cforge::testing::TempDir;

namespace {

CorpusStore parse(const std::string& text) {
    std::istringstream in(text);
    return read_corpus(in);
}

ConceptVocabulary vocab_of(std::initializer_list<std::pair<const char*, const char*>> entries) {
    ConceptVocabulary v;
    for (auto [surface, id] : entries) v.add(surface, id);
    return v;
}

PaperRecord paper_with(std::vector<std::string> sentences) {
    PaperRecord p;
    p.id = "p1";
    p.year = 2000;
    p.sentences = std::move(sentences);
    return p;
}

}  // namespace

TEST(SplitSentences, BreaksBeforeUppercaseOrDigit) {
    EXPECT_EQ(split_sentences("One two. Three four."), (std::vector<std::string>{"One two.", "Three four."}));
    EXPECT_EQ(split_sentences("Is it? Yes! 3 more."), (std::vector<std::string>{"Is it?", "Yes!", "3 more."}));
}

TEST(SplitSentences, KeepsAbbreviationsFollowedByLowercase) {
    EXPECT_EQ(split_sentences("We use e.g. this one. Next."),
              (std::vector<std::string>{"We use e.g. this one.", "Next."}));
    EXPECT_EQ(split_sentences("a b."), (std::vector<std::string>{"a b."}));
}

TEST(LoadCorpus, EmptyFileGivesEmptyCorpus) {
    TempDir dir;
    std::ofstream(dir / "c.jsonl").close();
    EXPECT_EQ(load_corpus(dir / "c.jsonl").size(), 0u);
}

TEST(LoadCorpus, SingleRecord) {
    auto c = parse(R"({"id":"p1","year":2000,"title":"","sentences":["a b."],"references":[],"citation_count":0})"
                   "\n");
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c.at("p1").sentences, (std::vector<std::string>{"a b."}));
}

TEST(LoadCorpus, TitleAndCitationCountDefault) {
    auto c = parse(R"({"id":"p1","year":2000,"sentences":["a b."],"references":[]})");
    EXPECT_EQ(c.at("p1").title, "");
    EXPECT_EQ(c.at("p1").citation_count, 0);
}

TEST(LoadCorpus, SplitsSentencesAndInheritsSectionLabels) {
    auto c = parse(R"({"id":"p1","year":2000,"title":"t","sentences":["A b. C d.","E f."],)"
                   R"("references":[],"citation_count":1,"section_labels":["abstract","method"]})");
    const auto& p = c.at("p1");
    EXPECT_EQ(p.sentences, (std::vector<std::string>{"A b.", "C d.", "E f."}));
    EXPECT_EQ(p.section_labels, (std::vector<std::string>{"abstract", "abstract", "method"}));
}

TEST(LoadCorpus, DuplicateIdNamesTheId) {
    const std::string row = R"({"id":"p1","year":2000,"title":"","sentences":[],"references":[],"citation_count":0})";
    try {
        parse(row + "\n" + row + "\n");
        FAIL() << "expected DuplicateIdError";
    } catch (const DuplicateIdError& e) {
        EXPECT_EQ(e.id(), "p1");
        EXPECT_NE(std::string(e.what()).find("p1"), std::string::npos);
    }
}

TEST(LoadCorpus, MalformedLineCarriesLineNumber) {
    const std::string good = R"({"id":"p1","year":2000,"title":"","sentences":[],"references":[],"citation_count":0})";
    for (const std::string& bad : {std::string("{not json"), std::string(R"({"id":"p2","year":"x"})"),
                                  std::string(R"({"id":"p2","year":2000,"sentences":[]})")}) {
        try {
            parse(good + "\n\n" + bad + "\n");
            FAIL() << "expected ParseError for " << bad;
        } catch (const ParseError& e) {
            EXPECT_EQ(e.line(), 3u) << bad;
        }
    }
}

TEST(LoadCorpus, RejectsMismatchedSectionLabelsAndSelfReference) {
    EXPECT_THROW(parse(R"({"id":"p","year":1,"title":"","sentences":["A."],"references":[],"citation_count":0,)"
                       R"("section_labels":["a","b"]})"),
                 ParseError);
    EXPECT_THROW(parse(R"({"id":"p","year":1,"title":"","sentences":[],"references":["p"],"citation_count":0})"),
                 ParseError);
}

TEST(Vocabulary, TsvParsingAndConflicts) {
    std::istringstream in("graph neural network\tgnn\nGNN\tgnn\n\n");
    auto v = read_vocabulary(in);
    EXPECT_EQ(v.size(), 2u);
    EXPECT_EQ(v.lookup("gnn"), std::optional<ConceptId>("gnn"));
    std::istringstream bad("no tab here\n");
    EXPECT_THROW(read_vocabulary(bad), ParseError);

    ConceptVocabulary conflict;
    conflict.add("network", "a");
    EXPECT_THROW(conflict.add("Network", "b"), Error);
    EXPECT_THROW(conflict.add("...", "c"), Error);
}

TEST(MatchConcepts, LeftmostLongestSuppressesNestedSurfaces) {
    auto v = vocab_of({{"graph neural network", "gnn"}, {"neural network", "nn"}});
    auto ms = match_concepts(paper_with({"We use graph neural network models."}), v);
    ASSERT_EQ(ms.size(), 1u);
    EXPECT_EQ(ms[0].concept_id, "gnn");
    EXPECT_EQ(ms[0].char_span, (std::pair<std::size_t, std::size_t>{7, 27}));
}

TEST(MatchConcepts, RespectsTokenBoundaries) {
    auto v = vocab_of({{"network", "n"}});
    EXPECT_TRUE(match_concepts(paper_with({"networks"}), v).empty());
    EXPECT_EQ(match_concepts(paper_with({"A Network, indeed."}), v).size(), 1u);
}

TEST(MatchConcepts, EmptyVocabularyMatchesNothing) {
    EXPECT_TRUE(match_concepts(paper_with({"anything at all"}), ConceptVocabulary{}).empty());
}

TEST(MatchConcepts, PunctuationOnlyTokenBreaksAPhrase) {
    auto v = vocab_of({{"neural network", "nn"}});
    EXPECT_TRUE(match_concepts(paper_with({"neural - network"}), v).empty());
}

namespace {

// Enumerates every token span whose normalized text is a surface, then keeps
// the leftmost-longest non-overlapping ones.
std::vector<std::tuple<std::size_t, std::size_t, ConceptId>> brute_force_matches(const std::string& sentence,
                                                                                 const ConceptVocabulary& v) {
    auto tokens = tokenize(sentence);
    std::vector<std::tuple<std::size_t, std::size_t, ConceptId>> all;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        std::string text;
        for (std::size_t j = i; j < tokens.size(); ++j) {
            if (tokens[j].normalized.empty()) break;
            text += (j == i ? "" : " ") + tokens[j].normalized;
            if (auto id = v.lookup(text)) all.emplace_back(i, j + 1, *id);
        }
    }
    std::vector<std::tuple<std::size_t, std::size_t, ConceptId>> chosen;
    std::size_t next_free = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i < next_free) continue;
        const std::tuple<std::size_t, std::size_t, ConceptId>* best = nullptr;
        for (const auto& m : all) {
            if (std::get<0>(m) == i && (!best || std::get<1>(m) > std::get<1>(*best))) best = &m;
        }
        if (best) {
            chosen.push_back(*best);
            next_free = std::get<1>(*best);
        }
    }
    return chosen;
}

}  // namespace

TEST(MatchConcepts, EqualsBruteForceOnRandomSentences) {
    auto v = vocab_of({{"graph", "g"},
                       {"graph neural network", "gnn"},
                       {"neural network", "nn"},
                       {"network", "net"},
                       {"deep graph", "dg"},
                       {"learning", "l"}});
    const std::vector<std::string> words{"graph", "Graph,", "neural", "network", "networks", "deep",
                                         "learning.", "the", "-", "(network)"};
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        std::string sentence;
        const std::size_t n = 1 + cforge::testing::draw(rng, 10);
        for (std::size_t i = 0; i < n; ++i) {
            sentence += (i ? " " : "") + words[cforge::testing::draw(rng, words.size())];
        }
        auto expected = brute_force_matches(sentence, v);
        auto got = match_concepts(paper_with({sentence}), v);
        auto tokens = tokenize(sentence);
        ASSERT_EQ(got.size(), expected.size()) << sentence;
        for (std::size_t i = 0; i < got.size(); ++i) {
            const auto& [b, e, id] = expected[i];
            EXPECT_EQ(got[i].concept_id, id) << sentence;
            EXPECT_EQ(got[i].char_span.first, tokens[b].begin) << sentence;
            EXPECT_EQ(got[i].char_span.second, tokens[e - 1].end) << sentence;
            // Span text normalizes to a surface of the concept.
            auto span = sentence.substr(got[i].char_span.first, got[i].char_span.second - got[i].char_span.first);
            EXPECT_EQ(v.lookup(normalize_text(span)), std::optional<ConceptId>(id)) << sentence;
        }
        EXPECT_EQ(match_concepts(paper_with({sentence}), v), got);
    }
}

TEST(BuildIndex, SinglePaperAndEmptyCorpus) {
    auto v = vocab_of({{"alpha", "a"}, {"beta", "b"}});
    CorpusStore c({paper_with({"Alpha meets beta."})});
    auto idx = build_index(c, v);
    EXPECT_EQ(idx.concept_to_papers(), (std::map<ConceptId, std::vector<PaperId>>{{"a", {"p1"}}, {"b", {"p1"}}}));
    EXPECT_EQ(idx.paper_to_concepts(), (std::map<PaperId, std::vector<ConceptId>>{{"p1", {"a", "b"}}}));
    EXPECT_TRUE(build_index(CorpusStore{}, v).empty());
}

TEST(BuildIndex, EqualsPlantedConceptsAndIsATranspose) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto rc = cforge::testing::random_corpus(seed, {.max_papers = 20, .max_concepts = 12});
        auto store = rc.store();
        auto idx = build_index(store, rc.vocab);
        for (const auto& p : rc.papers) {
            const auto& planted = rc.planted.at(p.id);
            std::vector<ConceptId> expected(planted.begin(), planted.end());
            EXPECT_EQ(idx.concepts_of(p.id), expected) << "seed " << seed << " paper " << p.id;
            for (const auto& c : rc.concepts) {
                bool forward = idx.contains(p.id, c);
                const auto& back = idx.papers_of(c);
                bool backward = std::binary_search(back.begin(), back.end(), p.id);
                EXPECT_EQ(forward, backward);
                EXPECT_EQ(forward, planted.count(c) == 1);
            }
            for (const auto& m : idx.mentions_of(p.id)) {
                const auto& s = p.sentences.at(m.sentence_index);
                ASSERT_LE(m.char_span.second, s.size());
                EXPECT_TRUE(planted.count(m.concept_id));
            }
        }
    }
}
