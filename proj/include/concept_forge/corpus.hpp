#pragma once
// Paper corpus ingestion, dictionary concept matching and the paper<->concept index.
//
// Corpus files are JSONL, one paper per line:
//   {"id": str, "year": int, "title": str, "sentences": [str], "references": [str],
//    "citation_count": int, "section_labels": [str] (optional)}
// Vocabulary files are TSV: surface<TAB>concept_id, one entry per line.

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace cforge {

using PaperId = std::string;
using ConceptId = std::string;

struct PaperRecord {
    PaperId id;
    int year = 0;
    std::string title;
    std::vector<std::string> sentences;
    std::vector<PaperId> references;
    long long citation_count = 0;
    // Empty when the source had no labels; otherwise one label per sentence.
    std::vector<std::string> section_labels;

    bool has_section_labels() const { return !section_labels.empty(); }
    const std::string& section_of(std::size_t sentence) const;
};

// Immutable collection of papers keyed by id. Iteration follows file order.
class CorpusStore {
public:
    CorpusStore() = default;
    // Throws DuplicateIdError on a repeated id.
    explicit CorpusStore(std::vector<PaperRecord> papers);

    const std::vector<PaperRecord>& papers() const { return papers_; }
    std::size_t size() const { return papers_.size(); }
    bool empty() const { return papers_.empty(); }
    const PaperRecord* find(std::string_view id) const;
    const PaperRecord& at(std::string_view id) const;

private:
    std::vector<PaperRecord> papers_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

enum class CorpusSchema { JsonlV1 };

// Splits one text block on ". ", "? " or "! " when the next character is an
// uppercase letter or a digit. Terminal punctuation stays with its sentence.
std::vector<std::string> split_sentences(std::string_view text);

CorpusStore load_corpus(const std::filesystem::path& path,
                        CorpusSchema schema = CorpusSchema::JsonlV1);
CorpusStore read_corpus(std::istream& in, CorpusSchema schema = CorpusSchema::JsonlV1);

// Lowercase, strip punctuation at token edges, collapse whitespace.
std::string normalize_text(std::string_view text);

enum class NormalizationRule { LowerStripCollapse };

class ConceptVocabulary {
public:
    ConceptVocabulary() = default;

    // Adds `surface` for `concept`. Throws Error if the surface normalizes to
    // nothing or is already bound to a different concept.
    void add(std::string_view surface, const ConceptId& concept_id);

    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }
    const std::map<std::string, ConceptId>& entries() const { return entries_; }
    NormalizationRule rule() const { return NormalizationRule::LowerStripCollapse; }
    std::optional<ConceptId> lookup(std::string_view normalized_surface) const;
    // Longest surface measured in tokens.
    std::size_t max_tokens() const { return max_tokens_; }
    std::vector<ConceptId> concept_ids() const;

private:
    std::map<std::string, ConceptId> entries_;
    std::size_t max_tokens_ = 0;
};

ConceptVocabulary load_vocabulary(const std::filesystem::path& path);
ConceptVocabulary read_vocabulary(std::istream& in);

struct ConceptMention {
    PaperId paper_id;
    ConceptId concept_id;
    std::size_t sentence_index = 0;
    // Byte offsets [start, end) into the sentence.
    std::pair<std::size_t, std::size_t> char_span{0, 0};

    friend bool operator==(const ConceptMention&, const ConceptMention&) = default;
};

// Leftmost-longest, token-bounded, case-insensitive dictionary matching.
std::vector<ConceptMention> match_concepts(const PaperRecord& paper,
                                           const ConceptVocabulary& vocab);

// Whitespace token with its normalized form and the byte span of the
// unstripped core. Exposed for the filter and text-metric code.
struct Token {
    std::string normalized;
    std::size_t begin = 0;
    std::size_t end = 0;
};
std::vector<Token> tokenize(std::string_view sentence);

class CorpusIndex {
public:
    CorpusIndex() = default;

    // Sorted, unique.
    const std::vector<PaperId>& papers_of(const ConceptId& concept_id) const;
    const std::vector<ConceptId>& concepts_of(const PaperId& paper) const;
    const std::vector<ConceptMention>& mentions_of(const PaperId& paper) const;
    bool contains(const PaperId& paper, const ConceptId& concept_id) const;

    const std::map<ConceptId, std::vector<PaperId>>& concept_to_papers() const {
        return concept_to_papers_;
    }
    const std::map<PaperId, std::vector<ConceptId>>& paper_to_concepts() const {
        return paper_to_concepts_;
    }
    bool empty() const { return paper_to_concepts_.empty(); }

private:
    friend CorpusIndex build_index(const CorpusStore&, const ConceptVocabulary&);

    std::map<ConceptId, std::vector<PaperId>> concept_to_papers_;
    std::map<PaperId, std::vector<ConceptId>> paper_to_concepts_;
    std::map<PaperId, std::vector<ConceptMention>> paper_to_mentions_;
};

// Papers without any mention do not appear in the index.
CorpusIndex build_index(const CorpusStore& corpus, const ConceptVocabulary& vocab);

}  // namespace cforge
