#include "concept_forge/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "concept_forge/errors.hpp"
#include "concept_forge/parallel.hpp"

namespace cforge {

namespace {

using json = nlohmann::json;

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

const std::string kEmpty;

template <class T>
T required(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(line, std::string("missing field '") + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ParseError(line, std::string("field '") + key + "' has the wrong type");
    }
}

PaperRecord parse_paper(const std::string& text, std::size_t line) {
    json obj;
    try {
        obj = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(line, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(line, "expected a JSON object");

    PaperRecord p;
    p.id = required<std::string>(obj, "id", line);
    if (p.id.empty()) throw ParseError(line, "empty paper id");
    p.year = required<int>(obj, "year", line);
    p.title = obj.value("title", std::string{});
    auto raw_sentences = required<std::vector<std::string>>(obj, "sentences", line);
    p.references = required<std::vector<std::string>>(obj, "references", line);
    if (obj.contains("citation_count")) {
        p.citation_count = required<long long>(obj, "citation_count", line);
        if (p.citation_count < 0) throw ParseError(line, "negative citation_count");
    }
    std::vector<std::string> raw_labels;
    if (obj.contains("section_labels") && !obj["section_labels"].is_null()) {
        raw_labels = required<std::vector<std::string>>(obj, "section_labels", line);
        if (raw_labels.size() != raw_sentences.size()) {
            throw ParseError(line, "section_labels length does not match sentences");
        }
    }
    if (std::find(p.references.begin(), p.references.end(), p.id) != p.references.end()) {
        throw ParseError(line, "paper '" + p.id + "' references itself");
    }

    for (std::size_t i = 0; i < raw_sentences.size(); ++i) {
        for (auto& s : split_sentences(raw_sentences[i])) {
            p.sentences.push_back(std::move(s));
            if (!raw_labels.empty()) p.section_labels.push_back(raw_labels[i]);
        }
    }
    return p;
}

}  // namespace

const std::string& PaperRecord::section_of(std::size_t sentence) const {
    if (sentence >= section_labels.size()) return kEmpty;
    return section_labels[sentence];
}

CorpusStore::CorpusStore(std::vector<PaperRecord> papers) : papers_(std::move(papers)) {
    by_id_.reserve(papers_.size());
    for (std::size_t i = 0; i < papers_.size(); ++i) {
        if (!by_id_.emplace(papers_[i].id, i).second) throw DuplicateIdError(papers_[i].id);
    }
}

const PaperRecord* CorpusStore::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &papers_[it->second];
}

const PaperRecord& CorpusStore::at(std::string_view id) const {
    const auto* p = find(id);
    if (p == nullptr) throw LookupError("unknown paper '" + std::string(id) + "'");
    return *p;
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i + 2 < text.size(); ++i) {
        char c = text[i];
        if ((c == '.' || c == '?' || c == '!') && text[i + 1] == ' ') {
            auto next = static_cast<unsigned char>(text[i + 2]);
            if (std::isupper(next) || std::isdigit(next)) {
                out.emplace_back(text.substr(start, i + 1 - start));
                start = i + 2;
            }
        }
    }
    if (start < text.size()) out.emplace_back(text.substr(start));
    return out;
}

CorpusStore read_corpus(std::istream& in, CorpusSchema /*schema*/) {
    std::vector<PaperRecord> papers;
    std::unordered_map<std::string, std::size_t> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (std::all_of(line.begin(), line.end(), is_space)) continue;
        auto paper = parse_paper(line, lineno);
        if (!seen.emplace(paper.id, lineno).second) throw DuplicateIdError(paper.id);
        papers.push_back(std::move(paper));
    }
    return CorpusStore(std::move(papers));
}

CorpusStore load_corpus(const std::filesystem::path& path, CorpusSchema schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file '" + path.string() + "'");
    return read_corpus(in, schema);
}

std::vector<Token> tokenize(std::string_view sentence) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    while (i < sentence.size()) {
        while (i < sentence.size() && is_space(sentence[i])) ++i;
        if (i >= sentence.size()) break;
        std::size_t b = i;
        while (i < sentence.size() && !is_space(sentence[i])) ++i;
        std::size_t e = i;
        std::size_t raw_b = b;
        while (b < e && is_punct(sentence[b])) ++b;
        while (e > b && is_punct(sentence[e - 1])) --e;
        Token t;
        if (b == e) {
            t.begin = t.end = raw_b;
        } else {
            t.begin = b;
            t.end = e;
            t.normalized.reserve(e - b);
            for (std::size_t k = b; k < e; ++k) t.normalized.push_back(lower(sentence[k]));
        }
        tokens.push_back(std::move(t));
    }
    return tokens;
}

std::string normalize_text(std::string_view text) {
    std::string out;
    for (const auto& t : tokenize(text)) {
        if (t.normalized.empty()) continue;
        if (!out.empty()) out.push_back(' ');
        out += t.normalized;
    }
    return out;
}

void ConceptVocabulary::add(std::string_view surface, const ConceptId& concept_id) {
    std::string key = normalize_text(surface);
    if (key.empty()) {
        throw Error("vocabulary surface '" + std::string(surface) + "' is empty after normalization");
    }
    if (concept_id.empty()) throw Error("empty concept id for surface '" + key + "'");
    auto [it, inserted] = entries_.emplace(key, concept_id);
    if (!inserted && it->second != concept_id) {
        throw Error("surface '" + key + "' bound to both '" + it->second + "' and '" + concept_id +
                    "'");
    }
    std::size_t ntok = static_cast<std::size_t>(std::count(key.begin(), key.end(), ' ')) + 1;
    max_tokens_ = std::max(max_tokens_, ntok);
}

std::optional<ConceptId> ConceptVocabulary::lookup(std::string_view normalized_surface) const {
    auto it = entries_.find(std::string(normalized_surface));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

std::vector<ConceptId> ConceptVocabulary::concept_ids() const {
    std::vector<ConceptId> ids;
    for (const auto& [surface, id] : entries_) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

ConceptVocabulary read_vocabulary(std::istream& in) {
    ConceptVocabulary vocab;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (std::all_of(line.begin(), line.end(), is_space)) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos) throw ParseError(lineno, "expected surface<TAB>concept_id");
        try {
            vocab.add(line.substr(0, tab), line.substr(tab + 1));
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(lineno, e.what());
        }
    }
    return vocab;
}

ConceptVocabulary load_vocabulary(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open vocabulary file '" + path.string() + "'");
    return read_vocabulary(in);
}

std::vector<ConceptMention> match_concepts(const PaperRecord& paper,
                                           const ConceptVocabulary& vocab) {
    std::vector<ConceptMention> mentions;
    if (vocab.empty()) return mentions;
    const std::size_t max_len = vocab.max_tokens();

    for (std::size_t s = 0; s < paper.sentences.size(); ++s) {
        const auto tokens = tokenize(paper.sentences[s]);
        std::size_t i = 0;
        while (i < tokens.size()) {
            std::size_t matched = 0;
            std::optional<ConceptId> hit;
            // A punctuation-only token breaks any phrase that would span it.
            std::size_t run = 0;
            while (run < max_len && i + run < tokens.size() && !tokens[i + run].normalized.empty()) {
                ++run;
            }
            std::string key;
            for (std::size_t len = run; len >= 1; --len) {
                key.clear();
                for (std::size_t k = 0; k < len; ++k) {
                    if (k) key.push_back(' ');
                    key += tokens[i + k].normalized;
                }
                if ((hit = vocab.lookup(key))) {
                    matched = len;
                    break;
                }
            }
            if (matched == 0) {
                ++i;
                continue;
            }
            mentions.push_back(ConceptMention{paper.id, *hit, s,
                                              {tokens[i].begin, tokens[i + matched - 1].end}});
            i += matched;
        }
    }
    return mentions;
}

const std::vector<PaperId>& CorpusIndex::papers_of(const ConceptId& concept_id) const {
    static const std::vector<PaperId> none;
    auto it = concept_to_papers_.find(concept_id);
    return it == concept_to_papers_.end() ? none : it->second;
}

const std::vector<ConceptId>& CorpusIndex::concepts_of(const PaperId& paper) const {
    static const std::vector<ConceptId> none;
    auto it = paper_to_concepts_.find(paper);
    return it == paper_to_concepts_.end() ? none : it->second;
}

const std::vector<ConceptMention>& CorpusIndex::mentions_of(const PaperId& paper) const {
    static const std::vector<ConceptMention> none;
    auto it = paper_to_mentions_.find(paper);
    return it == paper_to_mentions_.end() ? none : it->second;
}

bool CorpusIndex::contains(const PaperId& paper, const ConceptId& concept_id) const {
    const auto& cs = concepts_of(paper);
    return std::binary_search(cs.begin(), cs.end(), concept_id);
}

CorpusIndex build_index(const CorpusStore& corpus, const ConceptVocabulary& vocab) {
    const auto& papers = corpus.papers();
    auto chunks = parallel_chunks(papers.size(), [&](std::size_t begin, std::size_t end) {
        std::vector<std::vector<ConceptMention>> part;
        part.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) part.push_back(match_concepts(papers[i], vocab));
        return part;
    });

    CorpusIndex index;
    for (auto& chunk : chunks) {
        for (auto& mentions : chunk) {
            if (mentions.empty()) continue;
            const PaperId& pid = mentions.front().paper_id;
            auto& concepts = index.paper_to_concepts_[pid];
            for (const auto& m : mentions) concepts.push_back(m.concept_id);
            std::sort(concepts.begin(), concepts.end());
            concepts.erase(std::unique(concepts.begin(), concepts.end()), concepts.end());
            for (const auto& c : concepts) index.concept_to_papers_[c].push_back(pid);
            index.paper_to_mentions_[pid] = std::move(mentions);
        }
    }
    for (auto& [c, ps] : index.concept_to_papers_) std::sort(ps.begin(), ps.end());
    return index;
}

}  // namespace cforge
