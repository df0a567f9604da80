#include "concept_forge/sampler.hpp"

#include <algorithm>
#include <charconv>
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

constexpr std::string_view kOpen = "[CLS] ";
constexpr std::string_view kIn = ": in ";
constexpr std::string_view kComma = ", ";
constexpr std::string_view kMask = " is [MASK] to ";
constexpr std::string_view kClose = ".[SEP]";

LinkSample make_sample(const ConceptPair& pair, int t, PromptWord prompt, LinkLabel label) {
    LinkSample s{pair.lo, pair.hi, t, prompt, label, {}};
    s.text = serialize_sample(s.c_u, s.c_v, t, prompt);
    return s;
}

}  // namespace

std::string_view to_string(PromptWord p) {
    return p == PromptWord::Existing ? "Existing" : "Unknown";
}

std::string_view to_string(LinkLabel l) {
    return l == LinkLabel::Related ? "related" : "unrelated";
}

PromptWord parse_prompt_word(std::string_view s) {
    if (s == "Existing") return PromptWord::Existing;
    if (s == "Unknown") return PromptWord::Unknown;
    throw ProtocolError("unknown prompt word '" + std::string(s) + "'");
}

LinkLabel parse_link_label(std::string_view s) {
    if (s == "related") return LinkLabel::Related;
    if (s == "unrelated") return LinkLabel::Unrelated;
    throw ProtocolError("unknown label '" + std::string(s) + "'");
}

void SamplerConfig::validate() const {
    if (k < 2) throw ConfigError("sampler.k must be >= 2, got " + std::to_string(k));
    if (d < 1) throw ConfigError("sampler.d must be >= 1, got " + std::to_string(d));
}

PromptWord prompt_of(const EvolvingGraph& g, const ConceptId& u, const ConceptId& v, int t) {
    if (u == v) throw Error("prompt_of needs two distinct concepts");
    if (t < g.t_start() || t > g.t_end()) {
        throw RangeError("year " + std::to_string(t) + " outside graph range");
    }
    return g.has_edge(u, v, t - 1) ? PromptWord::Existing : PromptWord::Unknown;
}

std::string serialize_sample(const ConceptId& u, const ConceptId& v, int t, PromptWord prompt) {
    std::string out;
    out.reserve(64 + u.size() + v.size());
    out += kOpen;
    out += to_string(prompt);
    out += kIn;
    out += std::to_string(t);
    out += kComma;
    out += u;
    out += kMask;
    out += v;
    out += kClose;
    return out;
}

ParsedSample parse_sample_text(std::string_view text) {
    auto fail = [&] { return ProtocolError("not a link sample: '" + std::string(text) + "'"); };
    if (!text.starts_with(kOpen) || !text.ends_with(kClose)) throw fail();
    text.remove_prefix(kOpen.size());
    text.remove_suffix(kClose.size());

    auto colon = text.find(kIn);
    if (colon == std::string_view::npos) throw fail();
    ParsedSample out;
    try {
        out.prompt = parse_prompt_word(text.substr(0, colon));
    } catch (const ProtocolError&) {
        throw fail();
    }
    text.remove_prefix(colon + kIn.size());

    auto comma = text.find(kComma);
    if (comma == std::string_view::npos || comma == 0) throw fail();
    auto year = text.substr(0, comma);
    auto [ptr, ec] = std::from_chars(year.data(), year.data() + year.size(), out.t);
    if (ec != std::errc{} || ptr != year.data() + year.size() || year.front() == '-' ||
        year.front() == '+') {
        throw fail();
    }
    text.remove_prefix(comma + kComma.size());

    auto mask = text.find(kMask);
    if (mask == std::string_view::npos) throw fail();
    out.c_u = std::string(text.substr(0, mask));
    out.c_v = std::string(text.substr(mask + kMask.size()));
    if (out.c_u.empty() || out.c_v.empty()) throw fail();
    return out;
}

std::vector<LinkSample> generate_positives(const EvolvingGraph& g) {
    std::vector<LinkSample> out;
    for (const auto& [pair, born] : g.first_seen_years()) {
        for (int t = born; t <= g.t_end(); ++t) {
            auto prompt = t > born ? PromptWord::Existing : PromptWord::Unknown;
            out.push_back(make_sample(pair, t, prompt, LinkLabel::Related));
        }
    }
    sort_samples(out);
    return out;
}

std::vector<LinkSample> generate_negatives(const EvolvingGraph& g, const SamplerConfig& cfg) {
    cfg.validate();
    const int last = g.t_end() - cfg.d;
    const auto& concepts = g.concepts();
    if (last < g.t_start() || concepts.empty()) return {};

    using Key = std::tuple<int, ConceptId, ConceptId>;
    auto parts = parallel_chunks(
        concepts.size(),
        [&](std::size_t begin, std::size_t end) {
            std::set<Key> found;
            for (std::size_t a = begin; a < end; ++a) {
                const ConceptId& anchor = concepts[a];
                for (int t = g.t_start(); t <= last; ++t) {
                    std::vector<ConceptId> picked;
                    for (const auto& v : k_hop_neighborhood(g, t, anchor, cfg.k)) {
                        if (!g.has_edge(anchor, v, t + cfg.d)) picked.push_back(v);
                    }
                    if (cfg.max_negatives_per_anchor && picked.size() > *cfg.max_negatives_per_anchor) {
                        std::mt19937_64 rng(derive_seed(cfg.seed, anchor, static_cast<std::uint64_t>(t)));
                        stable_shuffle(picked.begin(), picked.end(), rng);
                        picked.resize(*cfg.max_negatives_per_anchor);
                    }
                    for (const auto& v : picked) {
                        auto pair = ConceptPair::of(anchor, v);
                        found.emplace(t, pair.lo, pair.hi);
                    }
                }
            }
            return found;
        },
        4);

    std::set<Key> merged;
    for (auto& part : parts) merged.merge(part);
    std::vector<LinkSample> out;
    out.reserve(merged.size());
    for (const auto& [t, lo, hi] : merged) {
        out.push_back(make_sample(ConceptPair{lo, hi}, t, PromptWord::Unknown, LinkLabel::Unrelated));
    }
    return out;
}

void sort_samples(std::vector<LinkSample>& samples) {
    std::stable_sort(samples.begin(), samples.end(), [](const LinkSample& a, const LinkSample& b) {
        return std::tie(a.t, a.c_u, a.c_v) < std::tie(b.t, b.c_u, b.c_v);
    });
}

std::string samples_to_jsonl(std::vector<LinkSample> samples) {
    sort_samples(samples);
    std::string out;
    for (const auto& s : samples) {
        nlohmann::ordered_json row;
        row["c_u"] = s.c_u;
        row["c_v"] = s.c_v;
        row["t"] = s.t;
        row["prompt"] = to_string(s.prompt);
        row["label"] = to_string(s.label);
        row["text"] = s.text;
        out += row.dump();
        out.push_back('\n');
    }
    return out;
}

std::vector<LinkSample> samples_from_jsonl(std::string_view text) {
    std::vector<LinkSample> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            auto row = nlohmann::json::parse(line);
            LinkSample s;
            s.c_u = row.at("c_u").get<std::string>();
            s.c_v = row.at("c_v").get<std::string>();
            s.t = row.at("t").get<int>();
            s.prompt = parse_prompt_word(row.at("prompt").get<std::string>());
            s.label = parse_link_label(row.at("label").get<std::string>());
            s.text = row.at("text").get<std::string>();
            out.push_back(std::move(s));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(lineno, e.what());
        } catch (const ProtocolError& e) {
            throw ParseError(lineno, e.what());
        }
    }
    return out;
}

void export_samples(const std::vector<LinkSample>& samples, const std::filesystem::path& path) {
    write_text_atomic(path, samples_to_jsonl(samples));
}

std::vector<LinkSample> import_samples(const std::filesystem::path& path) {
    return samples_from_jsonl(read_text(path));
}

}  // namespace cforge
