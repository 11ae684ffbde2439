#include "cotkit/segmenter.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "cotkit/errors.hpp"

namespace cotkit {

namespace {

const Tokenizer& approx_tokenizer() {
    static const Tokenizer t = Tokenizer::approximate();
    return t;
}

// Lowercase word tokens of `text`, punctuation dropped, with their spans.
std::vector<std::string> words_of(std::string_view text, std::vector<TokenSpan>* spans = nullptr) {
    std::vector<std::string> out;
    for (const auto& s : approx_tokenizer().spans(text)) {
        if (s.size() == 1 && is_punct(text[s.begin])) continue;
        out.push_back(ascii_lower(text.substr(s.begin, s.size())));
        if (spans) spans->push_back(s);
    }
    return out;
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool starts_with_words(const std::vector<std::string>& words, std::size_t at,
                       const std::vector<std::string>& phrase) {
    if (phrase.empty() || at + phrase.size() > words.size()) return false;
    return std::equal(phrase.begin(), phrase.end(), words.begin() + static_cast<std::ptrdiff_t>(at));
}

// "1." / "2)" / "Step 3:" at the start of a sentence.
bool opens_numbered_step(std::string_view sentence) {
    const auto toks = approx_tokenizer().spans(sentence);
    if (toks.size() >= 2) {
        auto first = sentence.substr(toks[0].begin, toks[0].size());
        auto second = sentence.substr(toks[1].begin, toks[1].size());
        if (all_digits(first) && (second == "." || second == ")")) return true;
    }
    if (toks.size() >= 3) {
        auto first = ascii_lower(sentence.substr(toks[0].begin, toks[0].size()));
        auto second = sentence.substr(toks[1].begin, toks[1].size());
        auto third = sentence.substr(toks[2].begin, toks[2].size());
        if (first == "step" && all_digits(second) && (third == ":" || third == "."))
            return true;
    }
    return false;
}

std::size_t word_count(std::string_view text) { return words_of(text).size(); }

}  // namespace

std::string MarkerTable::opening_marker(std::string_view sentence) const {
    if (numbered_steps && opens_numbered_step(sentence)) return "step";
    const auto w = words_of(sentence);
    std::string best;
    std::size_t best_len = 0;
    for (const auto& m : words) {
        const auto phrase = words_of(m);
        if (phrase.size() > best_len && starts_with_words(w, 0, phrase)) {
            best = ascii_lower(m);
            best_len = phrase.size();
        }
    }
    return best;
}

std::multiset<std::string> MarkerTable::occurrences(std::string_view text) const {
    std::multiset<std::string> out;
    if (numbered_steps && opens_numbered_step(text)) out.insert("step");
    const auto w = words_of(text);
    std::vector<std::vector<std::string>> phrases;
    phrases.reserve(words.size());
    for (const auto& m : words) phrases.push_back(words_of(m));
    std::size_t i = 0;
    while (i < w.size()) {
        std::size_t hit = 0;
        std::string tag;
        for (std::size_t k = 0; k < phrases.size(); ++k) {
            if (phrases[k].size() > hit && starts_with_words(w, i, phrases[k])) {
                hit = phrases[k].size();
                tag = ascii_lower(words[k]);
            }
        }
        if (hit > 0) {
            out.insert(tag);
            i += hit;
        } else {
            ++i;
        }
    }
    return out;
}

bool MarkerTable::opens_conclusion(std::string_view sentence) const {
    const auto w = words_of(sentence);
    return std::any_of(conclusion_openers.begin(), conclusion_openers.end(),
                       [&](const std::string& p) { return starts_with_words(w, 0, words_of(p)); });
}

SegmentParams load_segment_params(const std::filesystem::path& path, SegmentParams base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read segmenter config " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid segmenter config " + path.string() + ": " + e.what());
    }
    try {
        if (j.contains("markers")) base.markers.words = j.at("markers").get<std::vector<std::string>>();
        if (j.contains("conclusion_openers"))
            base.markers.conclusion_openers = j.at("conclusion_openers").get<std::vector<std::string>>();
        if (j.contains("numbered_steps")) base.markers.numbered_steps = j.at("numbered_steps").get<bool>();
        if (j.contains("min_segment_tokens"))
            base.min_segment_tokens = j.at("min_segment_tokens").get<std::size_t>();
        if (j.contains("abbreviations"))
            base.abbreviations = j.at("abbreviations").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid segmenter config " + path.string() + ": " + e.what());
    }
    return base;
}

std::vector<Sentence> split_sentences(std::string_view text, const SegmentParams& params) {
    std::vector<Sentence> out;
    const std::size_t n = text.size();
    std::size_t start = 0;
    auto skip_space = [&](std::size_t p) {
        while (p < n && is_space(text[p])) ++p;
        return p;
    };
    start = skip_space(0);
    for (std::size_t i = start; i < n; ++i) {
        const char c = text[i];
        if (c != '.' && c != '!' && c != '?' && c != ';') continue;
        std::size_t j = i + 1;
        while (j < n && (text[j] == ')' || text[j] == ']' || text[j] == '"' || text[j] == '\'')) ++j;
        if (j < n && !is_space(text[j])) continue;
        if (c == '.') {
            std::size_t w = i;
            while (w > start && !is_space(text[w - 1])) --w;
            const auto word = ascii_lower(text.substr(w, i + 1 - w));
            if (std::find(params.abbreviations.begin(), params.abbreviations.end(), word) !=
                params.abbreviations.end())
                continue;
            if (all_digits(text.substr(start, i - start))) continue;  // list number "1."
        }
        out.push_back({start, j});
        start = skip_space(j);
        i = start == 0 ? 0 : start - 1;
    }
    if (start < n) {
        std::size_t e = n;
        while (e > start && is_space(text[e - 1])) --e;
        if (e > start) out.push_back({start, e});
    }
    return out;
}

std::vector<Segment> segment_text(std::string_view text, const Tokenizer& tokenizer,
                                  const SegmentParams& params) {
    const auto sentences = split_sentences(text, params);
    if (sentences.empty()) throw EmptyTraceError();

    const std::size_t ns = sentences.size();
    std::vector<std::string> opening(ns);
    std::vector<std::size_t> words(ns);
    std::ptrdiff_t last_marker = -1;
    std::ptrdiff_t last_conclusion = -1;
    for (std::size_t s = 0; s < ns; ++s) {
        const auto body = text.substr(sentences[s].begin, sentences[s].end - sentences[s].begin);
        opening[s] = params.markers.opening_marker(body);
        words[s] = word_count(body);
        if (!opening[s].empty()) last_marker = static_cast<std::ptrdiff_t>(s);
        if (params.markers.opens_conclusion(body)) last_conclusion = static_cast<std::ptrdiff_t>(s);
    }
    // The final segment starts at the last conclusion opener when no step
    // marker follows it; nothing after that point splits off.
    const std::size_t conclusion_start =
        (last_conclusion >= 0 && last_conclusion >= last_marker) ? static_cast<std::size_t>(last_conclusion)
                                                                 : ns;

    std::vector<std::pair<std::size_t, std::size_t>> groups;  // [first, last] sentence
    std::size_t first = 0;
    std::size_t group_words = 0;
    for (std::size_t s = 0; s < ns; ++s) {
        if (s > first) {
            bool brk = false;
            if (s == conclusion_start) brk = true;
            else if (s < conclusion_start)
                brk = !opening[s].empty() || group_words > params.min_segment_tokens;
            if (brk) {
                groups.emplace_back(first, s - 1);
                first = s;
                group_words = 0;
            }
        }
        group_words += words[s];
    }
    groups.emplace_back(first, ns - 1);

    std::vector<Segment> segments;
    segments.reserve(groups.size());
    for (const auto& [a, b] : groups) {
        Segment seg;
        seg.index = segments.size();
        seg.begin = sentences[a].begin;
        seg.end = sentences[b].end;
        seg.text = std::string(text.substr(seg.begin, seg.end - seg.begin));
        seg.token_count = tokenizer.count(seg.text);
        seg.opening_marker = opening[a];
        for (std::size_t s = a; s <= b; ++s) {
            auto body = text.substr(sentences[s].begin, sentences[s].end - sentences[s].begin);
            seg.sentences.emplace_back(body);
            seg.markers.merge(params.markers.occurrences(body));
        }
        seg.entities = extract_entities(seg.text, params.lexicon);
        segments.push_back(std::move(seg));
    }
    segments.back().is_conclusion = true;
    return segments;
}

std::vector<Segment> segment_trace(const ReasoningTrace& trace, const Tokenizer& tokenizer,
                                   const SegmentParams& params) {
    if (trace.text.empty()) throw EmptyTraceError();
    return segment_text(trace.text, tokenizer, params);
}

std::string reassemble(std::string_view source, const std::vector<Segment>& segments) {
    std::string out;
    std::size_t pos = 0;
    for (const auto& s : segments) {
        out.append(source.substr(pos, s.begin - pos));
        out.append(s.text);
        pos = s.end;
    }
    out.append(source.substr(pos));
    return out;
}

std::set<std::string> extract_entities(const Segment& segment, const Lexicon& lexicon) {
    return extract_entities(segment.text, lexicon);
}

std::string_view to_string(EdgeKind kind) {
    switch (kind) {
        case EdgeKind::entity_ref: return "entity_ref";
        case EdgeKind::connective: return "connective";
        case EdgeKind::chain: return "chain";
    }
    return "unknown";
}

DependencyGraph::DependencyGraph(std::size_t node_count) : preds_(node_count), succs_(node_count) {}

void DependencyGraph::add_edge(std::size_t from, std::size_t to, EdgeKind kind) {
    if (!(from < to && to < node_count()))
        throw ValidationError("dependency edges must point forward within the graph");
    add_edge_unchecked(from, to, kind);
}

void DependencyGraph::add_edge_unchecked(std::size_t from, std::size_t to, EdgeKind kind) {
    if (from == to || from >= node_count() || to >= node_count())
        throw ValidationError("invalid dependency edge");
    if (has_edge(from, to)) return;
    edges_.push_back({from, to, kind});
    succs_[from].push_back(to);
    preds_[to].push_back(from);
}

bool DependencyGraph::has_edge(std::size_t from, std::size_t to) const {
    const auto& s = succs_.at(from);
    return std::find(s.begin(), s.end(), to) != s.end();
}

bool DependencyGraph::weakly_connected() const {
    const std::size_t n = node_count();
    if (n <= 1) return true;
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& e : edges_) parent[find(e.from)] = find(e.to);
    const auto root = find(0);
    for (std::size_t i = 1; i < n; ++i)
        if (find(i) != root) return false;
    return true;
}

std::map<std::string, std::size_t> first_mentions(const std::vector<Segment>& segments) {
    std::map<std::string, std::size_t> out;
    for (const auto& s : segments)
        for (const auto& e : s.entities) out.emplace(e, s.index);
    return out;
}

DependencyGraph build_dependency_graph(const std::vector<Segment>& segments) {
    DependencyGraph g(segments.size());
    const auto registry = first_mentions(segments);
    for (const auto& s : segments) {
        for (const auto& e : s.entities) {
            const auto origin = registry.at(e);
            if (origin < s.index) g.add_edge(origin, s.index, EdgeKind::entity_ref);
        }
    }
    for (std::size_t j = 1; j < segments.size(); ++j) {
        if (!segments[j].opening_marker.empty()) g.add_edge(j - 1, j, EdgeKind::connective);
    }
    if (!g.weakly_connected()) {
        for (std::size_t i = 0; i + 1 < segments.size(); ++i) g.add_edge(i, i + 1, EdgeKind::chain);
    }
    return g;
}

}  // namespace cotkit
