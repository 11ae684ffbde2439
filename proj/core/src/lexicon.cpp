#include "cotkit/lexicon.hpp"

#include <algorithm>
#include <fstream>

#include "cotkit/errors.hpp"

namespace cotkit {

namespace {

std::vector<std::string> lower_words(std::string_view text, std::vector<TokenSpan>* spans = nullptr) {
    static const Tokenizer approx = Tokenizer::approximate();
    auto toks = approx.spans(text);
    std::vector<std::string> words;
    words.reserve(toks.size());
    for (const auto& t : toks) words.push_back(ascii_lower(text.substr(t.begin, t.size())));
    if (spans) *spans = std::move(toks);
    return words;
}

}  // namespace

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

Lexicon::Lexicon() : data_(std::make_shared<Data>()) {}

Lexicon::Lexicon(const std::vector<std::string>& terms) {
    auto data = std::make_shared<Data>();
    std::set<std::string> seen;
    for (const auto& term : terms) {
        auto words = lower_words(term);
        if (words.empty()) continue;
        if (!seen.insert(ascii_lower(term)).second) continue;
        data->by_head[words.front()].emplace_back(std::move(words), term);
        ++data->size;
    }
    for (auto& [head, list] : data->by_head) {
        std::stable_sort(list.begin(), list.end(), [](const auto& a, const auto& b) {
            return a.first.size() > b.first.size();
        });
    }
    data_ = std::move(data);
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read lexicon file " + path.string());
    std::vector<std::string> terms;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t b = 0;
        while (b < line.size() && is_space(line[b])) ++b;
        if (b == line.size() || line[b] == '#') continue;
        std::size_t e = line.size();
        while (e > b && is_space(line[e - 1])) --e;
        terms.push_back(line.substr(b, e - b));
    }
    return Lexicon(terms);
}

std::size_t Lexicon::size() const noexcept { return data_->size; }

std::vector<Lexicon::Match> Lexicon::matches(std::string_view text) const {
    std::vector<Match> out;
    if (empty()) return out;
    std::vector<TokenSpan> spans;
    const auto words = lower_words(text, &spans);
    std::size_t i = 0;
    while (i < words.size()) {
        auto it = data_->by_head.find(words[i]);
        std::size_t matched = 0;
        if (it != data_->by_head.end()) {
            for (const auto& [seq, term] : it->second) {
                if (i + seq.size() > words.size()) continue;
                if (std::equal(seq.begin(), seq.end(), words.begin() + static_cast<std::ptrdiff_t>(i))) {
                    out.push_back({term, {spans[i].begin, spans[i + seq.size() - 1].end}});
                    matched = seq.size();
                    break;
                }
            }
        }
        i += matched > 0 ? matched : 1;
    }
    return out;
}

std::set<std::string> extract_entities(std::string_view text, const Lexicon& lexicon) {
    std::set<std::string> out;
    for (auto& m : lexicon.matches(text)) out.insert(std::move(m.term));
    return out;
}

}  // namespace cotkit
