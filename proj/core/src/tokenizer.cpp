#include "cotkit/tokenizer.hpp"

#include <algorithm>
#include <fstream>

#include "cotkit/errors.hpp"

namespace cotkit {

namespace {

// Length of the UTF-8 sequence starting with `lead` (1 for malformed bytes).
std::size_t utf8_length(unsigned char lead) {
    if (lead < 0x80) return 1;
    if ((lead >> 5) == 0x6) return 2;
    if ((lead >> 4) == 0xE) return 3;
    if ((lead >> 3) == 0x1E) return 4;
    return 1;
}

std::vector<TokenSpan> approximate_spans(std::string_view text) {
    std::vector<TokenSpan> out;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        if (is_space(text[i])) {
            ++i;
            continue;
        }
        if (is_punct(text[i])) {
            out.push_back({i, i + 1});
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && !is_space(text[j]) && !is_punct(text[j])) ++j;
        out.push_back({i, j});
        i = j;
    }
    return out;
}

}  // namespace

bool is_punct(char c) noexcept {
    const auto u = static_cast<unsigned char>(c);
    return (u >= 33 && u <= 47) || (u >= 58 && u <= 64) || (u >= 91 && u <= 96) ||
           (u >= 123 && u <= 126);
}

Tokenizer::Tokenizer() = default;

Tokenizer Tokenizer::approximate() { return Tokenizer{}; }

Tokenizer Tokenizer::from_vocab_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read vocabulary file: " + path.string());
    auto vocab = std::make_shared<Vocab>();
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        vocab->max_piece = std::max(vocab->max_piece, line.size());
        vocab->pieces.insert(std::move(line));
    }
    if (vocab->pieces.empty()) throw ConfigError("vocabulary file is empty: " + path.string());
    Tokenizer t;
    t.mode_ = Mode::vocab_file;
    t.vocab_path_ = path;
    t.vocab_ = std::move(vocab);
    return t;
}

void Tokenizer::split_word(std::string_view text, std::size_t begin, std::size_t end,
                           std::vector<TokenSpan>& out) const {
    std::size_t pos = begin;
    while (pos < end) {
        const bool continuation = pos != begin;
        std::size_t best = 0;
        const std::size_t longest = std::min(vocab_->max_piece, end - pos);
        for (std::size_t len = longest; len > 0 && best == 0; --len) {
            const std::string piece(text.substr(pos, len));
            if (continuation && vocab_->pieces.contains("##" + piece)) best = len;
            else if (vocab_->pieces.contains(piece)) best = len;
        }
        if (best == 0) {
            best = std::min(utf8_length(static_cast<unsigned char>(text[pos])), end - pos);
        }
        out.push_back({pos, pos + best});
        pos += best;
    }
}

std::vector<TokenSpan> Tokenizer::spans(std::string_view text) const {
    auto coarse = approximate_spans(text);
    if (mode_ == Mode::approximate) return coarse;
    std::vector<TokenSpan> out;
    out.reserve(coarse.size());
    for (const auto& s : coarse) split_word(text, s.begin, s.end, out);
    return out;
}

std::size_t Tokenizer::count(std::string_view text) const { return spans(text).size(); }

std::string Tokenizer::prefix(std::string_view text, std::size_t n) const {
    const auto toks = spans(text);
    if (n >= toks.size()) return std::string(text);
    if (n == 0) return {};
    return std::string(text.substr(0, toks[n - 1].end));
}

std::size_t count_tokens(const Tokenizer& tokenizer, std::string_view text) {
    return tokenizer.count(text);
}

std::string token_prefix(const Tokenizer& tokenizer, std::string_view text, std::size_t n) {
    return tokenizer.prefix(text, n);
}

}  // namespace cotkit
