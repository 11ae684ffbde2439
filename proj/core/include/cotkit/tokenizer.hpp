#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace cotkit {

/// Half-open byte range of one token inside the text it was cut from.
struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

/// Counts tokens in reasoning text.
///
/// Approximate mode splits on ASCII whitespace and then splits off every
/// ASCII punctuation character as its own token, so "iron-deficiency" is
/// three tokens. Vocab mode further cuts each approximate token into the
/// longest matching pieces of a plain-text subword vocabulary (one piece per
/// line; a leading "##" marks a word-internal continuation piece). Bytes not
/// covered by the vocabulary become single-codepoint tokens.
///
/// Instances are immutable and cheap to copy.
class Tokenizer {
public:
    enum class Mode { approximate, vocab_file };

    Tokenizer();

    static Tokenizer approximate();
    /// Throws ConfigError if the file cannot be read or holds no pieces.
    static Tokenizer from_vocab_file(const std::filesystem::path& path);

    Mode mode() const noexcept { return mode_; }
    const std::filesystem::path& vocab_path() const noexcept { return vocab_path_; }

    std::vector<TokenSpan> spans(std::string_view text) const;
    std::size_t count(std::string_view text) const;
    /// Longest prefix of `text` holding at most `n` tokens, cut at a token end.
    /// Returns `text` unchanged when it already fits.
    std::string prefix(std::string_view text, std::size_t n) const;

private:
    struct Vocab {
        std::unordered_set<std::string> pieces;
        std::size_t max_piece = 0;
    };

    void split_word(std::string_view text, std::size_t begin, std::size_t end,
                    std::vector<TokenSpan>& out) const;

    Mode mode_ = Mode::approximate;
    std::filesystem::path vocab_path_;
    std::shared_ptr<const Vocab> vocab_;
};

std::size_t count_tokens(const Tokenizer& tokenizer, std::string_view text);
std::string token_prefix(const Tokenizer& tokenizer, std::string_view text, std::size_t n);

/// ASCII classification helpers shared by the text-processing modules.
inline bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}
bool is_punct(char c) noexcept;

}  // namespace cotkit
