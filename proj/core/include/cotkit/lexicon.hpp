#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cotkit/tokenizer.hpp"

namespace cotkit {

/// Domain terminology dictionary. Terms are matched case-insensitively on
/// approximate-token boundaries; at each position the longest term wins and
/// the scan resumes after it, so "iron-deficiency anemia" shadows "anemia".
class Lexicon {
public:
    struct Match {
        std::string term;   // lexicon spelling
        TokenSpan span;     // byte range in the searched text
    };

    Lexicon();
    explicit Lexicon(const std::vector<std::string>& terms);

    /// One term per line; blank lines and lines starting with '#' are ignored.
    static Lexicon load(const std::filesystem::path& path);

    bool empty() const noexcept { return size() == 0; }
    std::size_t size() const noexcept;

    std::vector<Match> matches(std::string_view text) const;

private:
    struct Data {
        // first lowercase word -> candidate term word sequences, longest first
        std::unordered_map<std::string, std::vector<std::pair<std::vector<std::string>, std::string>>>
            by_head;
        std::size_t size = 0;
    };
    std::shared_ptr<const Data> data_;
};

std::string ascii_lower(std::string_view s);

/// Lexicon terms occurring in `text`.
std::set<std::string> extract_entities(std::string_view text, const Lexicon& lexicon);

}  // namespace cotkit
