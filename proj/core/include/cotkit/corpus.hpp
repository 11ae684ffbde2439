#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "cotkit/tokenizer.hpp"

namespace cotkit {

inline constexpr std::array<char, 5> kOptionLabels{'A', 'B', 'C', 'D', 'E'};

/// Index of an option label in kOptionLabels, or -1.
constexpr int option_index(char label) noexcept {
    return (label >= 'A' && label <= 'E') ? label - 'A' : -1;
}

/// One five-option multiple-choice exam item.
struct Question {
    std::string id;
    std::string specialty;
    std::string stem;
    std::array<std::string, 5> options;  // indexed by option_index()
    char answer = 'A';

    const std::string& option(char label) const { return options.at(option_index(label)); }
};

/// Questions in file order plus a per-specialty histogram.
struct QuestionSet {
    std::vector<Question> questions;
    std::map<std::string, std::size_t> specialty_counts;

    std::size_t size() const noexcept { return questions.size(); }
    const Question* find(const std::string& id) const;
};

/// questions.jsonl: one {"id","specialty","stem","options":{"A".."E"},"answer"} per line.
/// Blank lines are skipped. Throws ParseError (with line number) on malformed
/// JSON and ValidationError on schema violations or duplicate ids.
QuestionSet load_questions(const std::filesystem::path& path);
QuestionSet parse_questions(std::istream& in);
std::string to_json_line(const Question& q);

/// A thinking model's raw reasoning chain for one question.
struct ReasoningTrace {
    std::string question_id;
    std::string producer;  // ModelSpec id
    std::string text;
    std::size_t token_count = 0;

    std::string id() const { return question_id + "@" + producer; }
};

ReasoningTrace make_trace(std::string question_id, std::string producer, std::string text,
                          const Tokenizer& tokenizer);

/// traces.jsonl: {"question_id","model","text"} per line; token counts are
/// computed with `tokenizer` on load.
std::vector<ReasoningTrace> load_traces(const std::filesystem::path& path,
                                        const Tokenizer& tokenizer);
std::vector<ReasoningTrace> parse_traces(std::istream& in, const Tokenizer& tokenizer);
std::string to_json_line(const ReasoningTrace& t);

enum class ModelRole : std::uint8_t { thinking = 1, answering = 2, summarizer = 4 };

struct ModelSpec {
    std::string id;
    std::string family;
    std::uint64_t parameters = 0;
    std::uint8_t roles = 0;  // bitwise-or of ModelRole

    bool has_role(ModelRole r) const noexcept {
        return (roles & static_cast<std::uint8_t>(r)) != 0;
    }
};

/// Ordered set of models. Family order (first appearance) defines the
/// A/B/... labels used when classifying transfers.
class ModelRegistry {
public:
    ModelRegistry() = default;
    explicit ModelRegistry(std::vector<ModelSpec> models);

    const std::vector<ModelSpec>& models() const noexcept { return models_; }
    const std::vector<std::string>& families() const noexcept { return families_; }
    const ModelSpec& at(const std::string& id) const;
    bool contains(const std::string& id) const;
    std::size_t family_index(const std::string& family) const;
    std::vector<std::string> ids_with_role(ModelRole role) const;

private:
    std::vector<ModelSpec> models_;
    std::vector<std::string> families_;
};

/// Reads the models file: a TOML subset made of `[[model]]` tables with
/// `id`, `family`, `parameters` (integer count) and `roles` (string array).
ModelRegistry load_models(const std::filesystem::path& path);
ModelRegistry parse_models(std::istream& in);

/// The eight-model grid of two families used throughout the experiments
/// (1.5B/7B/14B/32B and 1.7B/8B/14B/32B).
ModelRegistry reference_model_registry();

/// Positive token budget.
class TokenBudget {
public:
    explicit TokenBudget(std::size_t value);
    std::size_t value() const noexcept { return value_; }
    friend auto operator<=>(const TokenBudget&, const TokenBudget&) = default;

private:
    std::size_t value_;
};

}  // namespace cotkit
