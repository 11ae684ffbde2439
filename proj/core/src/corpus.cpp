#include "cotkit/corpus.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "cotkit/errors.hpp"

namespace cotkit {

using nlohmann::json;

namespace {

std::ifstream open_or_throw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    return in;
}

bool blank(const std::string& line) {
    for (char c : line)
        if (!is_space(c)) return false;
    return true;
}

std::string require_string(const json& obj, const char* key, std::size_t line) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string())
        throw ParseError(line, std::string("missing string field \"") + key + "\"");
    return it->get<std::string>();
}

Question question_from_json(const json& j, std::size_t line) {
    if (!j.is_object()) throw ParseError(line, "record is not a JSON object");
    Question q;
    q.id = require_string(j, "id", line);
    q.specialty = require_string(j, "specialty", line);
    q.stem = require_string(j, "stem", line);
    if (q.id.empty()) throw ValidationError("line " + std::to_string(line) + ": empty question id");

    auto opts = j.find("options");
    if (opts == j.end() || !opts->is_object())
        throw ParseError(line, "missing object field \"options\"");
    for (const auto& [label, text] : opts->items()) {
        if (label.size() != 1 || option_index(label[0]) < 0)
            throw ValidationError("question " + q.id + ": unexpected option label \"" + label + "\"");
        if (!text.is_string())
            throw ParseError(line, "option " + label + " is not a string");
    }
    for (char label : kOptionLabels) {
        const std::string key(1, label);
        auto it = opts->find(key);
        if (it == opts->end())
            throw ValidationError("question " + q.id + ": missing option label " + key);
        q.options[option_index(label)] = it->get<std::string>();
    }

    const std::string answer = require_string(j, "answer", line);
    if (answer.size() != 1 || option_index(answer[0]) < 0)
        throw ValidationError("question " + q.id + ": answer must be one of A-E, got \"" + answer + "\"");
    q.answer = answer[0];
    return q;
}

}  // namespace

const Question* QuestionSet::find(const std::string& id) const {
    for (const auto& q : questions)
        if (q.id == id) return &q;
    return nullptr;
}

QuestionSet parse_questions(std::istream& in) {
    QuestionSet set;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(lineno, e.what());
        }
        Question q = question_from_json(j, lineno);
        if (!seen.insert(q.id).second)
            throw ValidationError("line " + std::to_string(lineno) + ": duplicate question id " + q.id);
        ++set.specialty_counts[q.specialty];
        set.questions.push_back(std::move(q));
    }
    return set;
}

QuestionSet load_questions(const std::filesystem::path& path) {
    auto in = open_or_throw(path);
    return parse_questions(in);
}

std::string to_json_line(const Question& q) {
    json options = json::object();
    for (char label : kOptionLabels) options[std::string(1, label)] = q.option(label);
    json j{{"id", q.id},
           {"specialty", q.specialty},
           {"stem", q.stem},
           {"options", options},
           {"answer", std::string(1, q.answer)}};
    return j.dump();
}

ReasoningTrace make_trace(std::string question_id, std::string producer, std::string text,
                          const Tokenizer& tokenizer) {
    if (text.empty()) throw EmptyTraceError();
    ReasoningTrace t;
    t.question_id = std::move(question_id);
    t.producer = std::move(producer);
    t.token_count = tokenizer.count(text);
    t.text = std::move(text);
    return t;
}

std::vector<ReasoningTrace> parse_traces(std::istream& in, const Tokenizer& tokenizer) {
    std::vector<ReasoningTrace> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(lineno, e.what());
        }
        if (!j.is_object()) throw ParseError(lineno, "record is not a JSON object");
        auto qid = require_string(j, "question_id", lineno);
        auto model = require_string(j, "model", lineno);
        auto text = require_string(j, "text", lineno);
        if (text.empty())
            throw ValidationError("line " + std::to_string(lineno) + ": empty reasoning text");
        out.push_back(make_trace(std::move(qid), std::move(model), std::move(text), tokenizer));
    }
    return out;
}

std::vector<ReasoningTrace> load_traces(const std::filesystem::path& path,
                                        const Tokenizer& tokenizer) {
    auto in = open_or_throw(path);
    return parse_traces(in, tokenizer);
}

std::string to_json_line(const ReasoningTrace& t) {
    return json{{"question_id", t.question_id}, {"model", t.producer}, {"text", t.text}}.dump();
}

TokenBudget::TokenBudget(std::size_t value) : value_(value) {
    if (value == 0) throw BudgetTooSmallError("token budget must be at least 1");
}

}  // namespace cotkit
