#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "cotkit/corpus.hpp"
#include "cotkit/errors.hpp"

namespace cotkit {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

// Drops a trailing `# comment` that is not inside a string literal.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

std::string parse_string(std::string_view v, std::size_t lineno) {
    if (v.size() < 2 || v.front() != '"' || v.back() != '"')
        throw ParseError(lineno, "expected a quoted string");
    return std::string(v.substr(1, v.size() - 2));
}

std::vector<std::string> parse_string_array(std::string_view v, std::size_t lineno) {
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        throw ParseError(lineno, "expected an array of strings");
    std::vector<std::string> out;
    std::stringstream items(std::string(v.substr(1, v.size() - 2)));
    std::string item;
    while (std::getline(items, item, ',')) {
        auto t = trim(item);
        if (t.empty()) continue;
        out.push_back(parse_string(t, lineno));
    }
    return out;
}

std::uint64_t parse_count(std::string_view v, std::size_t lineno) {
    std::string digits;
    for (char c : v)
        if (c != '_') digits.push_back(c);
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc{} || ptr != digits.data() + digits.size())
        throw ParseError(lineno, "expected a non-negative integer");
    return value;
}

std::uint8_t parse_roles(const std::vector<std::string>& names, std::size_t lineno) {
    std::uint8_t roles = 0;
    for (const auto& r : names) {
        if (r == "thinking") roles |= static_cast<std::uint8_t>(ModelRole::thinking);
        else if (r == "answering") roles |= static_cast<std::uint8_t>(ModelRole::answering);
        else if (r == "summarizer") roles |= static_cast<std::uint8_t>(ModelRole::summarizer);
        else throw ParseError(lineno, "unknown role \"" + r + "\"");
    }
    return roles;
}

}  // namespace

ModelRegistry::ModelRegistry(std::vector<ModelSpec> models) : models_(std::move(models)) {
    for (std::size_t i = 0; i < models_.size(); ++i) {
        const auto& m = models_[i];
        if (m.id.empty()) throw ValidationError("model with empty id");
        if (m.parameters == 0) throw ValidationError("model " + m.id + ": parameters must be > 0");
        for (std::size_t j = 0; j < i; ++j)
            if (models_[j].id == m.id) throw ValidationError("duplicate model id " + m.id);
        if (std::find(families_.begin(), families_.end(), m.family) == families_.end())
            families_.push_back(m.family);
    }
}

const ModelSpec& ModelRegistry::at(const std::string& id) const {
    for (const auto& m : models_)
        if (m.id == id) return m;
    throw ValidationError("unknown model id " + id);
}

bool ModelRegistry::contains(const std::string& id) const {
    return std::any_of(models_.begin(), models_.end(), [&](const auto& m) { return m.id == id; });
}

std::size_t ModelRegistry::family_index(const std::string& family) const {
    auto it = std::find(families_.begin(), families_.end(), family);
    if (it == families_.end()) throw ValidationError("unknown model family " + family);
    return static_cast<std::size_t>(it - families_.begin());
}

std::vector<std::string> ModelRegistry::ids_with_role(ModelRole role) const {
    std::vector<std::string> out;
    for (const auto& m : models_)
        if (m.has_role(role)) out.push_back(m.id);
    return out;
}

ModelRegistry parse_models(std::istream& in) {
    std::vector<ModelSpec> models;
    bool in_table = false;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line == "[[model]]" || line == "[[models]]") {
            models.emplace_back();
            in_table = true;
            continue;
        }
        if (line.front() == '[') throw ParseError(lineno, "unsupported table header " + line);
        if (!in_table) throw ParseError(lineno, "key outside of a [[model]] table");
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(lineno, "expected key = value");
        const auto key = trim(std::string_view(line).substr(0, eq));
        const auto value = trim(std::string_view(line).substr(eq + 1));
        auto& m = models.back();
        if (key == "id") m.id = parse_string(value, lineno);
        else if (key == "family") m.family = parse_string(value, lineno);
        else if (key == "parameters") m.parameters = parse_count(value, lineno);
        else if (key == "roles") m.roles = parse_roles(parse_string_array(value, lineno), lineno);
        else throw ParseError(lineno, "unknown key \"" + key + "\"");
    }
    return ModelRegistry(std::move(models));
}

ModelRegistry load_models(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open models file " + path.string());
    return parse_models(in);
}

ModelRegistry reference_model_registry() {
    constexpr auto both = static_cast<std::uint8_t>(ModelRole::thinking) |
                          static_cast<std::uint8_t>(ModelRole::answering);
    constexpr auto all = both | static_cast<std::uint8_t>(ModelRole::summarizer);
    return ModelRegistry({
        {"deepseek-r1-1.5b", "DeepSeek-R1", 1'500'000'000ULL, both},
        {"deepseek-r1-7b", "DeepSeek-R1", 7'000'000'000ULL, both},
        {"deepseek-r1-14b", "DeepSeek-R1", 14'000'000'000ULL, both},
        {"deepseek-r1-32b", "DeepSeek-R1", 32'000'000'000ULL, both},
        {"qwen3-1.7b", "Qwen3", 1'700'000'000ULL, both},
        {"qwen3-8b", "Qwen3", 8'000'000'000ULL, both},
        {"qwen3-14b", "Qwen3", 14'000'000'000ULL, both},
        {"qwen3-32b", "Qwen3", 32'000'000'000ULL, all},
    });
}

}  // namespace cotkit
