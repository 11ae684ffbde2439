#include "cotkit/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "cotkit/errors.hpp"

namespace cotkit {

using nlohmann::json;

namespace {

void append_options(std::string& out, const Question& q) {
    for (char label : kOptionLabels) out += fmt::format("{}. {}\n", label, q.option(label));
}

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

std::string build_answer_prompt(const Question& q, const std::string& reasoning) {
    std::string out = q.stem + "\n\n";
    append_options(out, q);
    if (!reasoning.empty()) out += "\nReasoning:\n" + reasoning + "\n";
    out += "\n";
    out += kAnswerInstruction;
    return out;
}

std::string build_thinking_prompt(const Question& q) {
    std::string out = q.stem + "\n\n";
    append_options(out, q);
    out += "\nThink through the question step by step, then state the answer as a single letter A–E.";
    return out;
}

std::optional<char> parse_answer_letter(const std::string& reply) {
    for (std::size_t i = 0; i < reply.size(); ++i) {
        const char c = reply[i];
        if (c < 'A' || c > 'E') continue;
        if (i > 0 && is_alnum(reply[i - 1])) continue;
        if (i + 1 < reply.size() && is_alnum(reply[i + 1])) continue;
        return c;
    }
    return std::nullopt;
}

AnswerOutcome answer_and_score(const Question& q, const std::string& reasoning, const std::string& answering_model,
                               ChatClient& client, ResponseCache& cache) {
    const auto prompt = build_answer_prompt(q, reasoning);
    const auto res = cached_call(cache, answering_request(answering_model, prompt), client);
    AnswerOutcome out;
    out.prompt_tokens = Tokenizer::approximate().count(prompt);
    out.from_cache = res.from_cache;
    out.predicted = parse_answer_letter(res.response.text);
    out.correct = out.predicted && *out.predicted == q.answer;
    if (!out.predicted)
        spdlog::warn("question {}: no answer letter in reply from {}", q.id, answering_model);
    return out;
}

CompressedTrace refine_compression(const ReasoningTrace& trace, const CompressedTrace& compressed,
                                   const std::string& summarizer_model, ChatClient& client, ResponseCache& cache,
                                   const Tokenizer& tokenizer) {
    if (compressed.text.empty()) return compressed;
    const std::string system =
        "You condense clinical reasoning. Keep every number, drug, finding and the final answer. "
        "Do not add new facts.";
    const std::string user = fmt::format(
        "Rewrite the following reasoning in at most {} tokens.\n\nOriginal reasoning:\n{}\n\nDraft summary:\n{}",
        compressed.budget, trace.text, compressed.text);
    std::string text;
    try {
        text = cached_call(cache, summarizer_request(summarizer_model, system, user), client).response.text;
    } catch (const RuntimeError& e) {
        spdlog::warn("refinement of {} failed, keeping deterministic output: {}", trace.id(), e.what());
        return compressed;
    }
    const auto tokens = tokenizer.count(text);
    if (text.empty() || tokens > compressed.budget) {
        spdlog::info("refinement of {} rejected ({} tokens, budget {})", trace.id(), tokens, compressed.budget);
        return compressed;
    }
    CompressedTrace out = compressed;
    out.text = std::move(text);
    out.token_count = tokens;
    return out;
}

void RunManifest::validate() const {
    if (thinking.empty() || answering.empty()) throw ConfigError("manifest needs thinking and answering models");
    if (budgets.empty()) throw ConfigError("manifest needs at least one budget");
    for (auto b : budgets)
        if (b == 0) throw ConfigError("budgets must be positive");
    if (strategies.empty()) throw ConfigError("manifest needs at least one strategy");
    if (concurrency == 0) throw ConfigError("concurrency must be at least 1");
    if (!(completeness_threshold >= 0.0 && completeness_threshold <= 1.0))
        throw ConfigError("completeness_threshold must lie in [0,1]");
}

RunManifest parse_manifest(const std::string& text, const std::filesystem::path& base) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
    }
    RunManifest m;
    try {
        if (j.value("schema_version", 1) != 1) throw ConfigError("unsupported manifest schema_version");
        m.questions = resolve(base, j.at("questions").get<std::string>());
        if (j.contains("traces")) m.traces = resolve(base, j.at("traces").get<std::string>());
        if (j.contains("models")) m.models = resolve(base, j.at("models").get<std::string>());
        if (j.contains("lexicon")) m.lexicon = resolve(base, j.at("lexicon").get<std::string>());
        if (j.contains("segmenter")) m.segmenter = resolve(base, j.at("segmenter").get<std::string>());
        m.thinking = j.at("thinking").get<std::vector<std::string>>();
        m.answering = j.at("answering").get<std::vector<std::string>>();
        m.budgets = j.at("budgets").get<std::vector<std::size_t>>();
        if (j.contains("strategies")) {
            m.strategies.clear();
            for (const auto& s : j.at("strategies")) m.strategies.push_back(parse_strategy(s.get<std::string>()));
        }
        m.seed = j.value("seed", std::uint64_t{0});
        m.endpoint = j.value("endpoint", std::string{});
        m.concurrency = j.value("concurrency", std::size_t{4});
        m.output_dir = resolve(base, j.value("output_dir", std::string{"out"}));
        m.cache = j.contains("cache") ? resolve(base, j.at("cache").get<std::string>()) : m.output_dir / "cache.jsonl";
        m.completeness_threshold = j.value("completeness_threshold", 0.95);
        m.record_latency = j.value("record_latency", false);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid manifest: ") + e.what());
    }
    m.validate();
    return m;
}

RunManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read manifest " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_manifest(ss.str(), path.parent_path());
}

RunResult run_matrix(const RunManifest& m, ChatClient& client, ResponseCache& cache) {
    m.validate();
    const auto registry = m.models ? load_models(*m.models) : reference_model_registry();
    for (const auto& t : m.thinking)
        if (!registry.at(t).has_role(ModelRole::thinking)) throw ConfigError(t + " is not a thinking model");
    for (const auto& a : m.answering)
        if (!registry.at(a).has_role(ModelRole::answering)) throw ConfigError(a + " is not an answering model");

    CompressionContext ctx;
    if (m.segmenter) ctx.segmenter = load_segment_params(*m.segmenter, ctx.segmenter);
    if (m.lexicon) ctx.segmenter.lexicon = Lexicon::load(*m.lexicon);

    const auto questions = load_questions(m.questions);
    std::map<std::string, ReasoningTrace> stored;
    if (m.traces)
        for (auto& t : load_traces(*m.traces, ctx.tokenizer)) stored.emplace(t.id(), std::move(t));

    RunResult result;
    const std::size_t nq = questions.size();
    const std::size_t nt = m.thinking.size();
    const std::size_t nb = m.budgets.size();
    const std::size_t ns = m.strategies.size();

    // Reasoning chains: stored ones first, otherwise ask the thinking model.
    std::vector<std::optional<ReasoningTrace>> traces(nq * nt);
    for (std::size_t q = 0; q < nq; ++q)
        for (std::size_t t = 0; t < nt; ++t) {
            const auto& question = questions.questions[q];
            const auto id = question.id + "@" + m.thinking[t];
            if (auto it = stored.find(id); it != stored.end()) {
                traces[q * nt + t] = it->second;
                continue;
            }
            try {
                const auto r = cached_call(cache, thinking_request(m.thinking[t], build_thinking_prompt(question)), client);
                traces[q * nt + t] = make_trace(question.id, m.thinking[t], r.response.text, ctx.tokenizer);
            } catch (const RuntimeError& e) {
                spdlog::warn("no reasoning for {}: {}", id, e.what());
            }
        }

    // One compression per (question, thinking model, budget, strategy), shared by all answering models.
    struct Compressed {
        std::optional<CompressedTrace> trace;
        double ratio = 1.0;
        double retention = 1.0;
    };
    auto cidx = [&](std::size_t q, std::size_t t, std::size_t b, std::size_t s) {
        return ((q * nt + t) * nb + b) * ns + s;
    };
    std::vector<Compressed> comp(nq * nt * nb * ns);
    for (std::size_t q = 0; q < nq; ++q)
        for (std::size_t t = 0; t < nt; ++t) {
            const auto& tr = traces[q * nt + t];
            if (!tr) continue;
            for (std::size_t b = 0; b < nb; ++b)
                for (std::size_t s = 0; s < ns; ++s) {
                    auto& c = comp[cidx(q, t, b, s)];
                    try {
                        c.trace = compress_trace(*tr, m.budgets[b], m.strategies[s], ctx);
                    } catch (const Error& e) {
                        spdlog::warn("compression of {} failed: {}", tr->id(), e.what());
                        continue;
                    }
                    if (tr->token_count > 0)
                        c.ratio = static_cast<double>(c.trace->token_count) / static_cast<double>(tr->token_count);
                    c.retention = entity_retention(*tr, *c.trace, ctx.lexicon());
                    result.compressed.push_back(*c.trace);
                }
        }

    // Answer jobs in config-major, question-minor order.
    std::vector<TransferConfig> configs;
    std::vector<std::array<std::size_t, 3>> config_idx;  // t, b, s
    for (std::size_t t = 0; t < nt; ++t)
        for (const auto& a : m.answering)
            for (std::size_t b = 0; b < nb; ++b)
                for (std::size_t s = 0; s < ns; ++s) {
                    configs.push_back({m.thinking[t], a, m.budgets[b], m.strategies[s]});
                    config_idx.push_back({t, b, s});
                }

    struct JobResult {
        std::optional<AnswerOutcome> outcome;
        double seconds = 0.0;
    };
    const std::size_t njobs = configs.size() * nq;
    std::vector<JobResult> jobs(njobs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < njobs; j = next++) {
            const auto ci = j / nq;
            const auto q = j % nq;
            const auto [t, b, s] = config_idx[ci];
            const auto& c = comp[cidx(q, t, b, s)];
            if (!c.trace) continue;
            const auto t0 = std::chrono::steady_clock::now();
            try {
                jobs[j].outcome =
                    answer_and_score(questions.questions[q], c.trace->text, configs[ci].answering, client, cache);
            } catch (const RuntimeError& e) {
                spdlog::warn("answer for {} under {} failed: {}", questions.questions[q].id, to_string(configs[ci]),
                             e.what());
            }
            jobs[j].seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        }
    };
    {
        std::vector<std::jthread> pool;
        const auto n = std::min(m.concurrency, std::max<std::size_t>(njobs, 1));
        for (std::size_t i = 0; i < n; ++i) pool.emplace_back(worker);
    }

    for (std::size_t ci = 0; ci < configs.size(); ++ci) {
        const auto [t, b, s] = config_idx[ci];
        std::map<std::string, std::vector<std::size_t>> by_specialty;
        for (std::size_t q = 0; q < nq; ++q) by_specialty[questions.questions[q].specialty].push_back(q);
        for (const auto& [specialty, qs] : by_specialty) {
            EvalRecord r;
            r.config = configs[ci];
            r.specialty = specialty;
            r.n_questions = qs.size();
            double prompt = 0.0, ctoks = 0.0, ratio = 0.0, retention = 0.0, secs = 0.0;
            std::size_t answered = 0, compressed = 0;
            for (auto q : qs) {
                const auto& job = jobs[ci * nq + q];
                const auto& c = comp[cidx(q, t, b, s)];
                if (c.trace) {
                    ++compressed;
                    ctoks += static_cast<double>(c.trace->token_count);
                    ratio += c.ratio;
                    retention += c.retention;
                }
                ++result.answer_requests;
                if (!job.outcome) {
                    ++r.n_failed;
                    ++result.failures;
                    continue;
                }
                ++answered;
                prompt += static_cast<double>(job.outcome->prompt_tokens);
                secs += job.seconds;
                if (job.outcome->from_cache) ++result.cache_hits;
                if (!job.outcome->predicted) ++r.n_unparsed;
                if (job.outcome->correct) ++r.n_correct;
            }
            r.accuracy = static_cast<double>(r.n_correct) / static_cast<double>(r.n_questions);
            if (answered > 0) r.mean_prompt_tokens = prompt / static_cast<double>(answered);
            if (compressed > 0) {
                r.mean_compressed_tokens = ctoks / static_cast<double>(compressed);
                r.mean_compression_ratio = ratio / static_cast<double>(compressed);
                r.mean_entity_retention = retention / static_cast<double>(compressed);
            }
            r.completeness = static_cast<double>(answered) / static_cast<double>(r.n_questions);
            r.partial = r.completeness < m.completeness_threshold;
            if (m.record_latency && answered > 0) r.mean_latency = secs / static_cast<double>(answered);
            result.records.push_back(std::move(r));
        }
    }
    return result;
}

}  // namespace cotkit
