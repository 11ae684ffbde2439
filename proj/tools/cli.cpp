#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cotkit/analyzer.hpp"
#include "cotkit/bayes_opt.hpp"
#include "cotkit/compress.hpp"
#include "cotkit/errors.hpp"
#include "cotkit/evaluation.hpp"
#include "cotkit/selfcheck.hpp"
#include "cotkit/synthetic_surface.hpp"

namespace cotkit {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw RuntimeError("cannot write " + path.string());
    return out;
}

std::string env_or(const char* name, const std::string& fallback = {}) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : fallback;
}

ImportanceWeights parse_weights(const std::string& text) {
    std::vector<double> w;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        try {
            std::size_t used = 0;
            w.push_back(std::stod(part, &used));
            if (part.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(part);
        } catch (const std::logic_error&) {
            throw ValidationError("--weights expects four comma-separated numbers, got \"" + text + "\"");
        }
    }
    if (w.size() != 4) throw ValidationError("--weights expects four comma-separated numbers");
    return ImportanceWeights(w[0], w[1], w[2], w[3]);
}

Tokenizer make_tokenizer(const std::string& vocab) {
    return vocab.empty() ? Tokenizer::approximate() : Tokenizer::from_vocab_file(vocab);
}

std::unique_ptr<ChatClient> make_client(const std::string& endpoint_flag, const std::string& manifest_endpoint = {}) {
    std::string endpoint = endpoint_flag;
    if (endpoint.empty()) endpoint = manifest_endpoint;
    if (endpoint.empty()) endpoint = env_or("COTKIT_ENDPOINT");
    return std::make_unique<ChatClient>(make_transport(endpoint, env_or("COTKIT_API_KEY")));
}

struct CompressOpts {
    std::string traces;
    std::string out = "compressed.jsonl";
    std::size_t budget = 0;
    std::string strategy = "summarization";
    std::string weights;
    std::string lexicon;
    std::string segmenter;
    std::string scorer;
    std::string vocab;
    std::string rule = "guarded";
    bool no_cap = false;
    std::string refine;
    std::string endpoint;
    std::string cache;
};

int cmd_compress(const CompressOpts& o, bool truncate_only) {
    CompressionContext ctx;
    ctx.tokenizer = make_tokenizer(o.vocab);
    if (!o.segmenter.empty()) ctx.segmenter = load_segment_params(o.segmenter, ctx.segmenter);
    if (!o.lexicon.empty()) ctx.segmenter.lexicon = Lexicon::load(o.lexicon);
    if (!o.scorer.empty()) ctx.scorer = load_scorer_params(o.scorer, ctx.scorer);
    if (!o.weights.empty()) ctx.scorer.weights = parse_weights(o.weights);
    ctx.use_retention_cap = !o.no_cap;
    if (o.rule == "density")
        ctx.rule = SelectionRule::density;
    else if (o.rule != "guarded")
        throw ValidationError("--rule must be guarded or density");
    const Strategy strategy = truncate_only ? Strategy::truncation : parse_strategy(o.strategy);

    const auto traces = load_traces(o.traces, ctx.tokenizer);
    std::unique_ptr<ChatClient> client;
    std::optional<ResponseCache> cache;
    if (!o.refine.empty()) {
        if (strategy != Strategy::summarization) throw ValidationError("--refine applies to summarization only");
        client = make_client(o.endpoint);
        cache.emplace(o.cache.empty() ? std::filesystem::path(o.out).replace_filename("cache.jsonl")
                                      : std::filesystem::path(o.cache));
    }

    auto out = open_out(o.out);
    std::size_t max_tokens = 0, over = 0;
    double retention = 0.0;
    for (const auto& t : traces) {
        auto c = compress_trace(t, o.budget, strategy, ctx);
        if (client) c = refine_compression(t, c, o.refine, *client, *cache, ctx.tokenizer);
        max_tokens = std::max(max_tokens, c.token_count);
        if (c.token_count > o.budget) ++over;
        retention += entity_retention(t, c, ctx.lexicon());
        out << to_json_line(c) << '\n';
    }
    fmt::print("{} traces -> {} ({} budget {}): max tokens {}, over budget {}, mean entity retention {:.4f}\n",
               traces.size(), o.out, to_string(strategy), o.budget, max_tokens, over,
               traces.empty() ? 1.0 : retention / static_cast<double>(traces.size()));
    return over == 0 ? 0 : 2;
}

struct EvaluateOpts {
    std::string manifest;
    std::string endpoint;
    std::size_t concurrency = 0;
    std::string out_dir;
};

int cmd_evaluate(const EvaluateOpts& o) {
    auto m = load_manifest(o.manifest);
    if (o.concurrency > 0) m.concurrency = o.concurrency;
    if (!o.out_dir.empty()) {
        const bool default_cache = m.cache == m.output_dir / "cache.jsonl";
        m.output_dir = o.out_dir;
        if (default_cache) m.cache = m.output_dir / "cache.jsonl";
    }
    const auto client = make_client(o.endpoint, m.endpoint);
    std::filesystem::create_directories(m.output_dir);
    ResponseCache cache(m.cache);
    const auto res = run_matrix(m, *client, cache);

    auto rec_out = open_out(m.output_dir / "eval_records.jsonl");
    for (const auto& r : res.records) rec_out << to_json_line(r) << '\n';
    auto comp_out = open_out(m.output_dir / "compressed.jsonl");
    for (const auto& c : res.compressed) comp_out << to_json_line(c) << '\n';

    std::size_t partial = 0;
    for (const auto& r : res.records) partial += r.partial ? 1 : 0;
    fmt::print("{} records ({} partial) -> {}\n", res.records.size(), partial,
               (m.output_dir / "eval_records.jsonl").string());
    fmt::print("answer requests {}, cache hits {}, failures {}, network calls {}, retries {}\n", res.answer_requests,
               res.cache_hits, res.failures, client->network_calls(), client->retries());
    return 0;
}

struct OptimizeOpts {
    bool synthetic = false;
    std::string records;
    std::string models;
    std::uint64_t seed = 0;
    std::size_t max_evals = 15;
    double ei_threshold = 1e-4;
    std::size_t init_size = 8;
    std::vector<std::size_t> budgets{64, 128, 256, 512, 1024};
    std::string out = "bo_trace.jsonl";
    std::string observations;
    std::string kernel = "product";
};

int cmd_optimize(const OptimizeOpts& o) {
    if (o.synthetic == !o.records.empty()) throw ValidationError("pass exactly one of --synthetic or --records");
    if (o.init_size < 1) throw ValidationError("--init-size must be positive");
    const auto reg = o.models.empty() ? reference_model_registry() : load_models(o.models);

    ConfigSpace space;
    EvaluateFn evaluate;
    std::optional<SyntheticSurface> surface;
    std::map<TransferConfig, std::pair<double, std::size_t>> table;
    if (o.synthetic) {
        space = ConfigSpace::full(reg, o.budgets);
        surface.emplace(reg, o.seed);
        evaluate = [&](const TransferConfig& c) { return (*surface)(c); };
    } else {
        const auto records = load_eval_records(o.records);
        if (records.empty()) throw ValidationError("no eval records in " + o.records);
        std::set<std::string> t, a;
        std::set<std::size_t> b;
        std::set<Strategy> s;
        for (const auto& r : records) {
            auto& cell = table[r.config];
            cell.first += r.accuracy;
            ++cell.second;
            t.insert(r.config.thinking);
            a.insert(r.config.answering);
            b.insert(r.config.budget);
            s.insert(r.config.strategy);
        }
        space.registry = reg;
        space.thinking.assign(t.begin(), t.end());
        space.answering.assign(a.begin(), a.end());
        space.budgets.assign(b.begin(), b.end());
        space.strategies.assign(s.begin(), s.end());
        evaluate = [&](const TransferConfig& c) {
            auto it = table.find(c);
            if (it == table.end()) throw RuntimeError("no recorded evaluation for " + to_string(c));
            return it->second.first / static_cast<double>(it->second.second);
        };
    }

    BoOptions bo;
    bo.kernel = parse_kernel_form(o.kernel);
    bo.seed = o.seed;
    bo.max_evals = o.max_evals;
    bo.ei_threshold = o.ei_threshold;
    bo.init_size = o.init_size;
    const auto res = bo_loop(space, evaluate, bo);

    auto out = open_out(o.out);
    write_bo_trace(out, res);
    if (!o.observations.empty()) {
        std::ofstream obs(o.observations, std::ios::app);
        if (!obs) throw RuntimeError("cannot append to " + o.observations);
        for (const auto& s : res.steps) obs << observation_json_line(s.config, s.value) << '\n';
    }
    fmt::print("{} evaluations ({} quarantined), stop: {} -> {}\n", res.steps.size() + res.quarantined.size(),
               res.quarantined.size(), to_string(res.stop_reason), o.out);
    if (const auto* best = res.best()) {
        fmt::print("best {} = {:.4f}\n", to_string(best->config), best->value);
        if (surface) {
            const auto [cfg, opt] = surface_optimum(space, *surface);
            fmt::print("true optimum {} = {:.4f} (ratio {:.4f})\n", to_string(cfg), opt, best->value / opt);
        }
    }
    return 0;
}

struct AnalyzeOpts {
    std::string records;
    std::string out_dir = ".";
    std::string models;
    std::uint64_t seed = 0;
    std::size_t bootstrap_n = 1000;
    bool all_points = false;
    bool sample_std = false;
    double quantile = 0.75;
    std::size_t bins = 10;
};

int cmd_analyze(const AnalyzeOpts& o) {
    const auto reg = o.models.empty() ? reference_model_registry() : load_models(o.models);
    const auto records = load_eval_records(o.records);
    if (records.empty()) throw ValidationError("no eval records in " + o.records);
    const auto mode = o.sample_std ? StdMode::sample : StdMode::population;
    const auto points = tradeoff_points(records, reg, mode);
    const std::filesystem::path dir(o.out_dir);

    auto trade = open_out(dir / "tradeoff.csv");
    write_tradeoff_csv(trade, points);

    std::vector<AccCv> acc_cv;
    for (const auto& p : points)
        if (p.cv) acc_cv.push_back({p.mean_acc, *p.cv});

    PowerLawOptions plo;
    plo.pareto_only = !o.all_points;
    plo.bootstrap_n = o.bootstrap_n;
    plo.seed = o.seed;
    auto pl = open_out(dir / "powerlaw.json");
    try {
        std::optional<PowerLawFit> fit;
        try {
            fit = fit_power_law(acc_cv, plo);
        } catch (const InsufficientDataError&) {
            if (!plo.pareto_only) throw;
            spdlog::warn("fewer than three usable frontier points; fitting all points");
            plo.pareto_only = false;
            fit = fit_power_law(acc_cv, plo);
        }
        write_powerlaw_json(pl, *fit, plo);
        fmt::print("power law: cv = {:.4f} * acc^{:.4f} (r2 {:.3f}, n {})\n", fit->alpha, fit->beta, fit->r_squared,
                   fit->n_points);
    } catch (const InsufficientDataError& e) {
        write_powerlaw_unavailable(pl, e.what());
        fmt::print("power law: not fitted ({})\n", e.what());
    }

    auto curves = open_out(dir / "curves.csv");
    write_curves_csv(curves, points, typical_curve(acc_cv, o.quantile, o.bins));

    std::size_t frontier = 0;
    for (const auto& p : points) frontier += p.on_frontier ? 1 : 0;
    fmt::print("{} configs, {} on the frontier -> {}\n", points.size(), frontier, dir.string());
    for (const auto& c : compare_strategies(records)) {
        fmt::print("budget {:>5}: accuracy summarization {:.4f} truncation {:.4f}; entity retention {:.4f} vs {:.4f}",
                   c.budget, c.summarization_accuracy, c.truncation_accuracy, c.summarization_retention,
                   c.truncation_retention);
        if (c.test && !c.test->degenerate)
            fmt::print("; t {:.3f} p {:.4g} p_bonf {:.4g} d {:.3f}", c.test->t, c.test->p_raw, c.test->p_bonferroni,
                       c.test->cohens_d);
        fmt::print("\n");
    }
    return 0;
}

int cmd_selfcheck(std::uint64_t seed) {
    const auto results = run_selfcheck(seed);
    std::size_t failed = 0;
    for (const auto& r : results) {
        fmt::print("[{}] {}: {}\n", r.passed ? "PASS" : "FAIL", r.name, r.detail);
        failed += r.passed ? 0 : 1;
    }
    fmt::print("{}/{} checks passed\n", results.size() - failed, results.size());
    return failed == 0 ? 0 : 2;
}

void setup_logging(int verbosity) {
    auto logger = spdlog::get("cotkit");
    if (!logger) {
        logger = spdlog::stderr_color_mt("cotkit");
        spdlog::set_default_logger(logger);
    }
    spdlog::set_level(verbosity >= 2 ? spdlog::level::debug
                      : verbosity == 1 ? spdlog::level::info
                                       : spdlog::level::warn);
}

}  // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"Compress reasoning traces for transfer between models, evaluate, optimize and analyze."};
    app.require_subcommand(1);
    int verbosity = 0;
    app.add_flag("-v,--verbose", verbosity, "More logging (repeat for debug)");

    CompressOpts co;
    auto add_compress_common = [&](CLI::App* sub) {
        sub->add_option("--traces", co.traces, "traces.jsonl")->required()->check(CLI::ExistingFile);
        sub->add_option("--budget", co.budget, "Token budget")->required()->check(CLI::PositiveNumber);
        sub->add_option("--vocab", co.vocab, "Vocabulary file for subword token counting")->check(CLI::ExistingFile);
        sub->add_option("--lexicon", co.lexicon, "Entity lexicon, one term per line")->check(CLI::ExistingFile);
    };
    auto* compress = app.add_subcommand("compress", "Summarize traces to a token budget");
    add_compress_common(compress);
    compress->add_option("--out", co.out, "Output JSONL")->capture_default_str();
    compress->add_option("--strategy", co.strategy, "summarization or truncation")->capture_default_str();
    compress->add_option("--weights", co.weights, "depth,knowledge,connectivity,conclusion");
    compress->add_option("--segmenter", co.segmenter, "Segmenter JSON config")->check(CLI::ExistingFile);
    compress->add_option("--scorer", co.scorer, "Scorer JSON config")->check(CLI::ExistingFile);
    compress->add_option("--rule", co.rule, "Selection rule: guarded or density")->capture_default_str();
    compress->add_flag("--no-cap", co.no_cap, "Ignore the budget-tier retention cap");
    compress->add_option("--refine", co.refine, "Summarizer model id for an LLM rewrite pass");
    compress->add_option("--endpoint", co.endpoint, "Chat endpoint URL or \"mock\" (default $COTKIT_ENDPOINT)");
    compress->add_option("--cache", co.cache, "Response cache file");

    auto* truncate = app.add_subcommand("truncate", "Keep the first B tokens of each trace");
    add_compress_common(truncate);
    truncate->add_option("--out", co.out, "Output JSONL")->capture_default_str();

    EvaluateOpts eo;
    auto* evaluate = app.add_subcommand("evaluate", "Run the evaluation matrix of a manifest");
    evaluate->add_option("--manifest", eo.manifest, "Run manifest (JSON)")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--endpoint", eo.endpoint, "Override the manifest endpoint");
    evaluate->add_option("--concurrency", eo.concurrency, "Override the manifest concurrency");
    evaluate->add_option("--out-dir", eo.out_dir, "Override the manifest output directory");

    OptimizeOpts oo;
    auto* optimize = app.add_subcommand("optimize", "Bayesian optimization over transfer configurations");
    optimize->add_flag("--synthetic", oo.synthetic, "Use the seeded synthetic surface");
    optimize->add_option("--records", oo.records, "Use recorded accuracies from eval_records.jsonl")
        ->check(CLI::ExistingFile);
    optimize->add_option("--models", oo.models, "models.toml")->check(CLI::ExistingFile);
    optimize->add_option("--seed", oo.seed, "Seed")->capture_default_str();
    optimize->add_option("--max-evals", oo.max_evals, "Evaluation budget")->capture_default_str()->check(
        CLI::PositiveNumber);
    optimize->add_option("--ei-threshold", oo.ei_threshold, "Stop when the best EI falls below this")
        ->capture_default_str();
    optimize->add_option("--init-size", oo.init_size, "Initial design size")->capture_default_str();
    optimize->add_option("--kernel", oo.kernel, "GP kernel: product or summed")
        ->capture_default_str()
        ->check(CLI::IsMember({"product", "summed"}));
    optimize->add_option("--budgets", oo.budgets, "Budget grid (synthetic only)")->delimiter(',');
    optimize->add_option("--out", oo.out, "bo_trace.jsonl path")->capture_default_str();
    optimize->add_option("--observations", oo.observations, "Append observations to this JSONL file");

    AnalyzeOpts ao;
    auto* analyze = app.add_subcommand("analyze", "Trade-off table, power law and curves from eval records");
    analyze->add_option("--records", ao.records, "eval_records.jsonl")->required()->check(CLI::ExistingFile);
    analyze->add_option("--out-dir", ao.out_dir, "Output directory")->capture_default_str();
    analyze->add_option("--models", ao.models, "models.toml")->check(CLI::ExistingFile);
    analyze->add_option("--seed", ao.seed, "Bootstrap seed")->capture_default_str();
    analyze->add_option("--bootstrap", ao.bootstrap_n, "Bootstrap resamples")->capture_default_str();
    analyze->add_flag("--all-points", ao.all_points, "Fit the power law on all points, not just the frontier");
    analyze->add_flag("--sample-std", ao.sample_std, "Use the n-1 standard deviation in CV");
    analyze->add_option("--quantile", ao.quantile, "Typical-curve quantile")->capture_default_str()->check(
        CLI::Range(0.0, 1.0));
    analyze->add_option("--bins", ao.bins, "Typical-curve accuracy bins")->capture_default_str()->check(
        CLI::PositiveNumber);

    std::uint64_t check_seed = 0;
    auto* selfcheck = app.add_subcommand("selfcheck", "Run the built-in invariant checks");
    selfcheck->add_option("--seed", check_seed, "Seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    setup_logging(verbosity);

    try {
        if (*compress) return cmd_compress(co, false);
        if (*truncate) return cmd_compress(co, true);
        if (*evaluate) return cmd_evaluate(eo);
        if (*optimize) return cmd_optimize(oo);
        if (*analyze) return cmd_analyze(ao);
        if (*selfcheck) return cmd_selfcheck(check_seed);
    } catch (const ValidationError& e) {
        spdlog::error("{}", e.what());
        return 1;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 2;
    }
    return 1;
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<std::string> storage;
    storage.reserve(args.size() + 1);
    storage.emplace_back("cotkit");
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());
    argv.push_back(nullptr);
    return run_cli(static_cast<int>(storage.size()), argv.data());
}

}  // namespace cotkit
