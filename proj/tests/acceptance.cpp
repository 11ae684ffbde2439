// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cli.hpp"
#include "cotkit/analyzer.hpp"
#include "cotkit/bayes_opt.hpp"
#include "cotkit/compress.hpp"
#include "cotkit/errors.hpp"
#include "cotkit/evaluation.hpp"
#include "cotkit/gaussian_process.hpp"
#include "cotkit/scorer.hpp"
#include "cotkit/selector.hpp"
#include "cotkit/stats.hpp"
#include "cotkit/synthetic_surface.hpp"
#include "test_support.hpp"

using namespace cotkit;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            notes.push_back("FAILED " + what);
        }
    }
    void note(const std::string& s) { notes.push_back(s); }
};

const Tokenizer& tok() {
    static const Tokenizer t = Tokenizer::approximate();
    return t;
}

// ---------------------------------------------------------------- 1

Verdict criterion_composite() {
    Verdict v;
    const ImportanceWeights w;
    const double a = composite_importance(1, 0, 0, 0, w);
    const double b = composite_importance(1, 1, 1, 1, w);
    v.require(a == 0.3, fmt::format("composite(1,0,0,0) = {:.17g}", a));
    v.require(b == 1.0, fmt::format("composite(1,1,1,1) = {:.17g}", b));
    v.note(fmt::format("composite(1,0,0,0)={} composite(1,1,1,1)={}", a, b));
    return v;
}

// ---------------------------------------------------------------- 2

// Plain power iteration on the dense column-stochastic operator.
std::vector<double> power_iteration(const DependencyGraph& g, const std::vector<double>& base, double d) {
    const std::size_t n = g.node_count();
    std::vector<double> x = base, next(n);
    for (int it = 0; it < 100000; ++it) {
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                if (g.has_edge(j, i)) acc += x[j] / static_cast<double>(g.succs(j).size());
            next[i] = (1 - d) * base[i] + d * acc;
            delta = std::max(delta, std::abs(next[i] - x[i]));
        }
        x.swap(next);
        if (delta < 1e-15) break;
    }
    return x;
}

Verdict criterion_propagation() {
    Verdict v;
    const auto t0 = Clock::now();
    DependencyGraph single(1);
    const std::vector<double> one{1.0};
    const double s = propagate_importance(single, one).scores[0];
    v.require(s == 0.15, fmt::format("single node = {:.17g}", s));

    DependencyGraph cycle(2);
    cycle.add_edge_unchecked(0, 1, EdgeKind::connective);
    cycle.add_edge_unchecked(1, 0, EdgeKind::connective);
    const std::vector<double> two{1.0, 1.0};
    const auto c = propagate_importance(cycle, two).scores;
    v.require(std::abs(c[0] - 1) <= 1e-9 && std::abs(c[1] - 1) <= 1e-9, "two-cycle");

    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 10;
        DependencyGraph g(n);
        const double density = u(rng);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (u(rng) < density) g.add_edge(i, j, EdgeKind::entity_ref);
        std::vector<double> base(n);
        for (auto& b : base) b = u(rng);
        const auto got = propagate_importance(g, base).scores;
        const auto want = power_iteration(g, base, 0.85);
        for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
    }
    const double secs = seconds_since(t0);
    v.require(worst <= 1e-6, fmt::format("max deviation {:.3g}", worst));
    v.require(secs < 1.0, fmt::format("runtime {:.3f}s", secs));
    v.note(fmt::format("100 DAGs max |diff| {:.2g}, {:.3f}s", worst, secs));
    return v;
}

// ---------------------------------------------------------------- 3

double exhaustive_optimum(const std::vector<SelectionItem>& items, std::size_t conclusion, std::size_t budget,
                          std::size_t max_kept) {
    const std::size_t n = items.size();
    double best = -1.0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (!(mask & (1u << conclusion))) continue;
        std::size_t tokens = 0, count = 0;
        double value = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (1u << i)) {
                tokens += items[i].tokens;
                value += items[i].importance;
                ++count;
            }
        if (tokens <= budget && count <= max_kept) best = std::max(best, value);
    }
    return best;
}

Verdict criterion_budget() {
    Verdict v;
    const auto t0 = Clock::now();
    CompressionContext ctx;
    ctx.segmenter.lexicon = Lexicon::load(testing::fixture("lexicon.txt"));
    const auto traces = load_traces(testing::fixture("traces.jsonl"), ctx.tokenizer);
    std::size_t outputs = 0, violations = 0;
    for (std::size_t budget : {16, 32, 64, 128, 256, 512, 1024})
        for (const auto& t : traces)
            for (auto strategy : {Strategy::summarization, Strategy::truncation}) {
                const auto c = compress_trace(t, budget, strategy, ctx);
                ++outputs;
                if (c.token_count > budget || tok().count(c.text) > budget) ++violations;
            }
    v.require(violations == 0, fmt::format("{} budget violations", violations));

    const std::pair<std::size_t, double> caps[] = {{64, 0.05}, {128, 0.15}, {256, 0.30}, {512, 0.50}, {1024, 0.75}};
    for (auto [b, want] : caps) v.require(retention_cap(b) == want, fmt::format("cap({}) = {}", b, retention_cap(b)));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> imp(0.01, 1.0);
    double min_ratio = 1.0, sum = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng() % 14;
        std::vector<SelectionItem> items(n);
        std::size_t total = 0;
        for (auto& it : items) {
            it = {imp(rng), 1 + rng() % 60};
            total += it.tokens;
        }
        const std::size_t conclusion = n - 1;
        const std::size_t budget = items[conclusion].tokens + rng() % (total + 1);
        const double cap = trial % 2 == 0 ? 1.0 : retention_cap(64u << (rng() % 5));
        const auto plan = greedy_select(items, conclusion, budget, cap);
        v.require(plan.total_tokens <= budget, "greedy plan over budget");
        const double opt = exhaustive_optimum(items, conclusion, budget, plan.max_kept);
        const double ratio = plan.total_importance / opt;
        min_ratio = std::min(min_ratio, ratio);
        sum += ratio;
    }
    const double secs = seconds_since(t0);
    v.require(min_ratio >= 0.5, fmt::format("min greedy/optimal {:.4f}", min_ratio));
    v.require(secs < 10.0, fmt::format("runtime {:.2f}s", secs));
    v.note(fmt::format("{} outputs 0 over budget; greedy/optimal min {:.4f} mean {:.4f}; {:.2f}s", outputs, min_ratio,
                       sum / 200, secs));
    return v;
}

// ---------------------------------------------------------------- 4

std::vector<Segment> plain_segments(const std::vector<std::string>& texts, const Lexicon& lex) {
    std::vector<Segment> segs(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        segs[i].index = i;
        segs[i].text = texts[i];
        segs[i].token_count = tok().count(texts[i]);
        segs[i].sentences = {texts[i]};
        for (const auto& m : lex.matches(texts[i])) segs[i].entities.insert(m.term);
    }
    segs.back().is_conclusion = true;
    return segs;
}

Verdict criterion_reconstruction() {
    Verdict v;
    CompressionContext ctx;
    ctx.segmenter.lexicon = Lexicon::load(testing::fixture("lexicon.txt"));
    const auto traces = load_traces(testing::fixture("traces.jsonl"), ctx.tokenizer);
    std::size_t failures = 0, runs = 0;
    for (std::size_t budget : {16, 64, 128, 256, 512}) {
        for (const auto& t : traces) {
            const auto run = summarize_trace(t, budget, ctx);
            const auto& out = run.result;
            ++runs;
            bool ok = out.token_count <= budget && run.numeric_audit.empty();
            std::size_t pos = 0;
            for (auto k : out.kept_indices) {
                if (run.segments[k].is_conclusion && out.conclusion_truncated) continue;
                const auto at = out.text.find(run.segments[k].text, pos);
                if (at == std::string::npos) {
                    ok = false;
                    break;
                }
                pos = at + run.segments[k].text.size();
            }
            const auto line = to_json_line(out);
            for (int rep = 0; rep < 2; ++rep) ok = ok && to_json_line(summarize_trace(t, budget, ctx).result) == line;
            failures += ok ? 0 : 1;
        }
    }
    v.require(failures == 0, fmt::format("{} fixture failures", failures));

    const std::vector<std::string> terms{"alpha", "beta", "gamma", "delta", "epsilon"};
    const Lexicon lex(terms);
    std::mt19937_64 rng(404);
    std::size_t adv_fail = 0;
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t n = 1 + rng() % 12;
        std::vector<std::string> texts;
        for (std::size_t i = 0; i < n; ++i) {
            std::string s;
            const std::size_t words = 1 + rng() % (i + 1 == n && trial % 3 == 0 ? 80 : 25);
            for (std::size_t w = 0; w < words; ++w) {
                s += rng() % 5 == 0 ? terms[rng() % terms.size()] : "w" + std::to_string(rng() % 1000);
                s += w + 1 < words ? " " : ".";
            }
            texts.push_back(s);
        }
        const auto segs = plain_segments(texts, lex);
        const auto g = build_dependency_graph(segs);
        ScoreVector sc(n);
        for (auto& x : sc) x.normalized = static_cast<double>(rng() % 1000) / 1000.0;
        sc.back().normalized = 1.0;
        SelectionPlan plan;
        for (std::size_t i = 0; i + 1 < n; ++i)
            if (rng() % 2) plan.kept.push_back(i);
        plan.kept.push_back(n - 1);
        plan.budget = 1 + rng() % 120;
        plan.max_kept = n;
        for (auto k : plan.kept) {
            plan.total_tokens += segs[k].token_count;
            plan.total_importance += sc[k].normalized;
        }
        ReconstructParams params;
        params.note_max_tokens = 1 + rng() % 30;
        try {
            const auto sup = ensure_conclusion(plan, segs, g, sc, plan.budget);
            const auto out = assemble(sup, segs, g, sc, lex, tok(), plan.budget, params);
            const bool ok = out.token_count <= plan.budget && out.eviction_rounds <= sup.plan.kept.size() &&
                            (out.conclusion_truncated || audit_numeric_tokens(out, segs).empty());
            adv_fail += ok ? 0 : 1;
        } catch (const std::exception&) {
            ++adv_fail;
        }
    }
    v.require(adv_fail == 0, fmt::format("{} adversarial failures", adv_fail));
    v.note(fmt::format("{} fixture runs x3 identical, 400 adversarial eviction cases, 0 failures", runs));
    return v;
}

// ---------------------------------------------------------------- 5

std::vector<TransferConfig> sample_configs(const std::vector<TransferConfig>& all, std::size_t k, std::mt19937_64& rng) {
    std::vector<TransferConfig> out;
    std::sample(all.begin(), all.end(), std::back_inserter(out), k, rng);
    std::shuffle(out.begin(), out.end(), rng);
    return out;
}

Verdict criterion_kernel_ei() {
    Verdict v;
    v.require(matern52(0.0, 1.7, 0.9) == 1.7, "k(0) != sigma2");
    const double k1 = matern52(2.0, 1.0, 2.0);
    v.require(std::abs(k1 - 0.52399) <= 1e-5, fmt::format("k(ell)/sigma2 = {:.7f}", k1));
    const double ei = expected_improvement(0.8, 0.1, 0.7);
    v.require(std::abs(ei - 0.10833) <= 1e-5, fmt::format("EI = {:.7f}", ei));

    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double min_ei = 0.0;
    for (int i = 0; i < 1000; ++i) min_ei = std::min(min_ei, expected_improvement(u(rng), u(rng) * 0.3, u(rng)));
    v.require(min_ei >= 0.0, "negative EI");

    const auto reg = reference_model_registry();
    const auto all = ConfigSpace::full(reg).enumerate();
    const auto parts = metric_parts(ConfigMetric(reg));
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto xs = sample_configs(all, 3 + rng() % 10, rng);
        std::vector<Observation> obs;
        for (const auto& x : xs) obs.push_back({x, u(rng), {}});
        const double ell = std::exp(std::log(0.1) + u(rng) * std::log(100.0));
        const auto gp = gp_fit(obs, HyperGrid::single({0.01 + u(rng), ell, 0.0}), parts);
        const auto inc = std::max_element(obs.begin(), obs.end(),
                                          [](const auto& a, const auto& b) { return a.value < b.value; });
        const auto post = gp.posterior(inc->config);
        const double e = expected_improvement(post.mean, std::sqrt(std::max(0.0, post.variance)), inc->value);
        v.require(e >= 0.0, "negative EI at incumbent");
        worst = std::max(worst, e);
    }
    v.require(worst <= 1e-12, fmt::format("EI at incumbent {:.3g}", worst));
    v.note(fmt::format("k(ell)={:.6f} EI={:.6f}; 1000 posteriors, max EI at incumbent {:.2g}", k1, ei, worst));
    return v;
}

// ---------------------------------------------------------------- 6

Verdict criterion_gp() {
    Verdict v;
    const auto reg = reference_model_registry();
    const auto all = ConfigSpace::full(reg).enumerate();
    const auto parts = metric_parts(ConfigMetric(reg));
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    double interp = 0.0, var_lo = 0.0, var_over = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto xs = sample_configs(all, 2 + rng() % 20, rng);
        std::vector<Observation> obs;
        for (const auto& x : xs) obs.push_back({x, u(rng), {}});
        const double sigma2 = 0.01 + u(rng);
        const double ell = std::exp(std::log(0.1) + u(rng) * std::log(100.0));
        const auto gp = gp_fit(obs, HyperGrid::single({sigma2, ell, 0.0}), parts);
        for (const auto& o : obs) interp = std::max(interp, std::abs(gp.posterior(o.config).mean - o.value));
        for (const auto& c : all) {
            const double var = gp.posterior(c).variance;
            var_lo = std::min(var_lo, var);
            var_over = std::max(var_over, var - sigma2);
        }
    }
    v.require(interp <= 1e-6, fmt::format("interpolation error {:.3g}", interp));
    v.require(var_lo >= 0.0, fmt::format("variance below 0: {:.3g}", var_lo));
    v.require(var_over <= 1e-9, fmt::format("variance above sigma2 by {:.3g}", var_over));

    double worst_jitter = 0.0;
    int failed = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto xs = sample_configs(all, 64, rng);
        const double ell = std::exp(std::log(0.05) + u(rng) * std::log(400.0));
        Eigen::MatrixXd k(64, 64);
        for (Eigen::Index i = 0; i < 64; ++i)
            for (Eigen::Index j = 0; j < 64; ++j)
                k(i, j) = config_kernel(parts(xs[std::size_t(i)], xs[std::size_t(j)]), 1.0, ell);
        const auto chol = jittered_cholesky(k, 1e-10, 1e-8);
        if (!chol) ++failed;
        else worst_jitter = std::max(worst_jitter, chol->jitter);
    }
    v.require(failed == 0, fmt::format("{} of 100 kernel matrices not factorizable with jitter <= 1e-8", failed));
    v.note(fmt::format("interp err {:.2g}, variance in [0, s2+{:.2g}], 100 PSD sets (max jitter {:.0e})", interp,
                       std::max(0.0, var_over), worst_jitter));
    return v;
}

// ---------------------------------------------------------------- 7

Verdict criterion_bo() {
    Verdict v;
    const auto t0 = Clock::now();
    const auto reg = reference_model_registry();
    const auto space = ConfigSpace::full(reg);
    v.require(space.enumerate().size() == 640, "grid is not 640 configs");
    int ok8 = 0, ok15 = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const SyntheticSurface surface(reg, seed);
        const double opt = surface_optimum(space, surface).second;
        BoOptions o;
        o.seed = seed;
        const auto r = bo_loop(space, [&](const TransferConfig& c) { return surface(c); }, o);
        ok8 += r.best_after(8).value_or(0.0) >= 0.91 * opt;
        ok15 += r.best_after(15).value_or(0.0) >= 0.97 * opt;
    }
    const double secs = seconds_since(t0);
    v.require(ok8 >= 40, fmt::format("91% by eval 8 in {}/50", ok8));
    v.require(ok15 >= 40, fmt::format("97% by eval 15 in {}/50", ok15));
    v.require(secs < 60.0, fmt::format("runtime {:.1f}s", secs));
    v.note(fmt::format(">=91% by eval 8: {}/50, >=97% by eval 15: {}/50, {:.2f}s", ok8, ok15, secs));
    return v;
}

// ---------------------------------------------------------------- 8

Verdict criterion_analyzer() {
    Verdict v;
    const double cv = coefficient_of_variation(std::vector<double>{0.6, 0.8});
    v.require(std::abs(cv - 0.142857) <= 1e-6 && std::abs(cv - 1.0 / 7.0) <= 1e-9, fmt::format("CV = {:.12f}", cv));

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int mismatches = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<AccCv> pts(64);
        const double grain = trial % 2 ? 10.0 : 1e6;  // coarse grids force ties
        for (auto& p : pts) p = {std::round(u(rng) * grain) / grain, std::round(u(rng) * grain) / grain};
        std::vector<std::size_t> brute;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            bool dominated = false;
            for (std::size_t j = 0; j < pts.size() && !dominated; ++j)
                dominated = pts[j].acc > pts[i].acc && pts[j].cv < pts[i].cv;
            if (!dominated) brute.push_back(i);
        }
        auto sweep = pareto_frontier(pts);
        std::sort(sweep.begin(), sweep.end());
        mismatches += sweep != brute;
    }
    v.require(mismatches == 0, fmt::format("{} Pareto mismatches", mismatches));

    std::vector<AccCv> clean;
    for (int i = 0; i < 20; ++i) {
        const double acc = 0.25 + 0.035 * i;
        clean.push_back({acc, 0.42 * std::pow(acc, -2.3)});
    }
    PowerLawOptions po;
    po.pareto_only = false;
    po.bootstrap_n = 100;
    const auto exact = fit_power_law(clean, po);
    v.require(std::abs(exact.alpha - 0.42) <= 1e-9 && std::abs(exact.beta + 2.3) <= 1e-9,
              fmt::format("noiseless fit ({:.12f}, {:.12f})", exact.alpha, exact.beta));

    int close = 0, cover_a = 0, cover_b = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 r(1000 + seed);
        std::uniform_real_distribution<double> acc(0.3, 0.9);
        std::normal_distribution<double> noise(0.0, 0.05);
        std::vector<AccCv> pts;
        for (int i = 0; i < 64; ++i) {
            const double a = acc(r);
            pts.push_back({a, 0.42 * std::pow(a, -2.3) * std::exp(noise(r))});
        }
        PowerLawOptions o;
        o.pareto_only = false;
        o.seed = seed;
        const auto fit = fit_power_law(pts, o);
        close += std::abs(fit.alpha - 0.42) <= 0.042 && std::abs(fit.beta + 2.3) <= 0.1;
        cover_a += fit.alpha_ci.contains(0.42);
        cover_b += fit.beta_ci.contains(-2.3);
    }
    v.require(close >= 90, fmt::format("noisy recovery {}/100", close));
    v.require(cover_a >= 85 && cover_b >= 85, fmt::format("CI coverage alpha {} beta {}", cover_a, cover_b));
    v.note(fmt::format("CV={:.9f}; 100 Pareto sets match; noisy recovery {}/100; CI coverage alpha {}% beta {}%", cv,
                       close, cover_a, cover_b));
    return v;
}

// ---------------------------------------------------------------- 9

Verdict criterion_stats() {
    Verdict v;
    const auto r = paired_t_test(std::vector<double>{0.1, 0.2, 0.3}, 1);
    v.require(std::abs(r.t - 3.4641) <= 1e-4, fmt::format("t = {:.6f}", r.t));
    v.require(r.cohens_d == 2.0, fmt::format("d = {:.17g}", r.cohens_d));
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double p = u(rng);
        const std::size_t m = 1 + rng() % 30;
        v.require(bonferroni(p, m) == std::min(1.0, static_cast<double>(m) * p), "bonferroni");
    }
    struct Row {
        double df, t, cdf;
    };
    const Row table[] = {
        {1, 12.7062047362, 0.975}, {2, 4.30265272975, 0.975}, {3, 3.18244630528, 0.975},
        {4, 2.77644510520, 0.975}, {5, 2.57058183661, 0.975}, {10, 2.22813885196, 0.975},
        {20, 2.08596344727, 0.975}, {30, 2.04227245630, 0.975}, {1, 6.31375151468, 0.95},
        {2, 2.91998558036, 0.95},  {5, 2.01504837333, 0.95},  {10, 1.81246112281, 0.95},
        {30, 1.69726088659, 0.95}, {1, 63.6567411629, 0.995}, {5, 4.03214298356, 0.995},
        {10, 3.16927267262, 0.995}, {30, 2.749996, 0.995},     {1, 3.07768353718, 0.9},
        {10, 1.37218364111, 0.9},  {30, 1.310415, 0.9},
    };
    double worst = 0.0;
    for (const auto& row : table) worst = std::max(worst, std::abs(student_t_cdf(row.t, row.df) - row.cdf));
    v.require(worst <= 1e-6, fmt::format("t cdf off by {:.3g}", worst));
    v.note(fmt::format("t={:.6f} d={} p={:.6f}; 20 t-table values within {:.1g}", r.t, r.cohens_d, r.p_raw, worst));
    return v;
}

// ---------------------------------------------------------------- 10

bool csv_header_is(const std::filesystem::path& p, const std::string& first_column) {
    std::ifstream in(p);
    std::string header;
    return std::getline(in, header) && header.rfind(first_column + ",", 0) == 0;
}

Verdict criterion_end_to_end() {
    Verdict v;
    const auto t0 = Clock::now();
    testing::TempDir dir("acceptance-e2e");
    const auto traces = testing::fixture("traces.jsonl").string();
    const auto lexicon = testing::fixture("lexicon.txt").string();

    for (std::size_t budget : {64, 128}) {
        for (const char* cmd : {"compress", "truncate"}) {
            const auto out = dir / fmt::format("{}_{}.jsonl", cmd, budget);
            const int rc = run_cli({cmd, "--traces", traces, "--budget", std::to_string(budget), "--lexicon", lexicon,
                                    "--out", out.string()});
            v.require(rc == 0, fmt::format("{} --budget {} exit {}", cmd, budget, rc));
            std::ifstream in(out);
            std::size_t n = 0;
            for (std::string line; std::getline(in, line); ++n) {
                const auto c = compressed_from_json_line(line);
                if (c.token_count > budget) v.require(false, "compressed output over budget");
            }
            v.require(n == 100, fmt::format("{} rows in {}", n, out.filename().string()));
        }
    }

    auto m = json::parse(testing::read_file(testing::fixture("manifest.json")));
    for (const char* k : {"questions", "traces", "models", "lexicon"})
        m[k] = testing::fixture(m[k].get<std::string>()).string();
    m["output_dir"] = (dir / "run").string();
    testing::write_file(dir / "manifest.json", m.dump());
    const int eval_rc = run_cli({"evaluate", "--manifest", (dir / "manifest.json").string(), "--endpoint", "mock"});
    v.require(eval_rc == 0, fmt::format("evaluate exit {}", eval_rc));
    const auto records_path = dir / "run" / "eval_records.jsonl";

    std::vector<EvalRecord> records;
    try {
        records = load_eval_records(records_path);  // validates each row
    } catch (const std::exception& e) {
        v.require(false, std::string("eval records: ") + e.what());
    }
    v.require(records.size() == 2 * 2 * 4 * 2 * 5, fmt::format("{} eval records", records.size()));
    {
        std::ifstream in(dir / "run" / "compressed.jsonl");
        std::size_t n = 0;
        try {
            for (std::string line; std::getline(in, line); ++n) compressed_from_json_line(line);
        } catch (const std::exception& e) {
            v.require(false, std::string("compressed.jsonl: ") + e.what());
        }
        v.require(n == 50 * 2 * 4 * 2, fmt::format("{} compressed rows", n));
    }

    const auto adir = dir / "analysis";
    std::filesystem::create_directories(adir);
    const int an_rc = run_cli({"analyze", "--records", records_path.string(), "--out-dir", adir.string()});
    v.require(an_rc == 0, fmt::format("analyze exit {}", an_rc));
    v.require(csv_header_is(adir / "tradeoff.csv", "schema_version"), "tradeoff.csv header");
    v.require(csv_header_is(adir / "curves.csv", "schema_version"), "curves.csv header");
    try {
        const auto pl = json::parse(testing::read_file(adir / "powerlaw.json"));
        v.require(pl.at("schema_version") == 1 && pl.contains("alpha") && pl.contains("beta"), "powerlaw.json keys");
    } catch (const std::exception& e) {
        v.require(false, std::string("powerlaw.json: ") + e.what());
    }
    const double secs = seconds_since(t0);
    v.require(secs < 30.0, fmt::format("runtime {:.1f}s", secs));

    std::string detail;
    for (const auto& c : compare_strategies(records)) {
        detail += fmt::format(" B={}: {:.3f} vs {:.3f};", c.budget, c.summarization_retention, c.truncation_retention);
        if (c.budget == 64 || c.budget == 128)
            v.require(c.summarization_retention > c.truncation_retention,
                      fmt::format("retention at {}: {:.4f} vs {:.4f}", c.budget, c.summarization_retention,
                                  c.truncation_retention));
    }
    v.note(fmt::format("{:.2f}s; entity retention summarization vs truncation{}", secs, detail));
    return v;
}

// ---------------------------------------------------------------- 11

Verdict criterion_harness() {
    Verdict v;
    std::vector<std::chrono::milliseconds> waits;
    RetryPolicy policy;
    policy.sleep = [&](std::chrono::milliseconds d) { waits.push_back(d); };
    auto flaky = MockTransport::scripted({429, 429, 200}, "The answer is B.");
    ChatClient client(flaky, policy);
    const auto reply = client.complete(answering_request("qwen3-14b", "question"));
    v.require(reply.text == "The answer is B.", "scripted reply text");
    v.require(client.network_calls() == 3 && client.retries() == 2 && waits.size() == 2,
              fmt::format("calls {} retries {} sleeps {}", client.network_calls(), client.retries(), waits.size()));
    v.require(waits.size() == 2 && waits[0] <= policy.base && waits[1] <= 2 * policy.base, "backoff beyond cap");

    testing::TempDir dir("acceptance-cache");
    auto m = load_manifest(testing::fixture("manifest.json"));
    m.output_dir = dir.path();
    m.cache = dir / "cache.jsonl";
    std::string cold, warm;
    std::size_t cold_calls = 0;
    {
        ChatClient c(MockTransport::offline_model());
        ResponseCache cache(m.cache);
        for (const auto& r : run_matrix(m, c, cache).records) cold += to_json_line(r) + "\n";
        cold_calls = c.network_calls();
    }
    auto mock = MockTransport::offline_model();
    ChatClient c(mock);
    ResponseCache cache(m.cache);
    for (const auto& r : run_matrix(m, c, cache).records) warm += to_json_line(r) + "\n";
    v.require(c.network_calls() == 0 && mock->calls() == 0, fmt::format("warm run made {} calls", c.network_calls()));
    v.require(warm == cold, "warm records differ");
    v.note(fmt::format("2x429 then 200: 3 calls, 2 retries; cold {} calls, warm 0, {} record bytes identical",
                       cold_calls, warm.size()));
    return v;
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::err);
    const std::pair<const char*, std::function<Verdict()>> criteria[] = {
        {"composite weights", criterion_composite},
        {"importance propagation", criterion_propagation},
        {"budget, retention caps, greedy vs exhaustive", criterion_budget},
        {"reconstruction", criterion_reconstruction},
        {"Matern kernel and expected improvement", criterion_kernel_ei},
        {"GP correctness", criterion_gp},
        {"BO efficiency on the synthetic surface", criterion_bo},
        {"CV, Pareto, power law", criterion_analyzer},
        {"statistics", criterion_stats},
        {"end-to-end offline pipeline", criterion_end_to_end},
        {"harness cache and retry", criterion_harness},
    };
    int failed = 0;
    int n = 0;
    for (const auto& [name, fn] : criteria) {
        ++n;
        Verdict v;
        try {
            v = fn();
        } catch (const std::exception& e) {
            v.pass = false;
            v.notes.push_back(std::string("threw: ") + e.what());
        }
        std::string detail;
        for (const auto& s : v.notes) detail += (detail.empty() ? "" : "; ") + s;
        std::cout << (v.pass ? "PASS" : "FAIL") << " [" << n << "] " << name << ": " << detail << std::endl;
        failed += v.pass ? 0 : 1;
    }
    std::cout << fmt::format("{}/{} criteria passed", n - failed, n) << std::endl;
    return failed;
}
