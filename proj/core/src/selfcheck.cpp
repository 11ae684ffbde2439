#include "cotkit/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include <fmt/format.h>

#include "cotkit/analyzer.hpp"
#include "cotkit/bayes_opt.hpp"
#include "cotkit/errors.hpp"
#include "cotkit/gaussian_process.hpp"
#include "cotkit/scorer.hpp"
#include "cotkit/selector.hpp"
#include "cotkit/stats.hpp"
#include "cotkit/synthetic_surface.hpp"

namespace cotkit {

namespace {

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

CheckResult check(std::string name, const std::function<std::string()>& body) {
    CheckResult r{std::move(name), false, {}};
    try {
        r.detail = body();
        r.passed = r.detail.empty();
        if (r.passed) r.detail = "ok";
    } catch (const std::exception& e) {
        r.detail = std::string("threw: ") + e.what();
    }
    return r;
}

// Best importance over subsets that contain the conclusion and fit both limits.
double exhaustive_best(const std::vector<SelectionItem>& items, std::size_t conclusion, std::size_t budget,
                       std::size_t max_kept) {
    const std::size_t n = items.size();
    double best = 0.0;
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

}  // namespace

std::vector<CheckResult> run_selfcheck(std::uint64_t seed) {
    std::vector<CheckResult> out;
    std::mt19937_64 rng(seed);

    out.push_back(check("composite weights", [] {
        const ImportanceWeights w;
        if (composite_importance(1, 0, 0, 0, w) != 0.3) return std::string("composite(1,0,0,0) != 0.3");
        if (!near(composite_importance(1, 1, 1, 1, w), 1.0, 1e-15)) return std::string("composite(1,1,1,1) != 1");
        return std::string();
    }));

    out.push_back(check("propagation fixed points", [] {
        DependencyGraph single(1);
        const std::vector<double> one{1.0};
        const auto r1 = propagate_importance(single, one);
        if (!near(r1.scores[0], 0.15, 1e-15)) return fmt::format("single node gave {}", r1.scores[0]);
        DependencyGraph cycle(2);
        cycle.add_edge_unchecked(0, 1, EdgeKind::connective);
        cycle.add_edge_unchecked(1, 0, EdgeKind::connective);
        const std::vector<double> two{1.0, 1.0};
        const auto r2 = propagate_importance(cycle, two);
        if (!near(r2.scores[0], 1.0, 1e-9) || !near(r2.scores[1], 1.0, 1e-9)) return std::string("two-cycle != (1,1)");
        for (std::size_t i = 1; i < r2.l1_residuals.size(); ++i)
            if (r2.l1_residuals[i] > r2.l1_residuals[i - 1] * (1 + 1e-12)) return std::string("residual increased");
        return std::string();
    }));

    out.push_back(check("retention caps", [] {
        const std::pair<std::size_t, double> table[] = {{64, 0.05}, {128, 0.15}, {256, 0.30}, {512, 0.50}, {1024, 0.75}};
        for (auto [b, c] : table)
            if (!near(retention_cap(b), c, 1e-12)) return fmt::format("cap({}) = {}", b, retention_cap(b));
        return std::string();
    }));

    out.push_back(check("selection vs exhaustive", [&] {
        std::uniform_int_distribution<std::size_t> nseg(2, 12), tok(5, 80), bud(20, 400);
        std::uniform_real_distribution<double> imp(0.0, 1.0);
        double worst = 1.0;
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<SelectionItem> items(nseg(rng));
            for (auto& it : items) it = {imp(rng), tok(rng)};
            const auto concl = items.size() - 1;
            const std::size_t budget = std::max(bud(rng), items[concl].tokens);
            const auto plan = greedy_select(items, concl, budget, 1.0);
            if (plan.total_tokens > budget) return std::string("plan over budget");
            const double opt = exhaustive_best(items, concl, budget, items.size());
            if (opt > 0) worst = std::min(worst, plan.total_importance / opt);
        }
        if (worst < 0.5) return fmt::format("worst ratio {}", worst);
        return std::string();
    }));

    out.push_back(check("kernel and expected improvement", [] {
        if (matern52(0.0, 2.5, 1.3) != 2.5) return std::string("k(0) != sigma2");
        if (!near(matern52(1.0, 1.0, 1.0), 0.52399, 1e-5)) return std::string("k(ell) off");
        if (!near(expected_improvement(0.8, 0.1, 0.7), 0.10833, 1e-5)) return std::string("EI example off");
        if (expected_improvement(0.5, 0.0, 0.7) != 0.0) return std::string("EI with sd 0 not 0");
        return std::string();
    }));

    out.push_back(check("gp interpolation", [] {
        const auto reg = reference_model_registry();
        const ConfigMetric metric(reg);
        const auto d = metric_parts(metric);
        const TransferConfig a{"qwen3-8b", "qwen3-8b", 256, Strategy::summarization};
        const TransferConfig b{"deepseek-r1-7b", "qwen3-32b", 64, Strategy::truncation};
        const std::vector<Observation> obs{{a, 0.3, {}}, {b, 0.7, {}}};
        const auto gp = gp_fit(obs, HyperGrid::single({0.04, 2.0, 0.0}), d);
        if (!near(gp.posterior(a).mean, 0.3, 1e-6) || !near(gp.posterior(b).mean, 0.7, 1e-6))
            return std::string("posterior does not interpolate");
        return std::string();
    }));

    out.push_back(check("pareto vs brute force", [&] {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<AccCv> pts(64);
            for (auto& p : pts) p = {std::round(u(rng) * 20) / 20, std::round(u(rng) * 20) / 20};
            std::vector<std::size_t> brute;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                bool dominated = false;
                for (std::size_t j = 0; j < pts.size() && !dominated; ++j)
                    dominated = pts[j].acc > pts[i].acc && pts[j].cv < pts[i].cv;
                if (!dominated) brute.push_back(i);
            }
            auto sweep = pareto_frontier(pts);
            std::sort(sweep.begin(), sweep.end());
            if (sweep != brute) return std::string("frontier mismatch");
        }
        return std::string();
    }));

    out.push_back(check("power-law recovery", [] {
        std::vector<AccCv> pts;
        for (int i = 0; i < 16; ++i) {
            const double acc = 0.3 + 0.04 * i;
            pts.push_back({acc, 0.42 * std::pow(acc, -2.3)});
        }
        PowerLawOptions opt;
        opt.pareto_only = false;
        opt.bootstrap_n = 50;
        const auto fit = fit_power_law(pts, opt);
        if (!near(fit.alpha, 0.42, 1e-9) || !near(fit.beta, -2.3, 1e-9))
            return fmt::format("fit ({}, {})", fit.alpha, fit.beta);
        return std::string();
    }));

    out.push_back(check("paired t-test", [] {
        const std::vector<double> diff{0.1, 0.2, 0.3};
        const auto r = paired_t_test(diff, 1);
        if (!near(r.t, std::sqrt(12.0), 1e-9)) return fmt::format("t = {}", r.t);
        if (!near(r.cohens_d, 2.0, 1e-12)) return fmt::format("d = {}", r.cohens_d);
        if (!near(coefficient_of_variation(std::vector<double>{0.6, 0.8}), 1.0 / 7.0, 1e-12))
            return std::string("CV(0.6,0.8) off");
        return std::string();
    }));

    out.push_back(check("optimizer on synthetic surface", [&] {
        const auto reg = reference_model_registry();
        const auto space = ConfigSpace::full(reg);
        const SyntheticSurface surface(reg, seed);
        const double opt = surface_optimum(space, surface).second;
        BoOptions bo;
        bo.seed = seed;
        const auto res = bo_loop(space, [&](const TransferConfig& c) { return surface(c); }, bo);
        double prev = -1.0;
        for (const auto& s : res.steps) {
            if (s.best_so_far < prev) return std::string("best_so_far decreased");
            prev = s.best_so_far;
        }
        const double best = res.best_after(15).value_or(0.0);
        if (best < 0.9 * opt) return fmt::format("best {} vs optimum {}", best, opt);
        return std::string();
    }));

    return out;
}

}  // namespace cotkit
