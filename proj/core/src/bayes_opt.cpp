#include "cotkit/bayes_opt.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <ostream>
#include <random>
#include <set>

#include <json.hpp>

#include "config_json.hpp"

#include "cotkit/errors.hpp"

namespace cotkit {

namespace {

constexpr int kBoSchemaVersion = 1;

using nlohmann::json;

const std::string* extreme(const std::vector<std::string>& ids, const ModelRegistry& reg, bool largest) {
    const std::string* best = nullptr;
    for (const auto& id : ids) {
        const auto p = reg.at(id).parameters;
        if (!best || (largest ? p > reg.at(*best).parameters : p < reg.at(*best).parameters)) best = &id;
    }
    return best;
}

std::vector<std::string> in_family(const std::vector<std::string>& ids, const ModelRegistry& reg,
                                   const std::string& family) {
    std::vector<std::string> out;
    for (const auto& id : ids)
        if (reg.at(id).family == family) out.push_back(id);
    return out;
}

const std::string* middle(std::vector<std::string> ids, const ModelRegistry& reg, std::vector<std::string>& keep) {
    if (ids.empty()) return nullptr;
    std::stable_sort(ids.begin(), ids.end(), [&](const auto& a, const auto& b) {
        return reg.at(a).parameters < reg.at(b).parameters;
    });
    keep.push_back(ids[(ids.size() - 1) / 2]);
    return &keep.back();
}

double min_distance(const TransferConfig& c, const std::vector<TransferConfig>& set, const ConfigMetric& metric) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& s : set) m = std::min(m, metric(c, s));
    return m;
}

// Index of the candidate farthest from `chosen`; ties keep the earliest.
std::size_t farthest(const std::vector<TransferConfig>& candidates, const std::vector<TransferConfig>& chosen,
                     const ConfigMetric& metric) {
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double d = min_distance(candidates[i], chosen, metric);
        if (d > best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double expected_improvement(double mean, double sd, double f_best, double xi) {
    const double gain = mean - f_best - xi;
    if (!(sd > 0.0)) return std::max(0.0, gain);
    const double z = gain / sd;
    return std::max(0.0, gain * normal_cdf(z) + sd * normal_pdf(z));
}

std::vector<TransferConfig> initial_design(const ConfigSpace& space, std::size_t k, std::uint64_t seed,
                                           const DistanceWeights& weights) {
    if (k == 0) throw ValidationError("initial design size must be positive");
    auto all = space.enumerate();
    if (all.size() <= k) return all;

    const auto& reg = space.registry;
    std::mt19937_64 rng(seed);
    const ConfigMetric metric(reg, weights);

    auto budgets = space.budgets;
    std::sort(budgets.begin(), budgets.end());
    std::vector<std::size_t> inner(budgets.begin() + (budgets.size() > 2 ? 1 : 0),
                                   budgets.end() - (budgets.size() > 2 ? 1 : 0));
    std::shuffle(inner.begin(), inner.end(), rng);
    std::size_t inner_pos = 0;
    auto next_inner = [&] { return inner[inner_pos++ % inner.size()]; };

    std::size_t strat_pos = rng() % space.strategies.size();
    auto next_strategy = [&] { return space.strategies[strat_pos++ % space.strategies.size()]; };

    std::vector<TransferConfig> design;
    auto push = [&](const std::string* t, const std::string* a, std::size_t b) {
        if (!t || !a || design.size() >= k) return;
        TransferConfig c{*t, *a, b, next_strategy()};
        if (std::find(design.begin(), design.end(), c) == design.end()) design.push_back(std::move(c));
    };

    push(extreme(space.thinking, reg, false), extreme(space.answering, reg, false), budgets.front());
    push(extreme(space.thinking, reg, true), extreme(space.answering, reg, true), budgets.back());

    // First two families that can fill both roles.
    std::vector<std::string> fams;
    for (const auto& f : reg.families())
        if (!in_family(space.thinking, reg, f).empty() && !in_family(space.answering, reg, f).empty())
            fams.push_back(f);
    if (fams.size() >= 2) {
        const auto t0 = in_family(space.thinking, reg, fams[0]);
        const auto a0 = in_family(space.answering, reg, fams[0]);
        const auto t1 = in_family(space.thinking, reg, fams[1]);
        const auto a1 = in_family(space.answering, reg, fams[1]);
        push(extreme(t0, reg, true), extreme(a1, reg, false), next_inner());
        push(extreme(t1, reg, false), extreme(a0, reg, true), next_inner());
    }
    if (!fams.empty()) {
        std::vector<std::string> keep;
        keep.reserve(2);
        const auto& ft = fams[rng() % fams.size()];
        const auto& fa = fams[rng() % fams.size()];
        const auto* t = middle(in_family(space.thinking, reg, ft), reg, keep);
        const auto* a = middle(in_family(space.answering, reg, fa), reg, keep);
        push(t, a, next_inner());
    }

    std::shuffle(all.begin(), all.end(), rng);
    std::erase_if(all, [&](const auto& c) { return std::find(design.begin(), design.end(), c) != design.end(); });
    while (design.size() < k && !all.empty()) {
        const auto i = design.empty() ? 0 : farthest(all, design, metric);
        design.push_back(all[i]);
        all.erase(all.begin() + static_cast<std::ptrdiff_t>(i));
    }
    return design;
}

std::string to_string(BoStopReason r) {
    switch (r) {
        case BoStopReason::budget_exhausted: return "budget_exhausted";
        case BoStopReason::ei_below_threshold: return "ei_below_threshold";
        case BoStopReason::space_exhausted: return "space_exhausted";
    }
    return "unknown";
}

std::optional<double> BoResult::best_after(std::size_t evals) const {
    std::optional<double> best;
    for (const auto& s : steps)
        if (s.iteration <= evals && (!best || s.value > *best)) best = s.value;
    return best;
}

const BoStep* BoResult::best() const {
    const BoStep* b = nullptr;
    for (const auto& s : steps)
        if (!b || s.value > b->value) b = &s;
    return b;
}

BoResult bo_loop(const ConfigSpace& space, const EvaluateFn& evaluate, const BoOptions& opt) {
    if (opt.max_evals == 0) throw ValidationError("evaluation budget must be positive");
    if (std::isnan(opt.ei_threshold)) throw ValidationError("EI threshold must not be NaN");

    auto metric = std::make_shared<ConfigMetric>(space.registry, opt.weights);
    PartsFn parts = [metric](const TransferConfig& a, const TransferConfig& b) { return metric->parts(a, b); };

    BoResult result;
    std::vector<Observation> obs;
    std::set<TransferConfig> seen;
    std::size_t evals = 0;
    double best = -std::numeric_limits<double>::infinity();

    auto run = [&](const TransferConfig& c, std::optional<double> ei) {
        seen.insert(c);
        ++evals;
        double v = 0.0;
        try {
            v = evaluate(c);
        } catch (const std::exception&) {
            result.quarantined.push_back(c);
            return;
        }
        if (!std::isfinite(v)) {
            result.quarantined.push_back(c);
            return;
        }
        best = std::max(best, v);
        obs.push_back({c, v, std::nullopt});
        result.steps.push_back({evals, c, v, best, ei});
    };

    for (const auto& c : initial_design(space, std::min(opt.init_size, space.size()), opt.seed, opt.weights)) {
        if (evals >= opt.max_evals) break;
        run(c, std::nullopt);
    }

    const auto all = space.enumerate();
    while (evals < opt.max_evals) {
        std::vector<TransferConfig> cand;
        for (const auto& c : all)
            if (!seen.contains(c)) cand.push_back(c);
        if (cand.empty()) {
            result.stop_reason = BoStopReason::space_exhausted;
            return result;
        }
        if (obs.size() < 2) {
            // Too little data for a surrogate; keep spreading out.
            std::vector<TransferConfig> taken(seen.begin(), seen.end());
            run(cand[taken.empty() ? 0 : farthest(cand, taken, *metric)], std::nullopt);
            continue;
        }
        const GPModel gp = gp_fit(obs, opt.grid, parts, opt.kernel);
        std::size_t pick = 0;
        double pick_ei = -1.0;
        double pick_var = -1.0;
        for (std::size_t i = 0; i < cand.size(); ++i) {
            const auto p = gp.posterior(cand[i]);
            const double ei = expected_improvement(p.mean, std::sqrt(p.variance), best, opt.xi);
            // cand is in lexicographic order, so strict comparisons keep the smallest config on ties.
            if (ei > pick_ei || (ei == pick_ei && p.variance > pick_var)) {
                pick = i;
                pick_ei = ei;
                pick_var = p.variance;
            }
        }
        if (!(pick_ei >= opt.ei_threshold)) {
            result.stop_reason = BoStopReason::ei_below_threshold;
            return result;
        }
        run(cand[pick], pick_ei);
    }
    result.stop_reason = BoStopReason::budget_exhausted;
    return result;
}

std::string to_json_line(const BoStep& s) {
    json j{{"schema_version", kBoSchemaVersion},
           {"iteration", s.iteration},
           {"config", detail::config_to_json(s.config)},
           {"value", s.value},
           {"best_so_far", s.best_so_far},
           {"ei_of_chosen", s.ei ? json(*s.ei) : json(nullptr)}};
    return j.dump();
}

void write_bo_trace(std::ostream& out, const BoResult& result) {
    for (const auto& s : result.steps) out << to_json_line(s) << '\n';
}

std::string observation_json_line(const TransferConfig& config, double value) {
    return json{{"schema_version", kBoSchemaVersion}, {"config", detail::config_to_json(config)}, {"value", value}}
        .dump();
}

}  // namespace cotkit
