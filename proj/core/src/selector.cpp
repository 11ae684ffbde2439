#include "cotkit/selector.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "cotkit/errors.hpp"

namespace cotkit {

double retention_cap(std::size_t budget) {
    static constexpr std::array<std::pair<double, double>, 5> tiers{
        {{6.0, 0.05}, {7.0, 0.15}, {8.0, 0.30}, {9.0, 0.50}, {10.0, 0.75}}};
    if (budget <= 64) return 0.05;
    if (budget > 1024) return 1.0;
    const double x = std::log2(static_cast<double>(budget));
    for (std::size_t k = 1; k < tiers.size(); ++k) {
        const auto [x1, y1] = tiers[k];
        if (x <= x1) {
            const auto [x0, y0] = tiers[k - 1];
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        }
    }
    return 0.75;
}

std::size_t max_kept_count(double cap, std::size_t n) {
    const auto k = static_cast<std::size_t>(std::ceil(cap * static_cast<double>(n) - 1e-9));
    return std::max<std::size_t>(1, std::min(k, n));
}

bool SelectionPlan::contains(std::size_t i) const {
    return std::binary_search(kept.begin(), kept.end(), i);
}

namespace {

// Selection state over the non-conclusion items.
struct Pick {
    std::vector<char> in;
    std::size_t tokens = 0;
    std::size_t count = 0;
    double value = 0.0;
};

class Knapsack {
public:
    Knapsack(std::span<const SelectionItem> items, std::size_t conclusion, std::size_t slots)
        : items_(items), slots_(slots) {
        for (std::size_t i = 0; i < items.size(); ++i)
            if (i != conclusion) candidates_.push_back(i);
        by_density_ = candidates_;
        std::stable_sort(by_density_.begin(), by_density_.end(), [&](std::size_t a, std::size_t b) {
            const double da = density(a), db = density(b);
            if (da != db) return da > db;
            if (items_[a].importance != items_[b].importance)
                return items_[a].importance > items_[b].importance;
            return a < b;
        });
        by_value_ = candidates_;
        std::stable_sort(by_value_.begin(), by_value_.end(), [&](std::size_t a, std::size_t b) {
            if (items_[a].importance != items_[b].importance)
                return items_[a].importance > items_[b].importance;
            if (items_[a].tokens != items_[b].tokens) return items_[a].tokens < items_[b].tokens;
            return a < b;
        });
    }

    Pick empty() const { return Pick{std::vector<char>(items_.size(), 0)}; }

    std::size_t total_tokens() const {
        std::size_t t = 0;
        for (auto i : candidates_) t += items_[i].tokens;
        return t;
    }

    // Adds items in `order` that still fit the capacity and the slot count.
    void fill(Pick& p, const std::vector<std::size_t>& order, std::size_t capacity) const {
        for (auto i : order) {
            if (p.count >= slots_) return;
            if (p.in[i] || p.tokens + items_[i].tokens > capacity) continue;
            add(p, i);
        }
    }

    Pick density_greedy(std::size_t capacity) const {
        Pick p = empty();
        fill(p, by_density_, capacity);
        return p;
    }

    Pick value_greedy(std::size_t capacity) const {
        Pick p = empty();
        fill(p, by_value_, capacity);
        return p;
    }

    Pick single_best_then_density(std::size_t capacity) const {
        Pick p = empty();
        if (slots_ == 0) return p;
        for (auto i : by_value_) {
            if (items_[i].tokens <= capacity) {
                add(p, i);
                break;
            }
        }
        fill(p, by_density_, capacity);
        return p;
    }

    Pick best_of_three(std::size_t capacity) const {
        Pick best = density_greedy(capacity);
        for (auto&& alt : {single_best_then_density(capacity), value_greedy(capacity)}) {
            if (alt.value > best.value) best = alt;
        }
        return best;
    }

    const std::vector<std::size_t>& by_density() const { return by_density_; }

private:
    double density(std::size_t i) const {
        return items_[i].importance / static_cast<double>(std::max<std::size_t>(1, items_[i].tokens));
    }
    void add(Pick& p, std::size_t i) const {
        p.in[i] = 1;
        p.tokens += items_[i].tokens;
        p.value += items_[i].importance;
        ++p.count;
    }

    std::span<const SelectionItem> items_;
    std::size_t slots_;
    std::vector<std::size_t> candidates_;
    std::vector<std::size_t> by_density_;
    std::vector<std::size_t> by_value_;
};

}  // namespace

SelectionPlan greedy_select(std::span<const SelectionItem> items, std::size_t conclusion_index,
                            std::size_t budget, double cap, SelectionRule rule) {
    if (budget == 0) throw BudgetTooSmallError("selection budget must be at least 1 token");
    if (items.empty()) throw ValidationError("nothing to select from");
    if (conclusion_index >= items.size()) throw ValidationError("conclusion index out of range");
    if (!(cap > 0.0 && cap <= 1.0)) throw ValidationError("retention cap must lie in (0,1]");

    SelectionPlan plan;
    plan.budget = budget;
    plan.cap_fraction = cap;
    plan.max_kept = max_kept_count(cap, items.size());

    const auto& conclusion = items[conclusion_index];
    if (conclusion.tokens > budget) {
        plan.kept = {conclusion_index};
        plan.total_tokens = budget;
        plan.total_importance = conclusion.importance;
        plan.conclusion_prefix_tokens = budget;
        return plan;
    }

    const std::size_t residual = budget - conclusion.tokens;
    const Knapsack ks(items, conclusion_index, plan.max_kept - 1);

    Pick chosen;
    if (rule == SelectionRule::density) {
        chosen = ks.density_greedy(residual);
    } else {
        // best(r) = better of best_of_three(r) and best(r-1) topped up to r;
        // the top-up keeps the value non-decreasing in r.
        const std::size_t horizon = std::min(residual, ks.total_tokens());
        chosen = ks.best_of_three(0);
        for (std::size_t r = 1; r <= horizon; ++r) {
            ks.fill(chosen, ks.by_density(), r);
            Pick fresh = ks.best_of_three(r);
            if (fresh.value > chosen.value) chosen = std::move(fresh);
        }
        if (residual > horizon) {
            ks.fill(chosen, ks.by_density(), residual);
            Pick fresh = ks.best_of_three(residual);
            if (fresh.value > chosen.value) chosen = std::move(fresh);
        }
    }

    chosen.in[conclusion_index] = 1;
    for (std::size_t i = 0; i < items.size(); ++i)
        if (chosen.in[i]) plan.kept.push_back(i);
    plan.total_tokens = chosen.tokens + conclusion.tokens;
    plan.total_importance = chosen.value + conclusion.importance;
    return plan;
}

SelectionPlan greedy_select(const std::vector<Segment>& segments, const ScoreVector& scores,
                            std::size_t budget, double cap, SelectionRule rule) {
    if (segments.size() != scores.size()) throw ValidationError("scores are not aligned with segments");
    std::vector<SelectionItem> items(segments.size());
    std::size_t conclusion = segments.size() - 1;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        items[i] = {scores[i].normalized, segments[i].token_count};
        if (segments[i].is_conclusion) conclusion = i;
    }
    return greedy_select(items, conclusion, budget, cap, rule);
}

CompressedTrace truncate_baseline(const ReasoningTrace& trace, const Tokenizer& tokenizer,
                                  std::size_t budget) {
    CompressedTrace out;
    out.question_id = trace.question_id;
    out.source_trace_id = trace.id();
    out.strategy = Strategy::truncation;
    out.budget = budget;
    out.text = tokenizer.prefix(trace.text, budget);
    out.token_count = tokenizer.count(out.text);
    out.fits_budget = out.token_count <= budget;
    out.degenerate = out.text.empty();
    return out;
}

std::string plan_to_json(const SelectionPlan& plan) {
    nlohmann::json j{{"kept", plan.kept},
                     {"total_tokens", plan.total_tokens},
                     {"total_importance", plan.total_importance},
                     {"budget", plan.budget},
                     {"cap_fraction", plan.cap_fraction},
                     {"max_kept", plan.max_kept}};
    if (plan.conclusion_prefix_tokens) j["conclusion_prefix_tokens"] = *plan.conclusion_prefix_tokens;
    return j.dump();
}

}  // namespace cotkit
