#include "cotkit/transfer_config.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cotkit/errors.hpp"

namespace cotkit {

std::string to_string(const TransferConfig& c) {
    return fmt::format("{}->{}@{}/{}", c.thinking, c.answering, c.budget, to_string(c.strategy));
}

ConfigSpace ConfigSpace::full(const ModelRegistry& registry, std::vector<std::size_t> budgets) {
    ConfigSpace s;
    s.registry = registry;
    s.thinking = registry.ids_with_role(ModelRole::thinking);
    s.answering = registry.ids_with_role(ModelRole::answering);
    s.budgets = std::move(budgets);
    s.strategies = {Strategy::summarization, Strategy::truncation};
    return s;
}

std::vector<TransferConfig> ConfigSpace::enumerate() const {
    std::vector<TransferConfig> out;
    out.reserve(size());
    for (const auto& t : thinking)
        for (const auto& a : answering)
            for (auto b : budgets)
                for (auto s : strategies) out.push_back({t, a, b, s});
    return out;
}

void ConfigSpace::validate(const TransferConfig& c) const {
    if (!registry.at(c.thinking).has_role(ModelRole::thinking))
        throw ValidationError("model " + c.thinking + " cannot act as a thinking model");
    if (!registry.at(c.answering).has_role(ModelRole::answering))
        throw ValidationError("model " + c.answering + " cannot act as an answering model");
    if (std::find(budgets.begin(), budgets.end(), c.budget) == budgets.end())
        throw ValidationError("budget " + std::to_string(c.budget) + " is not on the grid");
}

DistanceWeights::DistanceWeights(double family, double scale, double budget, double strategy)
    : family_(family), scale_(scale), budget_(budget), strategy_(strategy) {
    for (double w : {family, scale, budget, strategy})
        if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("distance weights must be non-negative");
    if (family + scale + budget + strategy <= 0.0)
        throw ValidationError("at least one distance weight must be positive");
}

ConfigMetric::ConfigMetric(const ModelRegistry& registry, DistanceWeights weights)
    : weights_(weights) {
    for (const auto& m : registry.models())
        models_.emplace(m.id, ModelInfo{registry.family_index(m.family),
                                        std::log(static_cast<double>(m.parameters))});
}

const ConfigMetric::ModelInfo& ConfigMetric::info(const std::string& id) const {
    auto it = models_.find(id);
    if (it == models_.end()) throw ValidationError("unknown model id " + id);
    return it->second;
}

DistanceParts ConfigMetric::parts(const TransferConfig& a, const TransferConfig& b) const {
    const auto& ta = info(a.thinking);
    const auto& tb = info(b.thinking);
    const auto& aa = info(a.answering);
    const auto& ab = info(b.answering);
    const double budget = (a.budget == b.budget)
                              ? 0.0
                              : std::abs(std::log2(static_cast<double>(a.budget) / static_cast<double>(b.budget)));
    return {weights_.family() * (ta.family != tb.family ? 1.0 : 0.0),
            weights_.family() * (aa.family != ab.family ? 1.0 : 0.0),
            weights_.scale() * std::abs(ta.log_params - tb.log_params),
            weights_.scale() * std::abs(aa.log_params - ab.log_params),
            weights_.budget() * budget,
            weights_.strategy() * (a.strategy != b.strategy ? 1.0 : 0.0)};
}

double ConfigMetric::operator()(const TransferConfig& a, const TransferConfig& b) const {
    const auto p = parts(a, b);
    return p[0] + p[1] + p[2] + p[3] + p[4] + p[5];
}

double config_distance(const TransferConfig& a, const TransferConfig& b, const DistanceWeights& weights,
                       const ModelRegistry& registry) {
    return ConfigMetric(registry, weights)(a, b);
}

}  // namespace cotkit
