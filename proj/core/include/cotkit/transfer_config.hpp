#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "cotkit/compressed_trace.hpp"
#include "cotkit/corpus.hpp"

namespace cotkit {

/// One point of the search space: who thinks, who answers, how many
/// reasoning tokens get through and how they are compressed.
struct TransferConfig {
    std::string thinking;
    std::string answering;
    std::size_t budget = 0;
    Strategy strategy = Strategy::summarization;

    friend bool operator==(const TransferConfig&, const TransferConfig&) = default;
    friend auto operator<=>(const TransferConfig&, const TransferConfig&) = default;
};

std::string to_string(const TransferConfig& c);

/// Finite cross product thinking x answering x budgets x strategies.
struct ConfigSpace {
    ModelRegistry registry;
    std::vector<std::string> thinking;
    std::vector<std::string> answering;
    std::vector<std::size_t> budgets;
    std::vector<Strategy> strategies;

    /// All models in their registry roles, budgets 64..1024, both strategies.
    static ConfigSpace full(const ModelRegistry& registry,
                            std::vector<std::size_t> budgets = {64, 128, 256, 512, 1024});

    /// Lexicographic order (thinking, answering, budget, strategy) in list order.
    std::vector<TransferConfig> enumerate() const;
    std::size_t size() const noexcept {
        return thinking.size() * answering.size() * budgets.size() * strategies.size();
    }
    /// Throws ValidationError if a config's models lack the needed role or
    /// its budget is off-grid.
    void validate(const TransferConfig& c) const;
};

/// Per-term weights of the configuration distance.
class DistanceWeights {
public:
    DistanceWeights() = default;
    /// Throws ValidationError if any weight is negative or all are zero.
    DistanceWeights(double family, double scale, double budget, double strategy);

    double family() const noexcept { return family_; }
    double scale() const noexcept { return scale_; }
    double budget() const noexcept { return budget_; }
    double strategy() const noexcept { return strategy_; }

private:
    double family_ = 1.0;
    double scale_ = 1.0;
    double budget_ = 0.5;
    double strategy_ = 0.5;
};

/// Weighted distance terms per coordinate: thinking family, answering
/// family, thinking log-scale, answering log-scale, budget, strategy.
/// Their sum is the config distance.
using DistanceParts = std::array<double, 6>;

/// d(a,b) = w_family * (family mismatches of the two roles)
///        + w_scale  * (|ln P_t - ln P_t'| + |ln P_a - ln P_a'|)
///        + w_budget * |log2(B / B')|
///        + w_strategy * [strategies differ]
/// Model lookups are resolved once at construction.
class ConfigMetric {
public:
    ConfigMetric(const ModelRegistry& registry, DistanceWeights weights = {});

    double operator()(const TransferConfig& a, const TransferConfig& b) const;
    DistanceParts parts(const TransferConfig& a, const TransferConfig& b) const;
    const DistanceWeights& weights() const noexcept { return weights_; }

private:
    struct ModelInfo {
        std::size_t family = 0;
        double log_params = 0.0;
    };
    const ModelInfo& info(const std::string& id) const;

    DistanceWeights weights_;
    std::unordered_map<std::string, ModelInfo> models_;
};

double config_distance(const TransferConfig& a, const TransferConfig& b, const DistanceWeights& weights,
                       const ModelRegistry& registry);

}  // namespace cotkit
