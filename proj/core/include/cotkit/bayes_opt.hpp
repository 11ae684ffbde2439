#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cotkit/gaussian_process.hpp"
#include "cotkit/transfer_config.hpp"

namespace cotkit {

double normal_pdf(double z);
double normal_cdf(double z);

/// EI = (mu - f* - xi) Phi(Z) + sd phi(Z), Z = (mu - f* - xi) / sd.
/// With sd == 0 this is max(0, mu - f* - xi).
double expected_improvement(double mean, double sd, double f_best, double xi = 0.0);

/// Seeded space-filling start: corner pairs, cross-family extremes, one
/// balanced mid-scale pair, then max-min distance filling up to k.
/// Returns every config when the space has at most k points.
std::vector<TransferConfig> initial_design(const ConfigSpace& space, std::size_t k, std::uint64_t seed,
                                           const DistanceWeights& weights = {});

struct BoOptions {
    std::size_t max_evals = 15;
    double ei_threshold = 1e-4;
    std::uint64_t seed = 0;
    std::size_t init_size = 8;
    double xi = 0.0;
    DistanceWeights weights{};
    HyperGrid grid{};  // empty lists are derived from the data each round
    KernelForm kernel = KernelForm::product;
};

struct BoStep {
    std::size_t iteration = 0;  // 1-based evaluation counter
    TransferConfig config;
    double value = 0.0;
    double best_so_far = 0.0;
    std::optional<double> ei;  // absent for initial-design points
};

enum class BoStopReason { budget_exhausted, ei_below_threshold, space_exhausted };
std::string to_string(BoStopReason r);

struct BoResult {
    std::vector<BoStep> steps;
    std::vector<TransferConfig> quarantined;
    BoStopReason stop_reason = BoStopReason::budget_exhausted;

    /// Best value seen among the first `evals` evaluations (failures count).
    std::optional<double> best_after(std::size_t evals) const;
    const BoStep* best() const;
};

using EvaluateFn = std::function<double(const TransferConfig&)>;

/// Failed evaluations (exceptions or non-finite values) quarantine the
/// config and consume one evaluation.
BoResult bo_loop(const ConfigSpace& space, const EvaluateFn& evaluate, const BoOptions& options);

std::string to_json_line(const BoStep& step);
void write_bo_trace(std::ostream& out, const BoResult& result);
std::string observation_json_line(const TransferConfig& config, double value);

}  // namespace cotkit
