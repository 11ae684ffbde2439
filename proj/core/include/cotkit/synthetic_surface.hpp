#pragma once

#include <cstdint>
#include <vector>

#include "cotkit/transfer_config.hpp"

namespace cotkit {

/// Additive pieces of one synthetic accuracy value, before clipping.
struct SurfaceTerms {
    double base = 0.0;       // answering-model scale
    double thinking = 0.0;   // thinking-model scale
    double family = 0.0;     // same-family bonus
    double budget = 0.0;     // saturating budget term
    double strategy = 0.0;   // summarization bonus, decays with budget
    double noise = 0.0;      // seeded smooth perturbation

    double sum() const noexcept { return base + thinking + family + budget + strategy + noise; }
};

/// Deterministic offline stand-in for an accuracy measurement over
/// transfer configs. Values lie in [0, 1].
class SyntheticSurface {
public:
    struct Shape {
        double intercept = 0.30;
        double answering_gain = 0.22;
        double thinking_gain = 0.12;
        double family_bonus = 0.08;
        double budget_gain = 0.15;
        double budget_scale = 256.0;
        double strategy_gain = 0.12;
        double noise_amplitude = 0.01;  // per harmonic, three harmonics
    };

    SyntheticSurface(const ModelRegistry& registry, std::uint64_t seed);
    SyntheticSurface(const ModelRegistry& registry, std::uint64_t seed, Shape shape);

    SurfaceTerms terms(const TransferConfig& c) const;
    double operator()(const TransferConfig& c) const;

    /// Scale of a model in [0,1]: log-parameter position between the
    /// smallest and largest model of the registry.
    double scale_fraction(const std::string& id) const;

private:
    ModelRegistry registry_;
    Shape shape_;
    double log_min_ = 0.0;
    double log_max_ = 0.0;
    struct Harmonic {
        double wt, wa, wb, phase;
    };
    std::vector<Harmonic> harmonics_;
};

/// Best value over the whole space and the config attaining it.
std::pair<TransferConfig, double> surface_optimum(const ConfigSpace& space, const SyntheticSurface& surface);

}  // namespace cotkit
