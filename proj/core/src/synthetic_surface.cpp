#include "cotkit/synthetic_surface.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "cotkit/errors.hpp"

namespace cotkit {

SyntheticSurface::SyntheticSurface(const ModelRegistry& registry, std::uint64_t seed)
    : SyntheticSurface(registry, seed, Shape{}) {}

SyntheticSurface::SyntheticSurface(const ModelRegistry& registry, std::uint64_t seed, Shape shape)
    : registry_(registry), shape_(shape) {
    if (registry_.models().empty()) throw ValidationError("synthetic surface needs at least one model");
    log_min_ = std::numeric_limits<double>::infinity();
    log_max_ = -std::numeric_limits<double>::infinity();
    for (const auto& m : registry_.models()) {
        const double l = std::log(static_cast<double>(m.parameters));
        log_min_ = std::min(log_min_, l);
        log_max_ = std::max(log_max_, l);
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> freq(0.5, 2.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    for (int i = 0; i < 3; ++i) harmonics_.push_back({freq(rng), freq(rng), freq(rng), phase(rng)});
}

double SyntheticSurface::scale_fraction(const std::string& id) const {
    if (log_max_ <= log_min_) return 1.0;
    const double l = std::log(static_cast<double>(registry_.at(id).parameters));
    return std::clamp((l - log_min_) / (log_max_ - log_min_), 0.0, 1.0);
}

SurfaceTerms SyntheticSurface::terms(const TransferConfig& c) const {
    if (c.budget == 0) throw ValidationError("budget must be positive");
    const auto& t = registry_.at(c.thinking);
    const auto& a = registry_.at(c.answering);
    const double st = scale_fraction(c.thinking);
    const double sa = scale_fraction(c.answering);
    const double b = static_cast<double>(c.budget);
    const double decay = std::exp(-b / shape_.budget_scale);

    SurfaceTerms r;
    r.base = shape_.intercept + shape_.answering_gain * sa;
    r.thinking = shape_.thinking_gain * st;
    r.family = t.family == a.family ? shape_.family_bonus : 0.0;
    r.budget = shape_.budget_gain * (1.0 - decay);
    r.strategy = c.strategy == Strategy::summarization ? shape_.strategy_gain * decay : 0.0;

    const double lb = std::log2(b) / 10.0;
    const double fam = static_cast<double>(registry_.family_index(t.family) + registry_.family_index(a.family));
    for (const auto& h : harmonics_)
        r.noise += shape_.noise_amplitude * std::sin(h.wt * 3.0 * st + h.wa * 3.0 * sa + h.wb * 3.0 * lb + fam + h.phase);
    return r;
}

double SyntheticSurface::operator()(const TransferConfig& c) const { return std::clamp(terms(c).sum(), 0.0, 1.0); }

std::pair<TransferConfig, double> surface_optimum(const ConfigSpace& space, const SyntheticSurface& surface) {
    std::pair<TransferConfig, double> best{{}, -std::numeric_limits<double>::infinity()};
    for (const auto& c : space.enumerate()) {
        const double v = surface(c);
        if (v > best.second) best = {c, v};
    }
    return best;
}

}  // namespace cotkit
