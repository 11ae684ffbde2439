#include "cotkit/gaussian_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cotkit/errors.hpp"

namespace cotkit {

namespace {

constexpr double kVarianceFloor = 1e-6;
constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-4;

double total(const DistanceParts& p) { return p[0] + p[1] + p[2] + p[3] + p[4] + p[5]; }

std::vector<DistanceParts> parts_matrix(const std::vector<Observation>& obs, const PartsFn& parts) {
    const std::size_t n = obs.size();
    std::vector<DistanceParts> out(n * n, DistanceParts{});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) out[i * n + j] = out[j * n + i] = parts(obs[i].config, obs[j].config);
    return out;
}

}  // namespace

double matern52(double d, double sigma2, double ell) {
    if (!(ell > 0.0)) throw ValidationError("length scale must be positive");
    if (std::isinf(d)) return 0.0;
    const double r = std::sqrt(5.0) * std::abs(d) / ell;
    return sigma2 * std::exp(-r) * (1.0 + r + r * r / 3.0);
}

PartsFn metric_parts(const ConfigMetric& metric) {
    return [metric](const TransferConfig& a, const TransferConfig& b) { return metric.parts(a, b); };
}

KernelForm parse_kernel_form(std::string_view s) {
    if (s == "product") return KernelForm::product;
    if (s == "summed") return KernelForm::summed;
    throw ValidationError("unknown kernel form '" + std::string(s) + "'");
}

std::string_view to_string(KernelForm f) { return f == KernelForm::product ? "product" : "summed"; }

double config_kernel(const DistanceParts& p, double sigma2, double ell, KernelForm form) {
    if (form == KernelForm::summed) return matern52(total(p), sigma2, ell);
    double k = sigma2;
    for (double d : p)
        if (d != 0.0) k *= matern52(d, 1.0, ell);
    return k;
}

GPModel::GPModel(std::vector<Observation> data, GPHyper hyper, double prior_mean, double jitter,
                 Eigen::MatrixXd chol, Eigen::VectorXd alpha, double lml, PartsFn parts, KernelForm form)
    : data_(std::move(data)), hyper_(hyper), prior_mean_(prior_mean), jitter_(jitter), chol_(std::move(chol)),
      alpha_(std::move(alpha)), lml_(lml), parts_(std::move(parts)), form_(form) {}

GPPosterior GPModel::posterior(const TransferConfig& x) const {
    const auto n = static_cast<Eigen::Index>(data_.size());
    Eigen::VectorXd k(n);
    double exact_sum = 0.0;
    std::size_t exact_hits = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& o = data_[static_cast<std::size_t>(i)];
        const auto p = parts_(x, o.config);
        const double d = total(p);
        k(i) = config_kernel(p, hyper_.sigma2, hyper_.ell, form_);
        if (d == 0.0 && hyper_.noise == 0.0 && o.noise_known.value_or(0.0) == 0.0) {
            exact_sum += o.value;
            ++exact_hits;
        }
    }
    GPPosterior p;
    if (exact_hits > 0) {
        // Noiseless training input: the conditional is the observation itself.
        p.mean = exact_sum / static_cast<double>(exact_hits);
        p.variance = 0.0;
        return p;
    }
    p.mean = prior_mean_ + k.dot(alpha_);
    const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
    double var = hyper_.sigma2 - v.squaredNorm();
    // Residual variance at the scale of the jitter is round-off, not information.
    if (var < 10.0 * jitter_) var = 0.0;
    p.variance = std::min(var, hyper_.sigma2);
    return p;
}

std::optional<CholeskyResult> jittered_cholesky(const Eigen::MatrixXd& k, double start, double max_jitter) {
    if (!(start > 0.0)) throw ValidationError("starting jitter must be positive");
    const auto n = k.rows();
    for (double jitter = start; jitter <= max_jitter * (1.0 + 1e-9); jitter *= 10.0) {
        Eigen::MatrixXd a = k;
        a.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() != Eigen::Success) continue;
        Eigen::MatrixXd l = llt.matrixL();
        bool ok = true;
        for (Eigen::Index i = 0; i < n && ok; ++i) ok = std::isfinite(l(i, i)) && l(i, i) > 0.0;
        if (ok) return CholeskyResult{std::move(l), jitter};
    }
    return std::nullopt;
}

HyperGrid default_hyper_grid(const std::vector<Observation>& obs, const PartsFn& parts) {
    HyperGrid g;
    double mean = 0.0;
    for (const auto& o : obs) mean += o.value;
    mean /= static_cast<double>(std::max<std::size_t>(obs.size(), 1));
    double var = 0.0;
    for (const auto& o : obs) var += (o.value - mean) * (o.value - mean);
    var /= static_cast<double>(std::max<std::size_t>(obs.size(), 1));
    var = std::max(var, kVarianceFloor);
    for (double f : {0.25, 0.5, 1.0, 2.0}) g.sigma2.push_back(f * var);

    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i)
        for (std::size_t j = i + 1; j < obs.size(); ++j) {
            const double d = total(parts(obs[i].config, obs[j].config));
            if (d > 0.0) {
                lo = std::min(lo, d);
                hi = std::max(hi, d);
            }
        }
    if (!(hi > 0.0)) {
        g.ell = {1.0};
    } else if (hi <= lo) {
        g.ell = {lo};
    } else {
        const int steps = 8;
        for (int i = 0; i < steps; ++i)
            g.ell.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (steps - 1)));
    }
    g.noise = {1e-6, 1e-4, 1e-2};
    return g;
}

GPModel gp_fit(const std::vector<Observation>& observations, const HyperGrid& grid_in, PartsFn parts,
               KernelForm form) {
    if (observations.size() < 2) throw InsufficientDataError("gp_fit needs at least two observations");
    for (const auto& o : observations)
        if (!std::isfinite(o.value)) throw ValidationError("observation value is not finite");

    HyperGrid grid = grid_in;
    if (grid.sigma2.empty() || grid.ell.empty() || grid.noise.empty()) {
        const HyperGrid def = default_hyper_grid(observations, parts);
        if (grid.sigma2.empty()) grid.sigma2 = def.sigma2;
        if (grid.ell.empty()) grid.ell = def.ell;
        if (grid.noise.empty()) grid.noise = def.noise;
    }

    const auto n = static_cast<Eigen::Index>(observations.size());
    double prior_mean = 0.0;
    for (const auto& o : observations) prior_mean += o.value;
    prior_mean /= static_cast<double>(n);
    Eigen::VectorXd y(n);
    Eigen::VectorXd known = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& o = observations[static_cast<std::size_t>(i)];
        y(i) = o.value - prior_mean;
        if (o.noise_known) known(i) = std::max(0.0, *o.noise_known);
    }
    const auto dist = parts_matrix(observations, parts);

    struct Best {
        GPHyper hyper;
        CholeskyResult chol;
        Eigen::VectorXd alpha;
        double lml = -std::numeric_limits<double>::infinity();
        bool found = false;
    } best;

    for (double s2 : grid.sigma2) {
        if (!(s2 > 0.0)) throw ValidationError("signal variance must be positive");
        for (double ell : grid.ell) {
            Eigen::MatrixXd k(n, n);
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j)
                    k(i, j) = config_kernel(dist[static_cast<std::size_t>(i * n + j)], s2, ell, form);
            for (double noise : grid.noise) {
                if (!(noise >= 0.0)) throw ValidationError("noise variance must be non-negative");
                Eigen::MatrixXd kn = k;
                kn.diagonal().array() += noise;
                kn.diagonal() += known;
                auto chol = jittered_cholesky(kn, kJitterStart, kJitterMax);
                if (!chol) continue;
                const Eigen::VectorXd z = chol->lower.triangularView<Eigen::Lower>().solve(y);
                Eigen::VectorXd alpha = chol->lower.transpose().triangularView<Eigen::Upper>().solve(z);
                const double lml = -0.5 * y.dot(alpha) - chol->lower.diagonal().array().log().sum() -
                                   0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
                if (!std::isfinite(lml)) continue;
                if (!best.found || lml > best.lml) {
                    best = {GPHyper{s2, ell, noise}, std::move(*chol), std::move(alpha), lml, true};
                }
            }
        }
    }
    if (!best.found) throw NumericalError("kernel matrix could not be factorized at the maximum jitter");
    return GPModel(observations, best.hyper, prior_mean, best.chol.jitter, std::move(best.chol.lower),
                   std::move(best.alpha), best.lml, std::move(parts), form);
}

GPPosterior gp_posterior(const GPModel& model, const TransferConfig& x) { return model.posterior(x); }

}  // namespace cotkit
