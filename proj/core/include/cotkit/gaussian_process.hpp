#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cotkit/transfer_config.hpp"

namespace cotkit {

/// Matérn-5/2 covariance at distance d.
double matern52(double d, double sigma2, double ell);

struct Observation {
    TransferConfig config;
    double value = 0.0;
    std::optional<double> noise_known;
};

struct GPHyper {
    double sigma2 = 1.0;
    double ell = 1.0;
    double noise = 0.0;
};

/// Candidate values tried by gp_fit. Empty lists are filled from the data:
/// sigma2 = {0.25,0.5,1,2} * var(y), ell = 8 log-spaced values over the
/// observed pairwise summed distances, noise = {1e-6,1e-4,1e-2}.
struct HyperGrid {
    std::vector<double> sigma2;
    std::vector<double> ell;
    std::vector<double> noise;

    static HyperGrid single(GPHyper h) { return {{h.sigma2}, {h.ell}, {h.noise}}; }
};

using PartsFn = std::function<DistanceParts(const TransferConfig&, const TransferConfig&)>;

PartsFn metric_parts(const ConfigMetric& metric);

enum class KernelForm {
    /// sigma2 * prod_i m(p_i): one Matérn-5/2 factor per distance part.
    product,
    /// sigma2 * m(sum_i p_i): Matérn-5/2 of the summed distance. Not positive
    /// definite in general on this metric; fits skip grid points that fail.
    summed,
};

KernelForm parse_kernel_form(std::string_view s);
std::string_view to_string(KernelForm f);

/// Covariance of two configs whose distance parts are `p`.
double config_kernel(const DistanceParts& p, double sigma2, double ell, KernelForm form = KernelForm::product);

struct GPPosterior {
    double mean = 0.0;
    double variance = 0.0;
};

/// Immutable GP snapshot. Safe to share read-only.
class GPModel {
public:
    GPModel(std::vector<Observation> data, GPHyper hyper, double prior_mean, double jitter, Eigen::MatrixXd chol,
            Eigen::VectorXd alpha, double log_marginal_likelihood, PartsFn parts, KernelForm form);

    const GPHyper& hyper() const noexcept { return hyper_; }
    double sigma2() const noexcept { return hyper_.sigma2; }
    double ell() const noexcept { return hyper_.ell; }
    double noise() const noexcept { return hyper_.noise; }
    double jitter() const noexcept { return jitter_; }
    double prior_mean() const noexcept { return prior_mean_; }
    double log_marginal_likelihood() const noexcept { return lml_; }
    KernelForm kernel_form() const noexcept { return form_; }
    const std::vector<Observation>& observations() const noexcept { return data_; }
    /// Lower Cholesky factor of K + (noise + jitter) I.
    const Eigen::MatrixXd& cholesky() const noexcept { return chol_; }

    GPPosterior posterior(const TransferConfig& x) const;

private:
    std::vector<Observation> data_;
    GPHyper hyper_;
    double prior_mean_;
    double jitter_;
    Eigen::MatrixXd chol_;
    Eigen::VectorXd alpha_;
    double lml_;
    PartsFn parts_;
    KernelForm form_;
};

struct CholeskyResult {
    Eigen::MatrixXd lower;
    double jitter = 0.0;
};

/// Factorizes k + jitter*I, starting at `start` and multiplying by 10 up to
/// `max_jitter`. Returns nullopt if every attempt fails.
std::optional<CholeskyResult> jittered_cholesky(const Eigen::MatrixXd& k, double start = 1e-10,
                                                double max_jitter = 1e-4);

/// Picks the grid point with the highest log marginal likelihood.
/// Throws InsufficientDataError below two observations and NumericalError
/// if no grid point can be factorized.
GPModel gp_fit(const std::vector<Observation>& observations, const HyperGrid& grid, PartsFn parts,
               KernelForm form = KernelForm::product);

HyperGrid default_hyper_grid(const std::vector<Observation>& observations, const PartsFn& parts);

GPPosterior gp_posterior(const GPModel& model, const TransferConfig& x);

}  // namespace cotkit
