#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cotkit {

double mean(std::span<const double> xs);

enum class StdMode { population, sample };
double standard_deviation(std::span<const double> xs, StdMode mode = StdMode::population);

/// Linear interpolation between order statistics (h = (n-1) q).
double quantile(std::vector<double> xs, double q);

/// I_x(a, b) by continued fraction. Absolute accuracy about 1e-12 for
/// moderate a, b.
double regularized_incomplete_beta(double a, double b, double x);

double student_t_cdf(double t, double df);
/// P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);

double bonferroni(double p, std::size_t m);

struct TTestResult {
    double t = 0.0;
    double p_raw = 1.0;
    double p_bonferroni = 1.0;
    double cohens_d = 0.0;
    std::size_t n = 0;
    /// Zero spread in the differences. t, d are then 0 and p is 1.
    bool degenerate = false;
};

/// One-sample t-test on paired differences, sample sd (n-1).
TTestResult paired_t_test(std::span<const double> differences, std::size_t m_comparisons = 1);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double v) const noexcept { return lo <= v && v <= hi; }
    double width() const noexcept { return hi - lo; }
};

using Statistic = std::function<double(std::span<const double>)>;

/// Seed for resample i; independent of evaluation order.
std::uint64_t resample_seed(std::uint64_t seed, std::size_t i);

/// Percentile bootstrap interval.
Interval bootstrap_ci(std::span<const double> samples, const Statistic& statistic, std::size_t n_resamples = 1000,
                      double level = 0.95, std::uint64_t seed = 0);

}  // namespace cotkit
