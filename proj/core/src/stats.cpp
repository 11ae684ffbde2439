#include "cotkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cotkit/errors.hpp"

namespace cotkit {

namespace {

// Extended-precision mean with one correction pass.
long double mean_ext(std::span<const double> xs) {
    long double s = 0.0L;
    for (double x : xs) s += x;
    const long double n = static_cast<long double>(xs.size());
    const long double m = s / n;
    long double r = 0.0L;
    for (double x : xs) r += x - m;
    return m + r / n;
}

}  // namespace

double mean(std::span<const double> xs) {
    if (xs.empty()) throw InsufficientDataError("mean of an empty sample");
    return static_cast<double>(mean_ext(xs));
}

double standard_deviation(std::span<const double> xs, StdMode mode) {
    const std::size_t dof = mode == StdMode::sample ? 1 : 0;
    if (xs.size() <= dof) throw InsufficientDataError("not enough values for a standard deviation");
    const long double m = mean_ext(xs);
    long double ss = 0.0L;
    for (double x : xs) ss += (x - m) * (x - m);
    return static_cast<double>(std::sqrt(ss / static_cast<long double>(xs.size() - dof)));
}

double quantile(std::vector<double> xs, double q) {
    if (xs.empty()) throw InsufficientDataError("quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("quantile level must lie in [0,1]");
    std::sort(xs.begin(), xs.end());
    const double h = static_cast<double>(xs.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a,b).
double beta_cf(double a, double b, double x) {
    constexpr int max_iter = 500;
    constexpr double eps = 1e-16;
    constexpr double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) return h;
    }
    throw ConvergenceError("incomplete beta continued fraction did not converge", std::abs(h));
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw ValidationError("incomplete beta needs positive shape parameters");
    if (!(x >= 0.0 && x <= 1.0)) throw ValidationError("incomplete beta argument must lie in [0,1]");
    if (x == 0.0 || x == 1.0) return x;
    const double ln_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) throw ValidationError("degrees of freedom must be positive");
    if (std::isinf(t)) return 0.0;
    const double x = df / (df + t * t);
    return regularized_incomplete_beta(0.5 * df, 0.5, x);
}

double student_t_cdf(double t, double df) {
    const double tail = 0.5 * student_t_two_sided_p(t, df);
    return t > 0.0 ? 1.0 - tail : tail;
}

double bonferroni(double p, std::size_t m) {
    if (m == 0) throw ValidationError("number of comparisons must be at least 1");
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p-value must lie in [0,1]");
    return std::min(1.0, static_cast<double>(m) * p);
}

TTestResult paired_t_test(std::span<const double> diff, std::size_t m) {
    if (diff.size() < 2) throw InsufficientDataError("paired t-test needs at least two differences");
    if (m == 0) throw ValidationError("number of comparisons must be at least 1");
    TTestResult r;
    r.n = diff.size();
    const long double mu = mean_ext(diff);
    long double ss = 0.0L;
    for (double x : diff) ss += (x - mu) * (x - mu);
    const long double sd = std::sqrt(ss / static_cast<long double>(r.n - 1));
    if (sd <= 1e-15L * std::max(1.0L, std::abs(mu))) {
        r.degenerate = true;
        return r;
    }
    r.t = static_cast<double>(mu / (sd / std::sqrt(static_cast<long double>(r.n))));
    r.p_raw = student_t_two_sided_p(r.t, static_cast<double>(r.n - 1));
    r.p_bonferroni = bonferroni(r.p_raw, m);
    r.cohens_d = static_cast<double>(mu / sd);
    return r;
}

std::uint64_t resample_seed(std::uint64_t seed, std::size_t i) {
    // splitmix64 finalizer over (seed, i)
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(i) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Interval bootstrap_ci(std::span<const double> samples, const Statistic& statistic, std::size_t n_resamples,
                      double level, std::uint64_t seed) {
    if (samples.empty()) throw InsufficientDataError("bootstrap needs at least one sample");
    if (n_resamples == 0) throw ValidationError("bootstrap needs at least one resample");
    if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence level must lie in (0,1)");
    std::vector<double> stats(n_resamples);
    std::vector<double> buf(samples.size());
    for (std::size_t i = 0; i < n_resamples; ++i) {
        std::mt19937_64 rng(resample_seed(seed, i));
        std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
        for (auto& v : buf) v = samples[pick(rng)];
        stats[i] = statistic(buf);
    }
    const double tail = (1.0 - level) / 2.0;
    return {quantile(stats, tail), quantile(stats, 1.0 - tail)};
}

}  // namespace cotkit
