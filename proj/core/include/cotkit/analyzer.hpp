#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cotkit/corpus.hpp"
#include "cotkit/stats.hpp"
#include "cotkit/transfer_config.hpp"

namespace cotkit {

/// Aggregate over one (config, specialty) cell of an evaluation run.
struct EvalRecord {
    TransferConfig config;
    std::string specialty;
    std::size_t n_questions = 0;
    std::size_t n_correct = 0;
    std::size_t n_failed = 0;     // requests that never produced a reply
    std::size_t n_unparsed = 0;   // replies without an A-E letter
    double accuracy = 0.0;
    double mean_prompt_tokens = 0.0;
    double mean_compressed_tokens = 0.0;
    double mean_compression_ratio = 1.0;
    double mean_entity_retention = 1.0;
    double completeness = 1.0;
    bool partial = false;
    std::optional<double> mean_latency;

    void validate() const;
};

std::string to_json_line(const EvalRecord& r);
EvalRecord eval_record_from_json_line(const std::string& line);
std::vector<EvalRecord> load_eval_records(const std::filesystem::path& path);
std::vector<EvalRecord> parse_eval_records(std::istream& in);

double token_efficiency(double accuracy, std::size_t budget);
double compression_ratio(std::size_t original_tokens, std::size_t compressed_tokens);

double coefficient_of_variation(std::span<const double> accuracies, StdMode mode = StdMode::population);

struct RobustnessSummary {
    double worst_case = 0.0;
    double range = 0.0;
    double cv = 0.0;
};
RobustnessSummary robustness_summary(std::span<const double> accuracies, StdMode mode = StdMode::population);

struct AccCv {
    double acc = 0.0;
    double cv = 0.0;
};

/// Indices of points no other point beats on both axes (strictly higher
/// accuracy and strictly lower CV), ordered by ascending accuracy.
std::vector<std::size_t> pareto_frontier(std::span<const AccCv> points);

struct PowerLawFit {
    double alpha = 0.0;
    double beta = 0.0;
    Interval alpha_ci;
    Interval beta_ci;
    double r_squared = 0.0;
    std::size_t n_points = 0;
    std::size_t excluded = 0;  // points with acc <= 0 or cv <= 0
    bool pareto_only = true;

    double predict(double acc) const;
};

struct PowerLawOptions {
    bool pareto_only = true;
    std::size_t bootstrap_n = 1000;
    double level = 0.95;
    std::uint64_t seed = 0;
};

/// OLS of log(cv) on log(acc); cv = alpha * acc^beta.
PowerLawFit fit_power_law(std::span<const AccCv> points, const PowerLawOptions& options = {});

struct CurveSample {
    double acc = 0.0;
    double cv = 0.0;
    std::size_t count = 0;
};

/// Per accuracy bin (equal width over the observed range), the q-quantile of CV.
std::vector<CurveSample> typical_curve(std::span<const AccCv> points, double q = 0.75, std::size_t bins = 10);

enum class TransferKind { intra_A, intra_B, cross_AB, cross_BA };
std::string to_string(TransferKind k);
/// Family A is the registry's first family, B the second.
TransferKind transfer_kind(const ModelRegistry& registry, const std::string& thinking, const std::string& answering);

struct TradeoffPoint {
    TransferConfig config;
    double mean_acc = 0.0;           // uniform over specialties
    double mean_acc_weighted = 0.0;  // weighted by question counts
    std::optional<double> cv;        // absent with < 2 specialties or zero mean
    double worst_case = 0.0;
    double range = 0.0;
    std::uint64_t total_params = 0;
    TransferKind kind = TransferKind::intra_A;
    std::size_t n_specialties = 0;
    bool partial = false;
    bool on_frontier = false;
};

/// One point per config, in config order. Frontier flags are filled.
std::vector<TradeoffPoint> tradeoff_points(std::span<const EvalRecord> records, const ModelRegistry& registry,
                                           StdMode mode = StdMode::population);

void write_tradeoff_csv(std::ostream& out, std::span<const TradeoffPoint> points);
void write_powerlaw_json(std::ostream& out, const PowerLawFit& fit, const PowerLawOptions& options);
/// powerlaw.json when no fit was possible; same keys, null values.
void write_powerlaw_unavailable(std::ostream& out, const std::string& reason);
void write_curves_csv(std::ostream& out, std::span<const TradeoffPoint> points,
                      std::span<const CurveSample> typical);

struct StrategyComparison {
    std::size_t budget = 0;
    double summarization_accuracy = 0.0;
    double truncation_accuracy = 0.0;
    double summarization_retention = 0.0;
    double truncation_retention = 0.0;
    std::optional<TTestResult> test;  // paired over matching (models, specialty) cells
};

/// Summarization against truncation per budget, pairing records that share
/// models and specialty. Bonferroni m = number of budgets compared.
std::vector<StrategyComparison> compare_strategies(std::span<const EvalRecord> records);

}  // namespace cotkit
