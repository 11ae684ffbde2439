#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cotkit/lexicon.hpp"
#include "cotkit/segmenter.hpp"
#include "cotkit/tokenizer.hpp"

namespace cotkit {

/// Weights of depth, knowledge density, connectivity and conclusion relevance.
class ImportanceWeights {
public:
    /// Defaults: depth 0.3, knowledge 0.2, connectivity 0.25, conclusion 0.25.
    ImportanceWeights();
    /// Throws ValidationError unless each weight is in [0,1] and they sum to 1.
    ImportanceWeights(double depth, double knowledge, double connectivity, double conclusion);

    double depth() const noexcept { return depth_; }
    double knowledge() const noexcept { return knowledge_; }
    double connectivity() const noexcept { return connectivity_; }
    double conclusion() const noexcept { return conclusion_; }

private:
    double depth_;
    double knowledge_;
    double connectivity_;
    double conclusion_;
};

/// Knobs of the scoring pipeline. The saturation constants spread typical
/// segments over [0,1]: depth saturates at `depth_marker_cap` markers and
/// knowledge density at 1/`density_scale` of tokens being lexicon terms.
struct ScorerParams {
    ImportanceWeights weights;
    double depth_marker_cap = 4.0;
    double density_scale = 4.0;
    double damping = 0.85;
    double tolerance = 1e-9;
    std::size_t max_iterations = 200;
};

/// Reads a JSON object with optional "weights" (array of 4), "depth_marker_cap",
/// "density_scale", "damping", "tolerance" and "max_iterations".
ScorerParams load_scorer_params(const std::filesystem::path& path, ScorerParams base = {});

struct SegmentScore {
    double depth = 0.0;
    double knowledge = 0.0;
    double connectivity = 0.0;
    double conclusion = 0.0;
    double composite = 0.0;
    double propagated = 0.0;
    double normalized = 0.0;
};

using ScoreVector = std::vector<SegmentScore>;

double depth_score(const Segment& segment, double marker_cap = 4.0);
double knowledge_density(const Segment& segment, const Lexicon& lexicon, const Tokenizer& tokenizer,
                         double scale = 4.0);
double connectivity_score(std::size_t index, const DependencyGraph& graph);
double conclusion_relevance(const Segment& segment, const std::vector<Segment>& segments);
double composite_importance(double depth, double knowledge, double connectivity, double conclusion,
                            const ImportanceWeights& weights);

struct PropagationResult {
    std::vector<double> scores;
    std::size_t iterations = 0;
    /// L1 norm of the update at each sweep. This is the norm in which the
    /// iteration map contracts, so the sequence is non-increasing.
    std::vector<double> l1_residuals;
    double final_residual = 0.0;  // L-infinity, compared with the tolerance
};

/// Personalised propagation over the dependency graph:
///   I'(i) = (1-d) * base(i) + d * sum_{j in pred(i)} I'(j) / |succ(j)|
/// iterated from `base` until the L-infinity update is at most `tolerance`.
/// Throws ConvergenceError (carrying the last residual) after `max_iterations`.
PropagationResult propagate_importance(const DependencyGraph& graph, std::span<const double> base,
                                       double damping = 0.85, double tolerance = 1e-9,
                                       std::size_t max_iterations = 200);

/// Divides by the maximum; an all-zero input stays all-zero.
std::vector<double> normalize_scores(std::span<const double> raw);

/// Runs every scoring stage for one segmented trace.
ScoreVector score_segments(const std::vector<Segment>& segments, const DependencyGraph& graph,
                           const Lexicon& lexicon, const Tokenizer& tokenizer,
                           const ScorerParams& params = {});

/// JSON array with one object per segment, for audits.
std::string scores_to_json(const ScoreVector& scores);

}  // namespace cotkit
