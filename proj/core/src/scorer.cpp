#include "cotkit/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "cotkit/errors.hpp"

namespace cotkit {

ImportanceWeights::ImportanceWeights() : ImportanceWeights(0.3, 0.2, 0.25, 0.25) {}

ImportanceWeights::ImportanceWeights(double depth, double knowledge, double connectivity,
                                     double conclusion)
    : depth_(depth), knowledge_(knowledge), connectivity_(connectivity), conclusion_(conclusion) {
    for (double w : {depth, knowledge, connectivity, conclusion}) {
        if (!(w >= 0.0 && w <= 1.0)) throw ValidationError("importance weights must lie in [0,1]");
    }
    const double sum = depth + knowledge + connectivity + conclusion;
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("importance weights must sum to 1");
}

ScorerParams load_scorer_params(const std::filesystem::path& path, ScorerParams base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read scorer config " + path.string());
    try {
        const auto j = nlohmann::json::parse(in);
        if (j.contains("weights")) {
            const auto w = j.at("weights").get<std::vector<double>>();
            if (w.size() != 4) throw ConfigError("\"weights\" must hold four numbers");
            base.weights = ImportanceWeights(w[0], w[1], w[2], w[3]);
        }
        if (j.contains("depth_marker_cap")) base.depth_marker_cap = j.at("depth_marker_cap").get<double>();
        if (j.contains("density_scale")) base.density_scale = j.at("density_scale").get<double>();
        if (j.contains("damping")) base.damping = j.at("damping").get<double>();
        if (j.contains("tolerance")) base.tolerance = j.at("tolerance").get<double>();
        if (j.contains("max_iterations")) base.max_iterations = j.at("max_iterations").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid scorer config " + path.string() + ": " + e.what());
    }
    if (!(base.damping > 0.0 && base.damping < 1.0)) throw ConfigError("damping must lie in (0,1)");
    if (!(base.depth_marker_cap > 0.0) || !(base.density_scale > 0.0))
        throw ConfigError("saturation constants must be positive");
    return base;
}

double depth_score(const Segment& segment, double marker_cap) {
    return std::min(1.0, static_cast<double>(segment.markers.size()) / marker_cap);
}

double knowledge_density(const Segment& segment, const Lexicon& lexicon, const Tokenizer& tokenizer,
                         double scale) {
    if (segment.token_count == 0) return 0.0;
    std::size_t hits = 0;
    for (const auto& m : lexicon.matches(segment.text))
        hits += tokenizer.count(std::string_view(segment.text).substr(m.span.begin, m.span.size()));
    return std::min(1.0, static_cast<double>(hits) / static_cast<double>(segment.token_count) * scale);
}

double connectivity_score(std::size_t index, const DependencyGraph& graph) {
    std::size_t max_degree = 0;
    for (std::size_t i = 0; i < graph.node_count(); ++i) max_degree = std::max(max_degree, graph.degree(i));
    if (max_degree == 0) return 0.0;
    return static_cast<double>(graph.degree(index)) / static_cast<double>(max_degree);
}

double conclusion_relevance(const Segment& segment, const std::vector<Segment>& segments) {
    if (segment.is_conclusion) return 1.0;
    const auto conclusion = std::find_if(segments.begin(), segments.end(),
                                         [](const Segment& s) { return s.is_conclusion; });
    const double n = static_cast<double>(segments.size());
    const double positional = (static_cast<double>(segment.index) + 1.0) / n;
    double lexical = 0.0;
    if (conclusion != segments.end()) {
        std::size_t shared = 0;
        for (const auto& e : segment.entities) shared += conclusion->entities.count(e);
        lexical = static_cast<double>(shared) /
                  static_cast<double>(std::max<std::size_t>(1, conclusion->entities.size()));
    }
    return 0.5 * positional + 0.5 * lexical;
}

double composite_importance(double depth, double knowledge, double connectivity, double conclusion,
                            const ImportanceWeights& w) {
    return w.depth() * depth + w.knowledge() * knowledge + w.connectivity() * connectivity +
           w.conclusion() * conclusion;
}

namespace {

// 1 - d rounded to 15 significant digits: 1 - 0.85 gives 0.15, not 0.15000000000000002.
double decimal_complement(double d) {
    const double c = 1.0 - d;
    const double scale = std::pow(10.0, 14.0 - std::floor(std::log10(c)));
    return std::round(c * scale) / scale;
}

}  // namespace

PropagationResult propagate_importance(const DependencyGraph& graph, std::span<const double> base,
                                       double damping, double tolerance, std::size_t max_iterations) {
    const std::size_t n = graph.node_count();
    if (base.size() != n) throw ValidationError("base scores are not aligned with the graph");
    if (!(damping > 0.0 && damping < 1.0)) throw ValidationError("damping must lie in (0,1)");

    const double teleport = decimal_complement(damping);
    PropagationResult result;
    std::vector<double> current(base.begin(), base.end());
    std::vector<double> next(n);
    for (std::size_t it = 1; it <= max_iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double inflow = 0.0;
            for (auto j : graph.preds(i))
                inflow += current[j] / static_cast<double>(graph.succs(j).size());
            next[i] = teleport * base[i] + damping * inflow;
        }
        double linf = 0.0, l1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double delta = std::abs(next[i] - current[i]);
            linf = std::max(linf, delta);
            l1 += delta;
        }
        current.swap(next);
        result.iterations = it;
        result.l1_residuals.push_back(l1);
        result.final_residual = linf;
        if (linf <= tolerance) {
            result.scores = std::move(current);
            return result;
        }
    }
    throw ConvergenceError("importance propagation did not converge", result.final_residual);
}

std::vector<double> normalize_scores(std::span<const double> raw) {
    std::vector<double> out(raw.begin(), raw.end());
    double max = 0.0;
    for (double v : raw) max = std::max(max, v);
    if (max <= 0.0) {
        std::fill(out.begin(), out.end(), 0.0);
        return out;
    }
    for (auto& v : out) v = std::clamp(v / max, 0.0, 1.0);
    return out;
}

ScoreVector score_segments(const std::vector<Segment>& segments, const DependencyGraph& graph,
                           const Lexicon& lexicon, const Tokenizer& tokenizer,
                           const ScorerParams& params) {
    ScoreVector scores(segments.size());
    std::vector<double> base(segments.size());
    for (std::size_t i = 0; i < segments.size(); ++i) {
        auto& s = scores[i];
        s.depth = depth_score(segments[i], params.depth_marker_cap);
        s.knowledge = knowledge_density(segments[i], lexicon, tokenizer, params.density_scale);
        s.connectivity = connectivity_score(i, graph);
        s.conclusion = conclusion_relevance(segments[i], segments);
        s.composite = composite_importance(s.depth, s.knowledge, s.connectivity, s.conclusion,
                                           params.weights);
        base[i] = s.composite;
    }
    const auto propagated = propagate_importance(graph, base, params.damping, params.tolerance,
                                                 params.max_iterations);
    const auto normalized = normalize_scores(propagated.scores);
    for (std::size_t i = 0; i < segments.size(); ++i) {
        scores[i].propagated = propagated.scores[i];
        scores[i].normalized = normalized[i];
    }
    return scores;
}

std::string scores_to_json(const ScoreVector& scores) {
    auto arr = nlohmann::json::array();
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const auto& s = scores[i];
        arr.push_back({{"index", i},
                       {"depth", s.depth},
                       {"knowledge", s.knowledge},
                       {"connectivity", s.connectivity},
                       {"conclusion", s.conclusion},
                       {"composite", s.composite},
                       {"propagated", s.propagated},
                       {"normalized", s.normalized}});
    }
    return arr.dump();
}

}  // namespace cotkit
