#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include <cotkit/corpus.hpp>
#include <cotkit/errors.hpp>
#include <cotkit/scorer.hpp>

#include "test_support.hpp"

using namespace cotkit;

namespace {

Segment segment_from(const std::string& text, const SegmentParams& p = {}) {
    auto segs = segment_text(text, Tokenizer::approximate(), [&] {
        auto q = p;
        q.min_segment_tokens = 100000;
        q.markers.conclusion_openers.clear();
        return q;
    }());
    REQUIRE(segs.size() >= 1);
    auto s = segs.front();
    s.text = text;
    s.token_count = Tokenizer::approximate().count(text);
    s.markers = p.markers.occurrences(text);
    s.entities = extract_entities(text, p.lexicon);
    return s;
}

// Solves (I - d * M) x = (1 - d) * base by Gaussian elimination with partial
// pivoting, where M[i][j] = 1/|succ(j)| for every edge j -> i.
std::vector<double> linear_oracle(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                  const std::vector<double>& base, double d) {
    std::vector<std::size_t> out_deg(n, 0);
    for (auto [a, b] : edges) ++out_deg[a];
    std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        a[i][i] = 1.0;
        a[i][n] = (1.0 - d) * base[i];
    }
    for (auto [from, to] : edges) a[to][from] -= d / static_cast<double>(out_deg[from]);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        std::swap(a[c], a[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k <= n; ++k) a[r][k] -= f * a[c][k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = a[i][n] / a[i][i];
    return x;
}

// Plain power iteration, dense and synchronous, 2000 sweeps.
std::vector<double> power_oracle(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                 double d) {
    std::vector<std::size_t> out_deg(n, 0);
    for (auto [a, b] : edges) ++out_deg[a];
    std::vector<double> x(n, 1.0);
    for (int it = 0; it < 2000; ++it) {
        std::vector<double> y(n, 1.0 - d);
        for (auto [from, to] : edges) y[to] += d * x[from] / static_cast<double>(out_deg[from]);
        x = y;
    }
    return x;
}

}  // namespace

TEST_CASE("importance weights") {
    const ImportanceWeights w;
    CHECK(w.depth() == 0.3);
    CHECK(w.knowledge() == 0.2);
    CHECK(w.connectivity() == 0.25);
    CHECK(w.conclusion() == 0.25);
    CHECK_THROWS_AS(ImportanceWeights(0.5, 0.5, 0.5, 0.5), ValidationError);
    CHECK_THROWS_AS(ImportanceWeights(-0.1, 0.6, 0.25, 0.25), ValidationError);
    CHECK_NOTHROW(ImportanceWeights(0.25, 0.25, 0.25, 0.25));
}

TEST_CASE("composite importance") {
    const ImportanceWeights w;
    CHECK(composite_importance(1, 0, 0, 0, w) == 0.3);
    CHECK(composite_importance(1, 1, 1, 1, w) == 1.0);
    CHECK(composite_importance(0, 0, 0, 0, w) == 0.0);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 1000; ++i) {
        const double d = u(rng), k = u(rng), l = u(rng), c = u(rng), bump = u(rng) * (1 - d);
        const double v = composite_importance(d, k, l, c, w);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(composite_importance(d + bump, k, l, c, w) >= v);
    }
}

TEST_CASE("depth score") {
    CHECK(depth_score(segment_from("Nothing to see here.")) == 0.0);
    CHECK(depth_score(segment_from("Because X is low, therefore Y follows.")) == 0.5);
    CHECK(depth_score(segment_from("Because a, so b, thus c, hence d, therefore e.")) == 1.0);
}

TEST_CASE("knowledge density") {
    SegmentParams p;
    p.lexicon = Lexicon({"anemia"});
    const auto tok = Tokenizer::approximate();
    const auto none = segment_from("one two three four five six seven eight nine ten", p);
    CHECK(knowledge_density(none, p.lexicon, tok) == 0.0);
    const auto one = segment_from("one two three four anemia six seven eight nine ten", p);
    CHECK(knowledge_density(one, p.lexicon, tok) == doctest::Approx(0.4).epsilon(1e-12));
    const auto all = segment_from("anemia anemia", p);
    CHECK(knowledge_density(all, p.lexicon, tok) == 1.0);
}

TEST_CASE("connectivity score") {
    DependencyGraph empty(3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(connectivity_score(i, empty) == 0.0);
    DependencyGraph star(5);
    for (std::size_t i = 1; i < 5; ++i) star.add_edge(0, i, EdgeKind::entity_ref);
    CHECK(connectivity_score(0, star) == 1.0);
    for (std::size_t i = 1; i < 5; ++i) CHECK(connectivity_score(i, star) == 0.25);
    DependencyGraph pair(2);
    pair.add_edge(0, 1, EdgeKind::chain);
    CHECK(connectivity_score(0, pair) == 1.0);
    CHECK(connectivity_score(1, pair) == 1.0);
}

TEST_CASE("conclusion relevance") {
    std::vector<Segment> segs(4);
    for (std::size_t i = 0; i < 4; ++i) segs[i].index = i;
    segs[3].is_conclusion = true;
    segs[3].entities = {"x", "y"};
    CHECK(conclusion_relevance(segs[3], segs) == 1.0);
    CHECK(conclusion_relevance(segs[0], segs) == 0.125);
    segs[2].entities = {"x", "y", "z"};
    CHECK(conclusion_relevance(segs[2], segs) == doctest::Approx(0.875));

    // the >= 0.9 bound at position n-1 needs n >= 5
    std::vector<Segment> ten(10);
    for (std::size_t i = 0; i < 10; ++i) ten[i].index = i;
    ten[9].is_conclusion = true;
    ten[9].entities = {"x", "y"};
    ten[8].entities = {"x", "y"};
    CHECK(conclusion_relevance(ten[8], ten) >= 0.9);
    CHECK(conclusion_relevance(ten[8], ten) == doctest::Approx(0.95));
}

TEST_CASE("propagation examples") {
    const std::vector<double> one{1.0};
    const auto single = propagate_importance(DependencyGraph(1), one);
    REQUIRE(single.scores.size() == 1);
    CHECK(single.scores[0] == 0.15);

    DependencyGraph cycle(2);
    cycle.add_edge_unchecked(0, 1, EdgeKind::chain);
    cycle.add_edge_unchecked(1, 0, EdgeKind::chain);
    const std::vector<double> ones{1.0, 1.0};
    const auto c = propagate_importance(cycle, ones, 0.85, 1e-12, 1000);
    CHECK(c.scores[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(c.scores[1] == doctest::Approx(1.0).epsilon(1e-9));

    DependencyGraph chain(2);
    chain.add_edge(0, 1, EdgeKind::chain);
    const auto ch = propagate_importance(chain, ones);
    CHECK(ch.scores[0] == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(ch.scores[1] == doctest::Approx(0.2775).epsilon(1e-12));

    const auto norm = normalize_scores(ch.scores);
    CHECK(norm[0] == doctest::Approx(0.15 / 0.2775).epsilon(1e-12));
    CHECK(norm[1] == 1.0);
    CHECK(normalize_scores(single.scores)[0] == 1.0);
    const std::vector<double> zeros{0.0, 0.0};
    CHECK(normalize_scores(zeros) == zeros);
}

TEST_CASE("propagation matches power iteration and a linear solve on random DAGs") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto start = std::chrono::steady_clock::now();
    double worst_uniform = 0.0, worst_personal = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 10;
        DependencyGraph g(n);
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (u(rng) < 0.35) {
                    g.add_edge(i, j, EdgeKind::entity_ref);
                    edges.emplace_back(i, j);
                }
        const std::vector<double> uniform(n, 1.0);
        const auto got = propagate_importance(g, uniform);
        const auto want = power_oracle(n, edges, 0.85);
        for (std::size_t i = 0; i < n; ++i) worst_uniform = std::max(worst_uniform, std::abs(got.scores[i] - want[i]));

        std::vector<double> base(n);
        for (auto& b : base) b = u(rng);
        const auto got_p = propagate_importance(g, base);
        const auto want_p = linear_oracle(n, edges, base, 0.85);
        for (std::size_t i = 0; i < n; ++i)
            worst_personal = std::max(worst_personal, std::abs(got_p.scores[i] - want_p[i]));

        for (std::size_t k = 2; k < got_p.l1_residuals.size(); ++k)
            CHECK(got_p.l1_residuals[k] <= got_p.l1_residuals[k - 1] * (1 + 1e-12) + 1e-15);

        // scale equivariance
        std::vector<double> scaled(base);
        for (auto& b : scaled) b *= 3.5;
        const auto s = propagate_importance(g, scaled);
        for (std::size_t i = 0; i < n; ++i) CHECK(s.scores[i] == doctest::Approx(3.5 * got_p.scores[i]).epsilon(1e-8));
        const auto na = normalize_scores(s.scores), nb = normalize_scores(got_p.scores);
        for (std::size_t i = 0; i < n; ++i) CHECK(na[i] == doctest::Approx(nb[i]).epsilon(1e-8));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    MESSAGE("max |diff| uniform " << worst_uniform << ", personalised " << worst_personal << ", " << secs << " s");
    CHECK(worst_uniform <= 1e-6);
    CHECK(worst_personal <= 1e-6);
    CHECK(secs < 1.0);
}

TEST_CASE("non-convergence reports the residual") {
    DependencyGraph cycle(2);
    cycle.add_edge_unchecked(0, 1, EdgeKind::chain);
    cycle.add_edge_unchecked(1, 0, EdgeKind::chain);
    const std::vector<double> base{1.0, 0.0};
    try {
        propagate_importance(cycle, base, 0.85, 1e-15, 3);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.residual() > 1e-15);
    }
}

TEST_CASE("scores on fixture traces stay in range") {
    const auto tok = Tokenizer::approximate();
    SegmentParams p;
    p.lexicon = Lexicon::load(testing::fixture("lexicon.txt"));
    for (const auto& t : load_traces(testing::fixture("traces.jsonl"), tok)) {
        const auto segs = segment_trace(t, tok, p);
        const auto g = build_dependency_graph(segs);
        const auto scores = score_segments(segs, g, p.lexicon, tok);
        double top = 0.0;
        for (const auto& s : scores) {
            for (double v : {s.depth, s.knowledge, s.connectivity, s.conclusion, s.composite, s.normalized}) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
            CHECK(s.propagated >= 0.0);
            top = std::max(top, s.normalized);
        }
        CHECK(top == 1.0);
        CHECK(scores.back().conclusion == 1.0);
    }
}

TEST_CASE("scorer config file") {
    testing::TempDir dir("scorer");
    testing::write_file(dir / "s.json", R"({"weights": [0.25, 0.25, 0.25, 0.25], "damping": 0.5})");
    const auto p = load_scorer_params(dir / "s.json");
    CHECK(p.weights.depth() == 0.25);
    CHECK(p.damping == 0.5);
    testing::write_file(dir / "bad.json", R"({"weights": [0.9, 0.25, 0.25, 0.25]})");
    CHECK_THROWS_AS(load_scorer_params(dir / "bad.json"), ValidationError);
}
