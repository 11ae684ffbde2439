#include "cotkit/analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <ostream>
#include <tuple>

#include <fmt/format.h>
#include <json.hpp>

#include "config_json.hpp"
#include "cotkit/errors.hpp"

namespace cotkit {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

// Enough digits to round-trip, no trailing noise for simple values.
std::string num(double v) {
    if (!std::isfinite(v)) return "";
    return fmt::format("{}", v);
}

struct Ols {
    double intercept = 0.0;
    double slope = 0.0;
    double r_squared = 0.0;
};

std::optional<Ols> ols(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) return std::nullopt;
    Ols r;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    r.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return r;
}

}  // namespace

void EvalRecord::validate() const {
    if (n_questions == 0) throw ValidationError("eval record has no questions");
    if (!(accuracy >= 0.0 && accuracy <= 1.0)) throw ValidationError("accuracy must lie in [0,1]");
    if (n_correct > n_questions) throw ValidationError("more correct answers than questions");
    if (config.budget == 0) throw ValidationError("eval record budget must be positive");
}

std::string to_json_line(const EvalRecord& r) {
    json j{{"schema_version", kSchemaVersion},
           {"config", detail::config_to_json(r.config)},
           {"specialty", r.specialty},
           {"n_questions", r.n_questions},
           {"n_correct", r.n_correct},
           {"n_failed", r.n_failed},
           {"n_unparsed", r.n_unparsed},
           {"accuracy", r.accuracy},
           {"mean_prompt_tokens", r.mean_prompt_tokens},
           {"mean_compressed_tokens", r.mean_compressed_tokens},
           {"mean_compression_ratio", r.mean_compression_ratio},
           {"mean_entity_retention", r.mean_entity_retention},
           {"completeness", r.completeness},
           {"partial", r.partial}};
    if (r.mean_latency) j["mean_latency"] = *r.mean_latency;
    return j.dump();
}

EvalRecord eval_record_from_json_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ValidationError(e.what());
    }
    if (!j.is_object()) throw ValidationError("eval record is not a JSON object");
    EvalRecord r;
    try {
        if (j.at("schema_version").get<int>() != kSchemaVersion)
            throw ValidationError("unsupported eval record schema_version");
        r.config = detail::config_from_json(j.at("config"));
        r.specialty = j.at("specialty").get<std::string>();
        r.n_questions = j.at("n_questions").get<std::size_t>();
        r.n_correct = j.at("n_correct").get<std::size_t>();
        r.n_failed = j.value("n_failed", std::size_t{0});
        r.n_unparsed = j.value("n_unparsed", std::size_t{0});
        r.accuracy = j.at("accuracy").get<double>();
        r.mean_prompt_tokens = j.value("mean_prompt_tokens", 0.0);
        r.mean_compressed_tokens = j.value("mean_compressed_tokens", 0.0);
        r.mean_compression_ratio = j.value("mean_compression_ratio", 1.0);
        r.mean_entity_retention = j.value("mean_entity_retention", 1.0);
        r.completeness = j.value("completeness", 1.0);
        r.partial = j.value("partial", false);
        if (j.contains("mean_latency")) r.mean_latency = j.at("mean_latency").get<double>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed eval record: ") + e.what());
    }
    r.validate();
    return r;
}

std::vector<EvalRecord> parse_eval_records(std::istream& in) {
    std::vector<EvalRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(eval_record_from_json_line(line));
        } catch (const ValidationError& e) {
            throw ParseError(lineno, e.what());
        }
    }
    return out;
}

std::vector<EvalRecord> load_eval_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    return parse_eval_records(in);
}

double token_efficiency(double accuracy, std::size_t budget) {
    if (budget == 0) throw ValidationError("budget must be positive");
    if (!(accuracy >= 0.0 && accuracy <= 1.0)) throw ValidationError("accuracy must lie in [0,1]");
    return accuracy / static_cast<double>(budget);
}

double compression_ratio(std::size_t original_tokens, std::size_t compressed_tokens) {
    if (original_tokens == 0) throw ValidationError("original trace has no tokens");
    if (compressed_tokens > original_tokens)
        throw ValidationError("compressed trace is longer than the original");
    return static_cast<double>(compressed_tokens) / static_cast<double>(original_tokens);
}

double coefficient_of_variation(std::span<const double> acc, StdMode mode) {
    if (acc.size() < 2) throw InsufficientDataError("CV needs at least two specialties");
    const double m = mean(acc);
    if (!(m > 0.0)) throw ValidationError("CV is undefined for a non-positive mean");
    return standard_deviation(acc, mode) / m;
}

RobustnessSummary robustness_summary(std::span<const double> acc, StdMode mode) {
    if (acc.size() < 2) throw InsufficientDataError("robustness summary needs at least two specialties");
    const auto [lo, hi] = std::minmax_element(acc.begin(), acc.end());
    return {*lo, *hi - *lo, coefficient_of_variation(acc, mode)};
}

std::vector<std::size_t> pareto_frontier(std::span<const AccCv> pts) {
    std::vector<std::size_t> order(pts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return pts[a].acc > pts[b].acc; });

    std::vector<std::size_t> keep;
    double best_cv = std::numeric_limits<double>::infinity();  // over strictly higher accuracy
    for (std::size_t g = 0; g < order.size();) {
        std::size_t e = g;
        double group_min = std::numeric_limits<double>::infinity();
        while (e < order.size() && pts[order[e]].acc == pts[order[g]].acc) {
            group_min = std::min(group_min, pts[order[e]].cv);
            ++e;
        }
        for (std::size_t i = g; i < e; ++i)
            if (!(best_cv < pts[order[i]].cv)) keep.push_back(order[i]);
        best_cv = std::min(best_cv, group_min);
        g = e;
    }
    std::stable_sort(keep.begin(), keep.end(), [&](auto a, auto b) {
        return pts[a].acc < pts[b].acc || (pts[a].acc == pts[b].acc && a < b);
    });
    return keep;
}

double PowerLawFit::predict(double acc) const { return alpha * std::pow(acc, beta); }

PowerLawFit fit_power_law(std::span<const AccCv> points, const PowerLawOptions& opt) {
    PowerLawFit fit;
    fit.pareto_only = opt.pareto_only;
    std::vector<AccCv> usable;
    for (const auto& p : points) {
        if (p.acc > 0.0 && p.cv > 0.0 && std::isfinite(p.acc) && std::isfinite(p.cv))
            usable.push_back(p);
        else
            ++fit.excluded;
    }
    if (opt.pareto_only) {
        std::vector<AccCv> front;
        for (auto i : pareto_frontier(usable)) front.push_back(usable[i]);
        usable = std::move(front);
    }
    if (usable.size() < 3) throw InsufficientDataError("power-law fit needs at least three points with acc, cv > 0");

    std::vector<double> lx, ly;
    for (const auto& p : usable) {
        lx.push_back(std::log(p.acc));
        ly.push_back(std::log(p.cv));
    }
    const auto base = ols(lx, ly);
    if (!base) throw InsufficientDataError("power-law fit needs at least two distinct accuracies");
    fit.alpha = std::exp(base->intercept);
    fit.beta = base->slope;
    fit.r_squared = base->r_squared;
    fit.n_points = usable.size();

    if (opt.bootstrap_n == 0) {
        fit.alpha_ci = {fit.alpha, fit.alpha};
        fit.beta_ci = {fit.beta, fit.beta};
        return fit;
    }
    std::vector<double> alphas, betas;
    std::vector<double> bx(lx.size()), by(ly.size());
    for (std::size_t r = 0; r < opt.bootstrap_n; ++r) {
        std::mt19937_64 rng(resample_seed(opt.seed, r));
        std::uniform_int_distribution<std::size_t> pick(0, lx.size() - 1);
        for (std::size_t i = 0; i < lx.size(); ++i) {
            const auto k = pick(rng);
            bx[i] = lx[k];
            by[i] = ly[k];
        }
        if (const auto f = ols(bx, by)) {
            alphas.push_back(std::exp(f->intercept));
            betas.push_back(f->slope);
        }
    }
    if (alphas.empty()) {
        fit.alpha_ci = {fit.alpha, fit.alpha};
        fit.beta_ci = {fit.beta, fit.beta};
        return fit;
    }
    const double tail = (1.0 - opt.level) / 2.0;
    fit.alpha_ci = {quantile(alphas, tail), quantile(alphas, 1.0 - tail)};
    fit.beta_ci = {quantile(betas, tail), quantile(betas, 1.0 - tail)};
    // Percentile intervals can miss a skewed point estimate; stretch to cover it.
    fit.alpha_ci = {std::min(fit.alpha_ci.lo, fit.alpha), std::max(fit.alpha_ci.hi, fit.alpha)};
    fit.beta_ci = {std::min(fit.beta_ci.lo, fit.beta), std::max(fit.beta_ci.hi, fit.beta)};
    return fit;
}

std::vector<CurveSample> typical_curve(std::span<const AccCv> pts, double q, std::size_t bins) {
    if (bins == 0) throw ValidationError("typical curve needs at least one bin");
    if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("quantile level must lie in [0,1]");
    if (pts.empty()) return {};
    double lo = pts[0].acc, hi = pts[0].acc;
    for (const auto& p : pts) {
        lo = std::min(lo, p.acc);
        hi = std::max(hi, p.acc);
    }
    const double width = (hi - lo) / static_cast<double>(bins);
    std::vector<std::vector<const AccCv*>> bucket(bins);
    for (const auto& p : pts) {
        std::size_t b = 0;
        if (width > 0.0) b = std::min(bins - 1, static_cast<std::size_t>((p.acc - lo) / width));
        bucket[b].push_back(&p);
    }
    std::vector<CurveSample> out;
    for (const auto& b : bucket) {
        if (b.empty()) continue;
        double acc = 0.0;
        std::vector<double> cvs;
        for (const auto* p : b) {
            acc += p->acc;
            cvs.push_back(p->cv);
        }
        out.push_back({acc / static_cast<double>(b.size()), quantile(std::move(cvs), q), b.size()});
    }
    return out;
}

std::string to_string(TransferKind k) {
    switch (k) {
        case TransferKind::intra_A: return "intra_A";
        case TransferKind::intra_B: return "intra_B";
        case TransferKind::cross_AB: return "cross_AB";
        case TransferKind::cross_BA: return "cross_BA";
    }
    return "unknown";
}

TransferKind transfer_kind(const ModelRegistry& reg, const std::string& thinking, const std::string& answering) {
    const auto ft = reg.family_index(reg.at(thinking).family);
    const auto fa = reg.family_index(reg.at(answering).family);
    if (ft > 1 || fa > 1) throw ValidationError("transfer kinds cover two model families");
    if (ft == fa) return ft == 0 ? TransferKind::intra_A : TransferKind::intra_B;
    return ft == 0 ? TransferKind::cross_AB : TransferKind::cross_BA;
}

std::vector<TradeoffPoint> tradeoff_points(std::span<const EvalRecord> records, const ModelRegistry& reg,
                                           StdMode mode) {
    std::map<TransferConfig, std::vector<const EvalRecord*>> by_config;
    for (const auto& r : records) by_config[r.config].push_back(&r);

    std::vector<TradeoffPoint> out;
    for (const auto& [cfg, recs] : by_config) {
        TradeoffPoint p;
        p.config = cfg;
        p.total_params = reg.at(cfg.thinking).parameters + reg.at(cfg.answering).parameters;
        p.kind = transfer_kind(reg, cfg.thinking, cfg.answering);
        p.n_specialties = recs.size();
        std::vector<double> acc;
        std::size_t correct = 0, questions = 0;
        for (const auto* r : recs) {
            acc.push_back(r->accuracy);
            correct += r->n_correct;
            questions += r->n_questions;
            p.partial = p.partial || r->partial;
        }
        p.mean_acc = mean(acc);
        p.mean_acc_weighted = static_cast<double>(correct) / static_cast<double>(questions);
        const auto [lo, hi] = std::minmax_element(acc.begin(), acc.end());
        p.worst_case = *lo;
        p.range = *hi - *lo;
        if (acc.size() >= 2 && p.mean_acc > 0.0) p.cv = coefficient_of_variation(acc, mode);
        out.push_back(std::move(p));
    }

    std::vector<AccCv> pts;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < out.size(); ++i)
        if (out[i].cv) {
            pts.push_back({out[i].mean_acc, *out[i].cv});
            idx.push_back(i);
        }
    for (auto k : pareto_frontier(pts)) out[idx[k]].on_frontier = true;
    return out;
}

void write_tradeoff_csv(std::ostream& out, std::span<const TradeoffPoint> points) {
    out << "schema_version,thinking,answering,budget,strategy,mean_acc,mean_acc_weighted,cv,worst_case,range,"
           "token_efficiency,total_params,kind,partial,on_frontier\n";
    for (const auto& p : points) {
        out << kSchemaVersion << ',' << p.config.thinking << ',' << p.config.answering << ',' << p.config.budget
            << ',' << to_string(p.config.strategy) << ',' << num(p.mean_acc) << ',' << num(p.mean_acc_weighted)
            << ',' << (p.cv ? num(*p.cv) : std::string{}) << ',' << num(p.worst_case) << ',' << num(p.range) << ','
            << num(token_efficiency(p.mean_acc, p.config.budget)) << ',' << p.total_params << ','
            << to_string(p.kind) << ',' << (p.partial ? "true" : "false") << ','
            << (p.on_frontier ? "true" : "false") << '\n';
    }
}

void write_powerlaw_json(std::ostream& out, const PowerLawFit& fit, const PowerLawOptions& opt) {
    json j{{"schema_version", kSchemaVersion},
           {"status", "ok"},
           {"alpha", fit.alpha},
           {"beta", fit.beta},
           {"alpha_ci", {fit.alpha_ci.lo, fit.alpha_ci.hi}},
           {"beta_ci", {fit.beta_ci.lo, fit.beta_ci.hi}},
           {"r_squared", fit.r_squared},
           {"n_points", fit.n_points},
           {"excluded", fit.excluded},
           {"pareto_only", fit.pareto_only},
           {"bootstrap_n", opt.bootstrap_n},
           {"level", opt.level},
           {"seed", opt.seed}};
    out << j.dump(2) << '\n';
}

void write_powerlaw_unavailable(std::ostream& out, const std::string& reason) {
    json j{{"schema_version", kSchemaVersion},
           {"status", "insufficient_data"},
           {"reason", reason},
           {"alpha", nullptr},
           {"beta", nullptr},
           {"alpha_ci", nullptr},
           {"beta_ci", nullptr},
           {"r_squared", nullptr},
           {"n_points", 0}};
    out << j.dump(2) << '\n';
}

void write_curves_csv(std::ostream& out, std::span<const TradeoffPoint> points,
                      std::span<const CurveSample> typical) {
    out << "schema_version,curve,acc,cv,count\n";
    std::vector<const TradeoffPoint*> front;
    for (const auto& p : points)
        if (p.on_frontier) front.push_back(&p);
    std::stable_sort(front.begin(), front.end(), [](auto a, auto b) { return a->mean_acc < b->mean_acc; });
    for (const auto* p : front) out << kSchemaVersion << ",frontier," << num(p->mean_acc) << ',' << num(*p->cv) << ",1\n";
    for (const auto& s : typical)
        out << kSchemaVersion << ",typical," << num(s.acc) << ',' << num(s.cv) << ',' << s.count << '\n';
}

std::vector<StrategyComparison> compare_strategies(std::span<const EvalRecord> records) {
    using Key = std::tuple<std::string, std::string, std::string>;
    std::map<std::size_t, std::map<Key, std::pair<const EvalRecord*, const EvalRecord*>>> cells;
    for (const auto& r : records) {
        auto& cell = cells[r.config.budget][Key{r.config.thinking, r.config.answering, r.specialty}];
        (r.config.strategy == Strategy::summarization ? cell.first : cell.second) = &r;
    }
    std::vector<StrategyComparison> out;
    for (const auto& [budget, by_key] : cells) {
        StrategyComparison c;
        c.budget = budget;
        std::vector<double> sa, ta, sr, tr, diff;
        for (const auto& [key, pair] : by_key) {
            if (pair.first) {
                sa.push_back(pair.first->accuracy);
                sr.push_back(pair.first->mean_entity_retention);
            }
            if (pair.second) {
                ta.push_back(pair.second->accuracy);
                tr.push_back(pair.second->mean_entity_retention);
            }
            if (pair.first && pair.second) diff.push_back(pair.first->accuracy - pair.second->accuracy);
        }
        if (sa.empty() || ta.empty()) continue;
        c.summarization_accuracy = mean(sa);
        c.truncation_accuracy = mean(ta);
        c.summarization_retention = mean(sr);
        c.truncation_retention = mean(tr);
        if (diff.size() >= 2) c.test = paired_t_test(diff, 1);
        out.push_back(std::move(c));
    }
    for (auto& c : out)
        if (c.test) c.test->p_bonferroni = bonferroni(c.test->p_raw, out.size());
    return out;
}

}  // namespace cotkit
