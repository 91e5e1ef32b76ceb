#pragma once

// Monte Carlo experiment engine: functional sampling across a t-grid,
// variance and distance-to-normal estimation, scaling fits, and the empirical
// Mecke / p-Poincaré checks. Replicates run on a worker pool, each with its
// own derived stream; aggregation is in replicate-index order so results are
// bitwise identical for any worker count.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "rgg/constants.hpp"
#include "rgg/errors.hpp"
#include "rgg/functionals.hpp"
#include "rgg/graphs.hpp"
#include "rgg/sampling.hpp"
#include "rgg/stats.hpp"

namespace rgg {

namespace detail {

// index-parallel loop with first-exception propagation
inline void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    workers = std::max(1, workers);
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex err_mu;
    auto body = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!first_error) first_error = std::current_exception();
                failed.store(true);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace detail

struct EpsilonRule {
    enum class Kind { constant, power }; // power: eps_t^d = t^{-theta}
    Kind kind = Kind::constant;
    double value = 0.1; // constant epsilon, or theta

    double epsilon_at(double t, int d) const {
        if (kind == Kind::constant) return value;
        return std::pow(t, -value / static_cast<double>(d));
    }
};

struct ExperimentSpec {
    FunctionalSpec functional;
    ConvexBody body = ConvexBody::unit_box(1); // unit-scale window H
    std::vector<double> t_grid;                // strictly increasing
    double intensity = 1.0;
    EpsilonRule eps_rule;                      // gilbert only
    int knn_k = 1;
    int replicates = 2;
    std::uint64_t base_seed = 0;
    std::uint64_t subcommand_id = 0;           // stream derivation component
    long max_points = 1000000;                 // per-replicate capacity cap
    int workers = 1;

    void validate() const {
        if (t_grid.empty()) throw argument_error("experiment: empty t grid");
        for (double t : t_grid)
            if (!(t > 0.0)) throw argument_error("experiment: t values must be positive");
        for (std::size_t i = 1; i < t_grid.size(); ++i)
            if (!(t_grid[i] > t_grid[i - 1]))
                throw argument_error("experiment: t grid must be strictly increasing");
        if (replicates < 2) throw argument_error("experiment: need at least 2 replicates");
        if (intensity < 0.0) throw argument_error("experiment: negative intensity");
    }
};

struct EstimateRow {
    double t = 0.0;
    double n_mean = 0.0;
    double mean = 0.0, mean_se = 0.0;
    double var = 0.0, var_se = 0.0;
    double dk = 0.0, dw = 0.0;
};

struct EstimateReport {
    std::vector<EstimateRow> rows;
    std::vector<std::vector<double>> samples; // per t, replicate-index order
    std::vector<std::vector<long>> counts;    // point counts per t, replicate
};

// The Gilbert convention keeps the window fixed and scales the intensity by t;
// the other families keep intensity 1 and grow the window to tH.
inline EstimateReport run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const std::size_t nt = spec.t_grid.size();
    const std::size_t reps = static_cast<std::size_t>(spec.replicates);
    EstimateReport rep;
    rep.samples.assign(nt, std::vector<double>(reps, 0.0));
    rep.counts.assign(nt, std::vector<long>(reps, 0));

    const bool marked = spec.functional.family == GraphFamily::onng;
    detail::parallel_for(nt * reps, spec.workers, [&](std::size_t task) {
        const std::size_t ti = task / reps;
        const std::size_t r = task % reps;
        const double t = spec.t_grid[ti];
        ConvexBody window = spec.body;
        double intensity = spec.intensity;
        double epsilon = 0.0;
        if (spec.functional.family == GraphFamily::gilbert) {
            intensity *= t;
            epsilon = spec.eps_rule.epsilon_at(t, spec.body.dim());
        } else {
            window = spec.body.scaled(t);
        }
        if (intensity * window.volume() > static_cast<double>(spec.max_points) * 1.1)
            throw capacity_error("run_experiment: expected point count exceeds max_points");
        RngStream stream(spec.base_seed, derive_stream_id({spec.subcommand_id, ti, r}));
        MarkedPointConfig cfg = sample_poisson(window, intensity, marked, stream);
        if (static_cast<long>(cfg.size()) > spec.max_points)
            throw capacity_error("run_experiment: replicate exceeded max_points");
        GeometricGraph g = detail::build_family(spec.functional, cfg, epsilon, spec.knn_k);
        rep.samples[ti][r] = evaluate(spec.functional, g);
        rep.counts[ti][r] = static_cast<long>(cfg.size());
    });

    for (std::size_t ti = 0; ti < nt; ++ti) {
        EstimateRow row;
        row.t = spec.t_grid[ti];
        const auto& xs = rep.samples[ti];
        double nm = 0.0;
        for (long c : rep.counts[ti]) nm += static_cast<double>(c);
        row.n_mean = nm / static_cast<double>(reps);
        MeanVar mv = mean_var(xs);
        row.mean = mv.mean;
        row.var = mv.var;
        row.mean_se = std::sqrt(mv.var / static_cast<double>(reps));
        row.var_se = jackknife_se_of_variance(xs);
        row.dk = kolmogorov_to_normal(xs);
        row.dw = wasserstein1_to_normal(xs);
        rep.rows.push_back(row);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Variance scaling fits.
// ---------------------------------------------------------------------------
struct ScalingFit {
    double slope = 0.0;
    double slope_stderr = 0.0;
    std::vector<double> log_corrected_ratio; // var / (t^d log t^d)
};

inline ScalingFit fit_variance_scaling(std::span<const double> t, std::span<const double> var,
                                       int d) {
    if (t.size() < 3) throw argument_error("fit_variance_scaling: need >= 3 grid points");
    std::vector<double> lt(t.size()), lv(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(var[i] > 0.0)) throw numeric_error("fit_variance_scaling: nonpositive variance");
        lt[i] = std::log(t[i]);
        lv[i] = std::log(var[i]);
    }
    LineFit lf = least_squares_line(lt, lv);
    ScalingFit out;
    out.slope = lf.slope;
    out.slope_stderr = lf.slope_stderr;
    for (std::size_t i = 0; i < t.size(); ++i) {
        double td = std::pow(t[i], d);
        double denom = td * std::log(td);
        out.log_corrected_ratio.push_back(denom > 0.0 ? var[i] / denom
                                                      : std::numeric_limits<double>::quiet_NaN());
    }
    return out;
}

inline ScalingFit fit_variance_scaling(const EstimateReport& rep, int d) {
    std::vector<double> t, v;
    for (const auto& row : rep.rows) {
        t.push_back(row.t);
        v.push_back(row.var);
    }
    return fit_variance_scaling(t, v, d);
}

// ---------------------------------------------------------------------------
// Empirical Mecke check: E sum_{w in chi} h(chi, w) vs
// E int h(chi + delta_w, w) lambda(dw), both by Monte Carlo.
// ---------------------------------------------------------------------------
enum class MeckeFn { one, nearest_dist_capped, ball_count_decay };

inline const std::vector<MeckeFn>& mecke_catalogue() {
    static const std::vector<MeckeFn> cat{MeckeFn::one, MeckeFn::nearest_dist_capped,
                                          MeckeFn::ball_count_decay};
    return cat;
}

inline const char* mecke_fn_name(MeckeFn f) {
    switch (f) {
        case MeckeFn::one: return "one";
        case MeckeFn::nearest_dist_capped: return "nearest_dist_capped";
        case MeckeFn::ball_count_decay: return "ball_count_decay";
    }
    return "?";
}

struct MeckeResult {
    double lhs = 0.0, rhs = 0.0;
    double lhs_se = 0.0, rhs_se = 0.0;
    double pooled_se() const { return std::sqrt(lhs_se * lhs_se + rhs_se * rhs_se); }
};

namespace detail {

// h(chi, w) where `others` are the points of chi different from w
inline double mecke_h(MeckeFn fn, const MarkedPointConfig& cfg, std::span<const double> w,
                      int exclude_index) {
    switch (fn) {
        case MeckeFn::one: return 1.0;
        case MeckeFn::nearest_dist_capped: {
            auto hit = nearest_in_subset(cfg, w, [&](int j) { return j != exclude_index; });
            return hit ? std::min(1.0, hit->second) : 1.0;
        }
        case MeckeFn::ball_count_decay: {
            int count = 0;
            const double r2 = 0.25;
            for (std::size_t j = 0; j < cfg.size(); ++j) {
                if (static_cast<int>(j) == exclude_index) continue;
                if (squared_distance(cfg.position(j), w) <= r2) ++count;
            }
            return std::exp(-static_cast<double>(count));
        }
    }
    return 0.0;
}

} // namespace detail

inline MeckeResult mecke_check(MeckeFn fn, const ConvexBody& body, double intensity,
                               int replicates, std::uint64_t seed, int probes_per_replicate = 32,
                               int workers = 1) {
    if (replicates < 2) throw argument_error("mecke_check: need >= 2 replicates");
    const double measure = intensity * body.volume();
    std::vector<double> lhs(replicates), rhs(replicates);
    detail::parallel_for(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
        RngStream stream(seed, derive_stream_id({0x4d45434bULL, r}));
        MarkedPointConfig cfg = sample_poisson(body, intensity, false, stream.substream(1));
        double acc = 0.0;
        for (std::size_t i = 0; i < cfg.size(); ++i)
            acc += detail::mecke_h(fn, cfg, cfg.position(i), static_cast<int>(i));
        lhs[r] = acc;
        double probe_acc = 0.0;
        std::vector<double> w;
        RngStream probe_stream = stream.substream(2);
        for (int j = 0; j < probes_per_replicate; ++j) {
            sample_uniform_in_body(body, probe_stream, w);
            probe_acc += detail::mecke_h(fn, cfg, w, -1);
        }
        rhs[r] = measure * probe_acc / static_cast<double>(probes_per_replicate);
    });
    MeckeResult out;
    MeanVar ml = mean_var(lhs), mr = mean_var(rhs);
    out.lhs = ml.mean;
    out.rhs = mr.mean;
    out.lhs_se = std::sqrt(ml.var / replicates);
    out.rhs_se = std::sqrt(mr.var / replicates);
    return out;
}

// ---------------------------------------------------------------------------
// Empirical p-Poincaré check:
//   E|F|^p - |E F|^p  <=  2^{2-p} E int |D_x F|^p lambda(dx),  p in [1,2].
// ---------------------------------------------------------------------------
struct PoincareStatistic {
    bool centered_count = false; // F = chi(H) - lambda|H|, D_x F = 1
    FunctionalSpec fspec;
    double epsilon = 0.3; // gilbert parameter
    int k = 1;            // knn parameter
    std::string name;

    static PoincareStatistic count() {
        PoincareStatistic s;
        s.centered_count = true;
        s.name = "centered_count";
        return s;
    }
    static PoincareStatistic graph(FunctionalSpec f, double eps = 0.3, int k = 1,
                                   std::string name = "graph") {
        PoincareStatistic s;
        s.fspec = f;
        s.epsilon = eps;
        s.k = k;
        s.name = std::move(name);
        return s;
    }
};

inline const std::vector<PoincareStatistic>& poincare_catalogue() {
    static const std::vector<PoincareStatistic> cat{
        PoincareStatistic::count(),
        PoincareStatistic::graph(FunctionalSpec::power(GraphFamily::onng, 0.3), 0.0, 1,
                                 "onng_power_0.3"),
        PoincareStatistic::graph(FunctionalSpec::power(GraphFamily::gilbert, 1.0), 0.3, 1,
                                 "gilbert_power_1.0"),
    };
    return cat;
}

struct PoincareResult {
    double lhs = 0.0, rhs = 0.0;
    double margin = 0.0; // rhs - lhs; the inequality asks margin >= 0
    double pooled_se = 0.0;
};

inline PoincareResult poincare_check(const PoincareStatistic& stat, double p,
                                     const ConvexBody& body, double intensity, int replicates,
                                     std::uint64_t seed, int probes_per_replicate = 32,
                                     int workers = 1) {
    if (!(p >= 1.0 && p <= 2.0)) throw argument_error("poincare_check: p must be in [1,2]");
    if (replicates < 2) throw argument_error("poincare_check: need >= 2 replicates");
    const double measure = intensity * body.volume();
    const bool marked = !stat.centered_count && stat.fspec.family == GraphFamily::onng;
    std::vector<double> fvals(replicates), probe_means(replicates);
    detail::parallel_for(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
        RngStream stream(seed, derive_stream_id({0x504f494eULL, r}));
        MarkedPointConfig cfg = sample_poisson(body, intensity, marked, stream.substream(1));
        double probe_acc = 0.0;
        std::vector<double> w;
        RngStream probe_stream = stream.substream(2);
        if (stat.centered_count) {
            fvals[r] = static_cast<double>(cfg.size()) - measure;
            probe_acc = static_cast<double>(probes_per_replicate); // |D_x F| = 1
        } else {
            GeometricGraph g = detail::build_family(stat.fspec, cfg, stat.epsilon, stat.k);
            fvals[r] = evaluate(stat.fspec, g);
            for (int j = 0; j < probes_per_replicate; ++j) {
                sample_uniform_in_body(body, probe_stream, w);
                std::optional<double> mk;
                if (marked) mk = probe_stream.uniform01();
                double d1 = add_one_cost_fast(stat.fspec, cfg, g, w, mk).first_order;
                probe_acc += std::pow(std::fabs(d1), p);
            }
        }
        probe_means[r] = measure * probe_acc / static_cast<double>(probes_per_replicate);
    });

    const std::size_t n = fvals.size();
    double s1 = 0.0, sp = 0.0;
    std::vector<double> absp(n);
    for (std::size_t i = 0; i < n; ++i) {
        absp[i] = std::pow(std::fabs(fvals[i]), p);
        s1 += fvals[i];
        sp += absp[i];
    }
    const double lhs = sp / n - std::pow(std::fabs(s1 / n), p);
    // jackknife se of the lhs statistic
    std::vector<double> loo(n);
    for (std::size_t i = 0; i < n; ++i) {
        double m1 = (s1 - fvals[i]) / static_cast<double>(n - 1);
        double mp = (sp - absp[i]) / static_cast<double>(n - 1);
        loo[i] = mp - std::pow(std::fabs(m1), p);
    }
    double lm = 0.0;
    for (double v : loo) lm += v;
    lm /= n;
    double jk = 0.0;
    for (double v : loo) jk += (v - lm) * (v - lm);
    double lhs_se = std::sqrt(jk * static_cast<double>(n - 1) / static_cast<double>(n));

    MeanVar pv = mean_var(probe_means);
    const double c = std::pow(2.0, 2.0 - p);
    PoincareResult out;
    out.lhs = lhs;
    out.rhs = c * pv.mean;
    out.margin = out.rhs - out.lhs;
    double rhs_se = c * std::sqrt(pv.var / n);
    out.pooled_se = std::sqrt(lhs_se * lhs_se + rhs_se * rhs_se);
    return out;
}

// ---------------------------------------------------------------------------
// Nested Monte Carlo estimate of E[ |D_{(x,s)} F| | past ]: keep the points
// with mark < s, resample the future region inner_replicates times.
// ---------------------------------------------------------------------------
inline double conditional_cost_estimator(const FunctionalSpec& spec, const MarkedPointConfig& cfg,
                                         std::span<const double> probe_pos, double probe_mark,
                                         int inner_replicates, std::uint64_t seed,
                                         double intensity = 1.0) {
    if (!cfg.marked()) throw argument_error("conditional_cost_estimator: needs a marked config");
    if (!(probe_mark > 0.0 && probe_mark <= 1.0))
        throw argument_error("conditional_cost_estimator: probe mark must be in (0,1]");
    if (inner_replicates < 1) throw argument_error("conditional_cost_estimator: inner_replicates >= 1");
    MarkedPointConfig past(cfg.body(), true, cfg.seed_record());
    for (std::size_t i = 0; i < cfg.size(); ++i)
        if (cfg.mark(i) < probe_mark) past.append_unchecked(cfg.position(i), cfg.mark(i));

    RngStream stream(seed, derive_stream_id({0x434f4e44ULL}));
    const double future_mean = intensity * cfg.body().volume() * (1.0 - probe_mark);
    double acc = 0.0;
    std::vector<double> pos;
    for (int j = 0; j < inner_replicates; ++j) {
        MarkedPointConfig composite = past;
        long m = stream.poisson(future_mean);
        for (long q = 0; q < m; ++q) {
            sample_uniform_in_body(cfg.body(), stream, pos);
            double u = probe_mark + (1.0 - probe_mark) * stream.uniform01();
            composite.append_unchecked(pos, u);
        }
        GeometricGraph g = build_onng(composite);
        double d1 = add_one_cost_fast(spec, composite, g, probe_pos, probe_mark).first_order;
        acc += std::fabs(d1);
    }
    return acc / static_cast<double>(inner_replicates);
}

// ---------------------------------------------------------------------------
// The compound Poisson example: F_T = sum_{i<=N(T)} X_i with X uniform on
// {-1,+1}, realized as a marked-point sum on [0,T].
// ---------------------------------------------------------------------------
inline double compound_poisson_sample(double T, RngStream stream) {
    ConvexBody line = ConvexBody::box({0.0}, {T});
    MarkedPointConfig cfg = sample_poisson(line, 1.0, true, stream);
    double s = 0.0;
    for (std::size_t i = 0; i < cfg.size(); ++i) s += cfg.mark(i) < 0.5 ? 1.0 : -1.0;
    return s;
}

inline std::vector<double> compound_poisson_samples(double T, int replicates,
                                                    std::uint64_t base_seed,
                                                    std::uint64_t subcommand_id = 0x43504f49ULL,
                                                    int workers = 1) {
    std::vector<double> out(replicates);
    detail::parallel_for(static_cast<std::size_t>(replicates), workers, [&](std::size_t r) {
        out[r] = compound_poisson_sample(T, RngStream(base_seed,
                                                      derive_stream_id({subcommand_id, r})));
    });
    return out;
}

} // namespace rgg
