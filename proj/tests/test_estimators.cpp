#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "rgg/estimators.hpp"
#include "test_helpers.hpp"

using namespace rgg;
using Catch::Approx;

namespace {

// exact mean of the Gilbert functional on the unit square: by the Mecke
// formula E L = (t^2/2) * int_{|z|<eps} |z|^alpha |W ^ (W - z)| dz, and the
// overlap of the unit square with its translate is (1-|z1|)(1-|z2|)
double gilbert_unit_square_mean(double t, double eps, double alpha) {
    double a2 = alpha + 2.0, a3 = alpha + 3.0, a4 = alpha + 4.0;
    double inner = 2.0 * pi * std::pow(eps, a2) / a2 - 8.0 * std::pow(eps, a3) / a3 +
                   2.0 * std::pow(eps, a4) / a4;
    return 0.5 * t * t * inner;
}

} // namespace

TEST_CASE("run_experiment: two replicates populate the report exactly", "[estimators]") {
    ExperimentSpec spec;
    spec.functional = FunctionalSpec::power(GraphFamily::gilbert, 1.0);
    spec.body = ConvexBody::unit_box(2);
    spec.t_grid = {6.0};
    spec.replicates = 2;
    spec.eps_rule = {EpsilonRule::Kind::constant, 0.4};
    spec.base_seed = 77;
    EstimateReport rep = run_experiment(spec);
    REQUIRE(rep.rows.size() == 1);
    double d = rep.samples[0][0] - rep.samples[0][1];
    CHECK(rep.rows[0].var == Approx(0.5 * d * d));
    CHECK(rep.rows[0].t == 6.0);
}

TEST_CASE("run_experiment: deterministic in seed, stable across workers", "[estimators]") {
    ExperimentSpec spec;
    spec.functional = FunctionalSpec::power(GraphFamily::onng, 0.5);
    spec.body = ConvexBody::unit_box(1);
    spec.t_grid = {20.0, 40.0};
    spec.replicates = 50;
    spec.base_seed = 123;
    spec.workers = 1;
    EstimateReport a = run_experiment(spec);
    EstimateReport b = run_experiment(spec);
    spec.workers = 4;
    EstimateReport c = run_experiment(spec);
    CHECK(a.samples == b.samples);
    CHECK(a.samples == c.samples);

    spec.base_seed = 124;
    EstimateReport d = run_experiment(spec);
    CHECK(a.samples != d.samples);
}

TEST_CASE("run_experiment: validation and capacity errors", "[estimators]") {
    ExperimentSpec spec;
    spec.functional = FunctionalSpec::power(GraphFamily::gilbert, 1.0);
    spec.body = ConvexBody::unit_box(2);
    spec.t_grid = {5.0, 5.0};
    spec.replicates = 4;
    CHECK_THROWS_AS(run_experiment(spec), argument_error); // non-increasing grid
    spec.t_grid = {5.0};
    spec.replicates = 1;
    CHECK_THROWS_AS(run_experiment(spec), argument_error);
    spec.replicates = 4;
    spec.max_points = 2;
    CHECK_THROWS_AS(run_experiment(spec), capacity_error);
}

TEST_CASE("run_experiment: gilbert mean matches the Mecke-formula oracle", "[estimators]") {
    ExperimentSpec spec;
    spec.functional = FunctionalSpec::power(GraphFamily::gilbert, 1.0);
    spec.body = ConvexBody::unit_box(2);
    spec.t_grid = {20.0};
    spec.intensity = 1.0;
    spec.replicates = 2000;
    spec.eps_rule = {EpsilonRule::Kind::constant, 0.3};
    spec.base_seed = 2027;
    spec.workers = 2;
    EstimateReport rep = run_experiment(spec);
    double oracle = gilbert_unit_square_mean(20.0, 0.3, 1.0);
    CHECK(std::fabs(rep.rows[0].mean - oracle) <= 3.0 * rep.rows[0].mean_se);
}

TEST_CASE("run_experiment: gilbert variance matches the coefficients at small eps",
          "[estimators]") {
    // at eps = 0.04 the boundary term of the variance is ~5%, well inside a
    // 15% band, so this validates sigma1/sigma2 directly
    const double eps = 0.04, alpha = 1.0, t = 60.0;
    ExperimentSpec spec;
    spec.functional = FunctionalSpec::power(GraphFamily::gilbert, alpha);
    spec.body = ConvexBody::unit_box(2);
    spec.t_grid = {t};
    spec.replicates = 5000;
    spec.eps_rule = {EpsilonRule::Kind::constant, eps};
    spec.base_seed = 2028;
    spec.workers = 2;
    EstimateReport rep = run_experiment(spec);
    auto cf = gilbert_variance_coeffs(2, alpha);
    double target = cf.sigma1 * t * t * std::pow(eps, 2 * alpha + 2) +
                    cf.sigma2 * t * t * t * std::pow(eps, 2 * alpha + 4);
    CHECK(rep.rows[0].var == Approx(target).epsilon(0.15));
}

TEST_CASE("mecke check: exact case, catalogue, zero intensity", "[estimators]") {
    auto body = ConvexBody::ball({0.0, 0.0}, 1.0);
    // h == 1: both sides estimate intensity * volume
    MeckeResult one = mecke_check(MeckeFn::one, body, 5.0, 600, 31);
    CHECK(std::fabs(one.lhs - 5.0 * body.volume()) <= 3.0 * one.lhs_se);
    CHECK(one.rhs == Approx(5.0 * body.volume()).margin(1e-12)); // probe side is exact for h=1

    for (MeckeFn fn : mecke_catalogue()) {
        MeckeResult res = mecke_check(fn, body, 5.0, 600, 32);
        CHECK(std::fabs(res.lhs - res.rhs) <= 3.0 * res.pooled_se() + 1e-12);
    }

    MeckeResult zero = mecke_check(MeckeFn::nearest_dist_capped, body, 0.0, 50, 33);
    CHECK(zero.lhs == 0.0);
    CHECK(zero.rhs == 0.0);
}

TEST_CASE("poincare check: tight linear case and catalogue", "[estimators]") {
    // for the centered count at p=2 the inequality is an equality
    auto body = ConvexBody::unit_box(2).scaled(2.0);
    PoincareResult eq = poincare_check(PoincareStatistic::count(), 2.0, body, 1.0, 4000, 41);
    CHECK(std::fabs(eq.margin) <= 3.0 * eq.pooled_se);

    for (const auto& stat : poincare_catalogue()) {
        ConvexBody b = !stat.centered_count && stat.fspec.family == GraphFamily::onng
                           ? ConvexBody::unit_box(1).scaled(8.0)
                           : ConvexBody::unit_box(2).scaled(3.0);
        for (double p : {1.5, 2.0}) {
            PoincareResult res = poincare_check(stat, p, b, 1.0, 400, 42);
            CHECK(res.margin >= -3.0 * res.pooled_se);
        }
    }
    CHECK_THROWS_AS(poincare_check(PoincareStatistic::count(), 2.5, body, 1.0, 10, 1),
                    argument_error);
}

TEST_CASE("conditional cost estimator", "[estimators]") {
    auto spec = FunctionalSpec::power(GraphFamily::onng, 0.5);
    auto body = ConvexBody::unit_box(1).scaled(40.0);
    auto cfg = sample_poisson(body, 1.0, true, RngStream(51, 1));
    REQUIRE(cfg.size() > 10);

    // s = 1: the future region is empty, the estimate is deterministic
    std::vector<double> probe{20.25};
    auto g = build_onng(cfg);
    double direct = std::fabs(add_one_cost_fast(spec, cfg, g, probe, 1.0).first_order);
    CHECK(conditional_cost_estimator(spec, cfg, probe, 1.0, 5, 99) == Approx(direct).margin(1e-12));
    CHECK(conditional_cost_estimator(spec, cfg, probe, 1.0, 1, 99) ==
          Approx(direct).margin(1e-12));

    // same seed, same estimate
    double e1 = conditional_cost_estimator(spec, cfg, probe, 0.3, 8, 7);
    double e2 = conditional_cost_estimator(spec, cfg, probe, 0.3, 8, 7);
    CHECK(e1 == e2);

    // envelope growth: est(s) / est(1) stays within 3x of the envelope ratio
    // (s^{-alpha/d} ^ t^alpha), averaged over pasts
    const double alpha = 0.5, t = 40.0;
    double est_small = 0.0, est_mid = 0.0, est_one = 0.0;
    const int npast = 20;
    for (int c = 0; c < npast; ++c) {
        auto past_cfg = sample_poisson(body, 1.0, true, RngStream(500 + c, 1));
        RngStream qs(600 + c, 1);
        std::vector<double> x;
        sample_uniform_in_body(body, qs, x);
        est_small += conditional_cost_estimator(spec, past_cfg, x, 0.01, 20, 700 + c);
        est_mid += conditional_cost_estimator(spec, past_cfg, x, 0.1, 20, 800 + c);
        est_one += conditional_cost_estimator(spec, past_cfg, x, 1.0, 1, 900 + c);
    }
    est_small /= npast;
    est_mid /= npast;
    est_one /= npast;
    auto envelope = [&](double s) { return std::min(std::pow(s, -alpha / 1.0), std::pow(t, alpha)); };
    CHECK(est_small / est_one <= 3.0 * envelope(0.01) / envelope(1.0));
    CHECK(est_mid / est_one <= 3.0 * envelope(0.1) / envelope(1.0));

    CHECK_THROWS_AS(conditional_cost_estimator(spec, cfg, probe, 0.0, 2, 1), argument_error);
}

TEST_CASE("epsilon rules", "[estimators]") {
    EpsilonRule c{EpsilonRule::Kind::constant, 0.3};
    CHECK(c.epsilon_at(50.0, 2) == 0.3);
    // power rule: eps_t^d = t^-theta
    EpsilonRule pw{EpsilonRule::Kind::power, 1.5};
    double eps = pw.epsilon_at(100.0, 2);
    CHECK(std::pow(eps, 2) == Approx(std::pow(100.0, -1.5)).epsilon(1e-12));
}

TEST_CASE("second_add_one_cost convenience overload", "[estimators]") {
    auto body = ConvexBody::unit_box(2).scaled(5.0);
    auto cfg = sample_poisson(body, 2.0, false, RngStream(71, 1));
    auto spec = FunctionalSpec::power(GraphFamily::gilbert, 1.0);
    std::vector<double> x{1.0, 1.0}, y{1.3, 1.2};
    double len = distance(x, y);
    double expect = len < 0.8 ? len : 0.0;
    CHECK(second_add_one_cost(spec, cfg, x, {}, y, {}, 0.8, 0) == Approx(expect).margin(1e-14));
}

TEST_CASE("compound poisson example: distance decay", "[estimators]") {
    const int reps = 10000;
    std::vector<double> dks;
    for (double T : {10.0, 100.0, 1000.0}) {
        auto xs = compound_poisson_samples(T, reps, 61, 0x43504f49ULL, 2);
        dks.push_back(kolmogorov_to_normal(xs));
    }
    double slack = 2.0 * 0.5 / std::sqrt(static_cast<double>(reps));
    CHECK(dks[1] <= dks[0] + slack);
    CHECK(dks[2] <= dks[1] + slack);
    CHECK(dks[2] <= 0.05);
}
