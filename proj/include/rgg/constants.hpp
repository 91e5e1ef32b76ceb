#pragma once

// Closed-form and numerically integrated constants for the critical ONNG
// variance and the Gilbert variance asymptotics.

#include <cmath>

#include "rgg/errors.hpp"
#include "rgg/geometry.hpp"
#include "rgg/quadrature.hpp"

namespace rgg {

// g(u) = pi/2 u^2 + (1 - u^2) arctan(u) - u; strictly increasing from 0 to pi/2.
// For u >= 1 the equivalent form pi/2 - u + (u^2 - 1) arctan(1/u) avoids the
// catastrophic cancellation of the two O(u^2) terms.
inline double g_function(double u) {
    if (u < 0.0) throw argument_error("g_function: u must be >= 0");
    if (u >= 1.0) return 0.5 * pi - u + (u * u - 1.0) * std::atan(1.0 / u);
    return 0.5 * pi * u * u + (1.0 - u * u) * std::atan(u) - u;
}

// c(1) = (5/2 - sqrt(2)) pi - 2 sqrt(2)
inline double c_constant_d1_closed_form() {
    return (2.5 - std::sqrt(2.0)) * pi - 2.0 * std::sqrt(2.0);
}

// c(d) via the radial two-ball-overlap reduction:
//   integrand(r,a) = (d^2/2) r^{d-1} a^{-d/2-1} (1/q1 - 1/q2),
//   q1 = 1 + a^d - vol(r,1,a,d), q2 = 1 + a^d,  a in [0,r], r in [0,inf).
// The outer infinite range is mapped by r = u/(1-u); the integrable endpoint
// singularity at a -> 0 is handled by opening the interval at 1e-12.
inline IntegrationResult c_constant(int d, double tol, double inner_cut = 1e-12) {
    if (d < 1 || d > 6) throw argument_error("c_constant: supported range is 1 <= d <= 6");
    if (!(tol > 0.0)) throw argument_error("c_constant: tol must be positive");

    long inner_evals = 0;
    auto inner = [&](double r) -> double {
        if (r <= inner_cut) return 0.0;
        auto integrand = [&](double a) -> double {
            double vol = ball_intersection_fraction(r, 1.0, a, d);
            double q2 = 1.0 + std::pow(a, d);
            double q1 = q2 - vol;
            double diff = 1.0 / q1 - 1.0 / q2; // >= 0 since vol >= 0
            if (diff < 0.0) {
                if (diff < -1e-13) throw numeric_error("c_constant: negative integrand");
                diff = 0.0;
            }
            return 0.5 * d * d * std::pow(r, d - 1) * std::pow(a, -0.5 * d - 1.0) * diff;
        };
        // for r > 1 the integrand vanishes until the balls touch at a = r-1
        double a_lo = std::max(inner_cut, r > 1.0 ? r - 1.0 : 0.0);
        if (a_lo >= r) a_lo = inner_cut;
        IntegrationResult res = adaptive_integrate(integrand, a_lo, r, tol * 1e-3, 1e-10);
        inner_evals += res.evaluations;
        return res.value;
    };

    auto outer = [&](double u) -> double {
        double om = 1.0 - u;
        double r = u / om;
        return inner(r) / (om * om);
    };

    IntegrationResult res;
    try {
        res = adaptive_integrate(outer, 0.0, 1.0 - 1e-8, tol * 0.5, 1e-9);
    } catch (const integration_error& e) {
        throw integration_error("c_constant: outer integral did not converge", e.partial_value,
                                e.partial_error);
    }
    res.evaluations += inner_evals;
    if (res.abs_error_estimate > tol)
        throw integration_error("c_constant: tolerance not met", res.value,
                                res.abs_error_estimate);
    return res;
}

// beta_1(d): the 20-term Riemann-type majorant of c~(d), tabulated for d=3..9
inline double beta1(int d) {
    if (d < 3 || d > 9) throw argument_error("beta1: d must be in [3,9]");
    double s = 0.0;
    const double aa = 0.5 * (d + 1);
    for (int i = 1; i <= 20; ++i) {
        double gi = g_function(std::pow(2.0 - (i - 1) / 10.0, 0.5 * d));
        double di = reg_inc_beta(i / 40.0, aa, aa) - reg_inc_beta((i - 1) / 40.0, aa, aa);
        s += gi * di;
    }
    return s;
}

// beta_2(d) = pi/2 (I_0.32((d+1)/2,(d+1)/2) + 2^{d-1} 0.36^d); decreasing in d
inline double beta2(int d) {
    if (d < 3) throw argument_error("beta2: d must be >= 3");
    const double aa = 0.5 * (d + 1);
    return 0.5 * pi * (reg_inc_beta(0.32, aa, aa) + std::pow(2.0, d - 1) * std::pow(0.36, d));
}

// Gilbert variance coefficients:
//   sigma1 = d kappa_d / (2 (d + 2 alpha)),  sigma2 = d^2 kappa_d^2 / (alpha + d)^2
struct GilbertVarianceCoeffs {
    double sigma1 = 0.0;
    double sigma2 = 0.0;
};

inline GilbertVarianceCoeffs gilbert_variance_coeffs(int d, double alpha) {
    if (d < 1) throw argument_error("gilbert_variance_coeffs: d must be >= 1");
    if (!(alpha > -0.5 * d)) throw argument_error("gilbert_variance_coeffs: need alpha > -d/2");
    double kd = unit_ball_volume(d);
    return {d * kd / (2.0 * (d + 2.0 * alpha)), d * d * kd * kd / ((alpha + d) * (alpha + d))};
}

} // namespace rgg
