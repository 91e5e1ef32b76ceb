#pragma once

// Globally adaptive Gauss-Kronrod (7-15) quadrature on finite intervals.
// The worst segment is split until the summed error estimate meets the
// tolerance or the subdivision limit (200 per call, mirroring the reference
// integrator budget) is exhausted.

#include <cmath>
#include <functional>
#include <queue>
#include <vector>

#include "rgg/errors.hpp"

namespace rgg {

struct IntegrationResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    long evaluations = 0;
};

namespace detail {

// Kronrod-15 abscissae (positive half) and weights; Gauss-7 weights interleave
// at the odd indices.
inline constexpr double gk_nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
inline constexpr double gk_wk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double gk_wg[4] = {0.129484966168870, 0.279705391489277,
                                    0.381830050505119, 0.417959183673469};

struct Segment {
    double a, b, value, error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
inline Segment gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fk = 0.0, fg = 0.0;
    for (int i = 0; i < 8; ++i) {
        double x = gk_nodes[i] * h;
        double v = (i == 7) ? f(c) : f(c - x) + f(c + x);
        fk += gk_wk[i] * v;
        if (i % 2 == 1) fg += gk_wg[i / 2] * v;
    }
    // |K15 - G7| is a conservative error estimate for smooth integrands
    return {a, b, fk * h, std::fabs((fk - fg) * h)};
}

} // namespace detail

inline constexpr int quadrature_subdivision_limit = 200;

// integrate f over [a,b] to absolute tolerance abs_tol (plus a relative floor)
template <class F>
IntegrationResult adaptive_integrate(const F& f, double a, double b, double abs_tol,
                                     double rel_tol = 1e-12) {
    IntegrationResult out;
    if (a == b) return out;
    std::priority_queue<detail::Segment> q;
    q.push(detail::gk15(f, a, b));
    out.evaluations = 15;
    double total = q.top().value, total_err = q.top().error;
    int splits = 0;
    while (total_err > std::max(abs_tol, std::fabs(total) * rel_tol) &&
           splits < quadrature_subdivision_limit) {
        detail::Segment s = q.top();
        q.pop();
        double mid = 0.5 * (s.a + s.b);
        if (mid == s.a || mid == s.b) { // interval exhausted at double precision
            q.push({s.a, s.b, s.value, 0.0});
            total_err -= s.error;
            continue;
        }
        detail::Segment l = detail::gk15(f, s.a, mid);
        detail::Segment r = detail::gk15(f, mid, s.b);
        out.evaluations += 30;
        total += l.value + r.value - s.value;
        total_err += l.error + r.error - s.error;
        q.push(l);
        q.push(r);
        ++splits;
    }
    out.value = total;
    out.abs_error_estimate = total_err;
    if (total_err > std::max(abs_tol, std::fabs(total) * rel_tol))
        throw integration_error("adaptive_integrate: subdivision limit reached", total, total_err);
    return out;
}

} // namespace rgg
