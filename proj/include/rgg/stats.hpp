#pragma once

// Distance-to-normal estimators and small statistical utilities. The distance
// estimators standardize internally with the sample mean and the n-denominator
// standard deviation.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "rgg/errors.hpp"

namespace rgg {

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

inline double normal_pdf(double x) {
    return 0.39894228040143267794 * std::exp(-0.5 * x * x);
}

// Acklam's rational approximation refined by one Newton step; absolute error
// well below 1e-12 across (0,1).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw argument_error("normal_quantile: p must be in (0,1)");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1.0 - plow;
    double x;
    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= phigh) {
        double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double e = normal_cdf(x) - p;
    x -= e / normal_pdf(x);
    return x;
}

struct MeanVar {
    double mean = 0.0;
    double var = 0.0; // unbiased, n-1 denominator
};

inline MeanVar mean_var(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 2) throw argument_error("mean_var: need at least 2 samples");
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return {m, ss / static_cast<double>(n - 1)};
}

// jackknife standard error of the unbiased sample variance
inline double jackknife_se_of_variance(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 3) return 0.0;
    double s1 = 0.0, s2 = 0.0;
    for (double x : xs) {
        s1 += x;
        s2 += x * x;
    }
    std::vector<double> loo(n);
    const double m = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        double mu = (s1 - xs[i]) / m;
        double ss = s2 - xs[i] * xs[i] - m * mu * mu;
        loo[i] = ss / (m - 1.0);
    }
    double lm = 0.0;
    for (double v : loo) lm += v;
    lm /= static_cast<double>(n);
    double acc = 0.0;
    for (double v : loo) acc += (v - lm) * (v - lm);
    return std::sqrt(acc * m / static_cast<double>(n));
}

namespace detail {

inline std::vector<double> standardized_sorted(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 2) throw argument_error("distance estimator: need at least 2 samples");
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    double sd = std::sqrt(ss / static_cast<double>(n));
    if (!(sd > 0.0)) throw numeric_error("distance estimator: zero sample variance");
    std::vector<double> v(xs.begin(), xs.end());
    for (double& x : v) x = (x - m) / sd;
    std::sort(v.begin(), v.end());
    return v;
}

} // namespace detail

// sup over the sorted standardized sample of |ECDF - Phi|, taking both
// one-sided limits at each jump
inline double kolmogorov_to_normal(std::span<const double> xs) {
    auto v = detail::standardized_sorted(xs);
    const double n = static_cast<double>(v.size());
    double dk = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        double f = normal_cdf(v[i]);
        dk = std::max(dk, std::fabs((static_cast<double>(i) + 1.0) / n - f));
        dk = std::max(dk, std::fabs(static_cast<double>(i) / n - f));
    }
    return dk;
}

// quantile-coupling estimator: (1/n) sum |X_(i) - Phi^{-1}((i-0.5)/n)|
inline double wasserstein1_to_normal(std::span<const double> xs) {
    auto v = detail::standardized_sorted(xs);
    const double n = static_cast<double>(v.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        acc += std::fabs(v[i] - normal_quantile((static_cast<double>(i) + 0.5) / n));
    return acc / n;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

inline LineFit least_squares_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw argument_error("least_squares_line: need >= 2 points");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw numeric_error("least_squares_line: degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (n > 2) {
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double e = y[i] - (f.intercept + f.slope * x[i]);
            sse += e * e;
        }
        f.slope_stderr = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
    }
    return f;
}

} // namespace rgg
