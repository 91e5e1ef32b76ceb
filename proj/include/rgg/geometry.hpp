#pragma once

// Convex observation windows (balls and axis-aligned boxes), the cone systems
// used by the online nearest neighbour radius, and the special functions
// shared by the graph builders and the constants module: regularized
// incomplete beta, spherical-cap and ball-intersection volume fractions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "rgg/errors.hpp"
#include "rgg/rng.hpp"

namespace rgg {

inline constexpr double pi = std::numbers::pi;

// kappa_d = |B^d(0,1)| = pi^{d/2} / Gamma(d/2 + 1)
inline double unit_ball_volume(int d) {
    if (d < 0) throw argument_error("unit_ball_volume: d must be >= 0");
    return std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double t = a[i] - b[i];
        s += t * t;
    }
    return s;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

inline double norm(std::span<const double> a) {
    double s = 0.0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Regularized incomplete beta function I_x(a,b).
//
// Continued fraction (modified Lentz) with the usual symmetry switch at
// x > (a+1)/(a+b+2). Absolute accuracy ~1e-14 for moderate a,b.
// ---------------------------------------------------------------------------
namespace detail {

inline double beta_cont_fraction(double a, double b, double x) {
    const double tiny = 1e-300;
    const double eps = 1e-15;
    const int max_iter = 500;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

} // namespace detail

inline double reg_inc_beta(double x, double a, double b) {
    if (!(x >= 0.0 && x <= 1.0)) throw argument_error("reg_inc_beta: x must be in [0,1]");
    if (!(a > 0.0) || !(b > 0.0)) throw argument_error("reg_inc_beta: a,b must be positive");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    double lbeta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    double front = std::exp(lbeta + a * std::log(x) + b * std::log1p(-x));
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * detail::beta_cont_fraction(a, b, x) / a;
    return 1.0 - front * detail::beta_cont_fraction(b, a, 1.0 - x) / b;
}

// volume(spherical cap of B^d(0,r) cut at signed base distance a) / kappa_d.
// a >= 0 selects the smaller cap, a < 0 the larger one.
inline double cap_fraction(double r, double a, int d) {
    if (!(r > 0.0)) throw argument_error("cap_fraction: r must be positive");
    if (std::fabs(a) > r) throw argument_error("cap_fraction: need |a| <= r");
    if (a >= 0.0)
        return 0.5 * std::pow(r, d) * reg_inc_beta(1.0 - (a * a) / (r * r), 0.5 * (d + 1), 0.5);
    return std::pow(r, d) - cap_fraction(r, -a, d);
}

// |B^d(0,r1) ^ B^d(x e1, r2)| / kappa_d for centre distance x >= 0.
inline double ball_intersection_fraction(double x, double r1, double r2, int d) {
    if (!(r1 > 0.0) || !(r2 > 0.0)) throw argument_error("ball_intersection_fraction: radii must be positive");
    if (x < 0.0) throw argument_error("ball_intersection_fraction: x must be nonnegative");
    if (x >= r1 + r2) return 0.0;                       // no intersection
    if (x <= std::fabs(r1 - r2)) return std::pow(std::min(r1, r2), d); // one ball inside the other
    double c1 = (x * x + r1 * r1 - r2 * r2) / (2.0 * x); // base distances of the two caps
    double c2 = (x * x - r1 * r1 + r2 * r2) / (2.0 * x);
    return cap_fraction(r1, c1, d) + cap_fraction(r2, c2, d);
}

// ---------------------------------------------------------------------------
// ConvexBody: ball or axis-aligned box, with an interior ball witness.
// Immutable after construction.
// ---------------------------------------------------------------------------
class ConvexBody {
public:
    enum class Kind { ball, box };

    static ConvexBody ball(std::vector<double> center, double radius) {
        if (center.empty()) throw argument_error("ConvexBody::ball: empty center");
        if (!(radius > 0.0)) throw argument_error("ConvexBody::ball: radius must be positive");
        ConvexBody b;
        b.kind_ = Kind::ball;
        b.dim_ = static_cast<int>(center.size());
        b.a_ = std::move(center);
        b.b_ = {radius};
        return b;
    }

    static ConvexBody box(std::vector<double> lo, std::vector<double> hi) {
        if (lo.empty() || lo.size() != hi.size()) throw argument_error("ConvexBody::box: bad extents");
        for (std::size_t i = 0; i < lo.size(); ++i)
            if (!(lo[i] < hi[i])) throw argument_error("ConvexBody::box: need min < max componentwise");
        ConvexBody b;
        b.kind_ = Kind::box;
        b.dim_ = static_cast<int>(lo.size());
        b.a_ = std::move(lo);
        b.b_ = std::move(hi);
        return b;
    }

    static ConvexBody unit_box(int d) {
        return box(std::vector<double>(d, 0.0), std::vector<double>(d, 1.0));
    }

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    const std::vector<double>& ball_center() const { return a_; }
    double ball_radius() const { return b_[0]; }
    const std::vector<double>& box_min() const { return a_; }
    const std::vector<double>& box_max() const { return b_; }

    double volume() const {
        if (kind_ == Kind::ball) return unit_ball_volume(dim_) * std::pow(b_[0], dim_);
        double v = 1.0;
        for (int i = 0; i < dim_; ++i) v *= b_[i] - a_[i];
        return v;
    }

    double diameter() const {
        if (kind_ == Kind::ball) return 2.0 * b_[0];
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) {
            double e = b_[i] - a_[i];
            s += e * e;
        }
        return std::sqrt(s);
    }

    // closed-set membership
    bool contains(std::span<const double> x) const {
        if (kind_ == Kind::ball) {
            double s = 0.0;
            for (int i = 0; i < dim_; ++i) {
                double t = x[i] - a_[i];
                s += t * t;
            }
            return s <= b_[0] * b_[0];
        }
        for (int i = 0; i < dim_; ++i)
            if (x[i] < a_[i] || x[i] > b_[i]) return false;
        return true;
    }

    // tH = {t x : x in H}; volume scales by t^d
    ConvexBody scaled(double t) const {
        if (!(t > 0.0)) throw argument_error("ConvexBody::scaled: t must be positive");
        ConvexBody c = *this;
        for (auto& v : c.a_) v *= t;
        if (kind_ == Kind::ball) c.b_[0] *= t;
        else for (auto& v : c.b_) v *= t;
        return c;
    }

    void bounding_box(std::vector<double>& lo, std::vector<double>& hi) const {
        lo.assign(dim_, 0.0);
        hi.assign(dim_, 0.0);
        if (kind_ == Kind::ball) {
            for (int i = 0; i < dim_; ++i) {
                lo[i] = a_[i] - b_[0];
                hi[i] = a_[i] + b_[0];
            }
        } else {
            lo = a_;
            hi = b_;
        }
    }

    // interior ball witness (y0, delta) with B(y0, delta) inside the body
    void interior_ball(std::vector<double>& y0, double& delta) const {
        if (kind_ == Kind::ball) {
            y0 = a_;
            delta = b_[0];
            return;
        }
        y0.assign(dim_, 0.0);
        delta = std::numeric_limits<double>::infinity();
        for (int i = 0; i < dim_; ++i) {
            y0[i] = 0.5 * (a_[i] + b_[i]);
            delta = std::min(delta, 0.5 * (b_[i] - a_[i]));
        }
    }

    bool operator==(const ConvexBody& o) const {
        return kind_ == o.kind_ && dim_ == o.dim_ && a_ == o.a_ && b_ == o.b_;
    }

private:
    ConvexBody() = default;
    Kind kind_ = Kind::box;
    int dim_ = 0;
    std::vector<double> a_, b_; // ball: center/{radius}; box: min/max
};

// ---------------------------------------------------------------------------
// Cones and the pi/12 cone cover.
// ---------------------------------------------------------------------------
struct Cone {
    std::vector<double> apex;
    std::vector<double> axis; // unit vector
    double half_angle = 0.0;  // in (0, pi/2]

    // closed membership with a small angular slack to absorb rounding
    bool contains(std::span<const double> y) const {
        double nv = 0.0, dot = 0.0;
        for (std::size_t i = 0; i < apex.size(); ++i) {
            double v = y[i] - apex[i];
            nv += v * v;
            dot += v * axis[i];
        }
        return direction_within(dot, nv);
    }

    // membership of apex + v for a displacement vector v
    bool contains_direction(std::span<const double> v) const {
        double nv = 0.0, dot = 0.0;
        for (std::size_t i = 0; i < axis.size(); ++i) {
            nv += v[i] * v[i];
            dot += v[i] * axis[i];
        }
        return direction_within(dot, nv);
    }

private:
    bool direction_within(double dot, double norm_sq) const {
        double nv = std::sqrt(norm_sq);
        if (nv == 0.0) return true; // the apex belongs to the cone
        double c = std::clamp(dot / nv, -1.0, 1.0);
        return std::acos(c) <= half_angle + 1e-12;
    }
};

// K closed cones of angular radius pi/12 with common apex 0 covering R^d,
// plus the parallel family widened to pi/6.
struct ConeCover {
    int dim = 0;
    std::vector<Cone> cones;   // half_angle pi/12
    std::vector<Cone> widened; // same axes, half_angle pi/6

    std::size_t size() const { return cones.size(); }
};

namespace detail {

inline std::vector<std::vector<double>> sphere_grid(int d, std::size_t n) {
    std::vector<std::vector<double>> pts;
    pts.reserve(n);
    if (d == 2) {
        for (std::size_t i = 0; i < n; ++i) {
            double th = 2.0 * pi * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
            pts.push_back({std::cos(th), std::sin(th)});
        }
        return pts;
    }
    if (d == 3) {
        // Fibonacci sphere
        const double ga = pi * (3.0 - std::sqrt(5.0));
        for (std::size_t i = 0; i < n; ++i) {
            double z = 1.0 - 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
            double r = std::sqrt(std::max(0.0, 1.0 - z * z));
            double th = ga * static_cast<double>(i);
            pts.push_back({r * std::cos(th), r * std::sin(th), z});
        }
        return pts;
    }
    // d >= 4: fixed-stream Gaussian directions (deterministic)
    std::uint64_t sm = 0x2545f4914f6cdd1dULL + static_cast<std::uint64_t>(d);
    auto next_normal = [&sm]() {
        // Box-Muller on splitmix output
        std::uint64_t u1 = splitmix64(sm), u2 = splitmix64(sm);
        double a = (static_cast<double>(u1 >> 11) + 0.5) * 0x1.0p-53;
        double b = static_cast<double>(u2 >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(a)) * std::cos(2.0 * pi * b);
    };
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(d);
        double nn = 0.0;
        do {
            nn = 0.0;
            for (int j = 0; j < d; ++j) {
                v[j] = next_normal();
                nn += v[j] * v[j];
            }
        } while (nn == 0.0);
        nn = std::sqrt(nn);
        for (int j = 0; j < d; ++j) v[j] /= nn;
        pts.push_back(v);
    }
    return pts;
}

inline ConeCover make_cone_cover(int d) {
    ConeCover cover;
    cover.dim = d;
    auto add = [&](std::vector<double> axis) {
        Cone c{std::vector<double>(d, 0.0), axis, pi / 12.0};
        Cone w{std::vector<double>(d, 0.0), std::move(axis), pi / 6.0};
        cover.cones.push_back(std::move(c));
        cover.widened.push_back(std::move(w));
    };
    if (d == 1) {
        add({1.0});
        add({-1.0});
        return cover;
    }
    if (d == 2) {
        // 24 axes pi/12 apart: adjacent caps of radius pi/12 overlap and cover
        for (int k = 0; k < 24; ++k) {
            double th = 2.0 * pi * k / 24.0;
            add({std::cos(th), std::sin(th)});
        }
        return cover;
    }
    if (d > 4) throw argument_error("cone_cover: dimensions above 4 are not supported");
    // Greedy cap cover of a dense deterministic grid. The caps used during
    // construction are shrunk by a margin exceeding the grid covering radius,
    // so every unit vector (not only grid points) lies within pi/12 of an axis.
    const std::size_t n_grid = (d == 3) ? 300000 : 400000;
    const double margin = (d == 3) ? 0.02 : 0.06;
    const double cap = pi / 12.0 - margin;
    const double cos_cap = std::cos(cap);
    auto grid = sphere_grid(d, n_grid);
    std::vector<char> covered(grid.size(), 0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (covered[i]) continue;
        const auto& axis = grid[i];
        add(axis);
        for (std::size_t j = i; j < grid.size(); ++j) {
            if (covered[j]) continue;
            double dot = 0.0;
            for (int k = 0; k < d; ++k) dot += axis[k] * grid[j][k];
            if (dot >= cos_cap) covered[j] = 1;
        }
    }
    return cover;
}

} // namespace detail

// Deterministic per dimension; cached because construction for d=3,4 walks a
// large direction grid.
inline const ConeCover& cone_cover(int d) {
    if (d < 1) throw argument_error("cone_cover: d must be >= 1");
    static std::mutex mu;
    static std::map<int, ConeCover> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(d);
    if (it == cache.end()) it = cache.emplace(d, detail::make_cone_cover(d)).first;
    return it->second;
}

} // namespace rgg
