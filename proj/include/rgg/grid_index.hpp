#pragma once

// Uniform grid over the body's bounding box with ring-expansion queries.
// Exact: the nearest-neighbour search stops only once the closest possible
// point in unvisited cells exceeds the current best distance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "rgg/geometry.hpp"

namespace rgg {

class GridIndex {
public:
    // cell_size is a hint; each axis gets at least one and at most 64 cells
    GridIndex(int dim, std::vector<double> lo, std::vector<double> hi, double cell_size)
        : d_(dim), lo_(std::move(lo)), hi_(std::move(hi)) {
        res_.resize(d_);
        width_.resize(d_);
        total_cells_ = 1;
        for (int i = 0; i < d_; ++i) {
            double extent = std::max(hi_[i] - lo_[i], 1e-300);
            long r = cell_size > 0.0 ? static_cast<long>(std::floor(extent / cell_size)) : 1;
            r = std::clamp(r, 1L, 64L);
            res_[i] = static_cast<int>(r);
            width_[i] = extent / static_cast<double>(r);
            total_cells_ *= res_[i];
        }
        cells_.assign(static_cast<std::size_t>(total_cells_), {});
    }

    void insert(int idx, std::span<const double> pos) {
        cells_[cell_of(pos)].push_back(idx);
        ++count_;
    }

    std::size_t count() const { return count_; }

    // indices of inserted points with |p - center| <= radius (closed ball)
    void query_ball(std::span<const double> center, double radius,
                    std::span<const double> positions, std::vector<int>& out) const {
        out.clear();
        const double r2 = radius * radius;
        std::vector<int> clo(d_), chi(d_);
        for (int i = 0; i < d_; ++i) {
            clo[i] = coord_clamped(center[i] - radius, i);
            chi[i] = coord_clamped(center[i] + radius, i);
        }
        std::vector<int> c(clo);
        for (;;) {
            for (int idx : cells_[flat(c)]) {
                std::span<const double> p{positions.data() + static_cast<std::size_t>(idx) * d_,
                                          static_cast<std::size_t>(d_)};
                if (squared_distance(p, center) <= r2) out.push_back(idx);
            }
            int axis = 0;
            while (axis < d_) {
                if (++c[axis] <= chi[axis]) break;
                c[axis] = clo[axis];
                ++axis;
            }
            if (axis == d_) break;
        }
        std::sort(out.begin(), out.end());
    }

    // nearest inserted point satisfying `accept`; nullopt when no candidate
    std::optional<std::pair<int, double>> nearest(std::span<const double> center,
                                                  std::span<const double> positions,
                                                  const std::function<bool(int)>& accept = {}) const {
        if (count_ == 0) return std::nullopt;
        std::vector<int> c0(d_);
        for (int i = 0; i < d_; ++i) c0[i] = coord_clamped(center[i], i);
        int best = -1;
        double best2 = std::numeric_limits<double>::infinity();
        const int max_ring = max_ring_from(c0);
        for (int ring = 0; ring <= max_ring; ++ring) {
            double lb = ring_lower_bound(center, c0, ring);
            if (lb * lb > best2) break;
            visit_ring(c0, ring, [&](long cell) {
                for (int idx : cells_[static_cast<std::size_t>(cell)]) {
                    if (accept && !accept(idx)) continue;
                    std::span<const double> p{positions.data() + static_cast<std::size_t>(idx) * d_,
                                              static_cast<std::size_t>(d_)};
                    double d2 = squared_distance(p, center);
                    if (d2 < best2) {
                        best2 = d2;
                        best = idx;
                    }
                }
            });
        }
        if (best < 0) return std::nullopt;
        return std::make_pair(best, std::sqrt(best2));
    }

    // k smallest distances (ascending) among accepted points
    void k_nearest(std::span<const double> center, std::span<const double> positions, int k,
                   const std::function<bool(int)>& accept,
                   std::vector<std::pair<double, int>>& out) const {
        out.clear();
        if (count_ == 0 || k <= 0) return;
        std::vector<int> c0(d_);
        for (int i = 0; i < d_; ++i) c0[i] = coord_clamped(center[i], i);
        auto worst = [&]() {
            return out.size() < static_cast<std::size_t>(k)
                       ? std::numeric_limits<double>::infinity()
                       : out.front().first;
        };
        const int max_ring = max_ring_from(c0);
        for (int ring = 0; ring <= max_ring; ++ring) {
            double lb = ring_lower_bound(center, c0, ring);
            if (lb * lb > worst()) break;
            visit_ring(c0, ring, [&](long cell) {
                for (int idx : cells_[static_cast<std::size_t>(cell)]) {
                    if (accept && !accept(idx)) continue;
                    std::span<const double> p{positions.data() + static_cast<std::size_t>(idx) * d_,
                                              static_cast<std::size_t>(d_)};
                    double d2 = squared_distance(p, center);
                    if (d2 < worst()) {
                        out.push_back({d2, idx});
                        std::push_heap(out.begin(), out.end());
                        if (out.size() > static_cast<std::size_t>(k)) {
                            std::pop_heap(out.begin(), out.end());
                            out.pop_back();
                        }
                    }
                }
            });
        }
        std::sort_heap(out.begin(), out.end());
        for (auto& e : out) e.first = std::sqrt(e.first);
    }

    // Streams points ring by ring. `on_ring(lb)` is called with the ring's
    // distance lower bound before its points; returning false stops the scan.
    template <class RingFn, class PointFn>
    void scan_by_rings(std::span<const double> center, RingFn&& on_ring, PointFn&& on_point) const {
        std::vector<int> c0(d_);
        for (int i = 0; i < d_; ++i) c0[i] = coord_clamped(center[i], i);
        const int max_ring = max_ring_from(c0);
        for (int ring = 0; ring <= max_ring; ++ring) {
            if (!on_ring(ring_lower_bound(center, c0, ring))) return;
            visit_ring(c0, ring, [&](long cell) {
                for (int idx : cells_[static_cast<std::size_t>(cell)]) on_point(idx);
            });
        }
    }

private:
    long flat(const std::vector<int>& c) const {
        long f = 0;
        for (int i = d_ - 1; i >= 0; --i) f = f * res_[i] + c[i];
        return f;
    }

    long cell_of(std::span<const double> p) const {
        long f = 0;
        for (int i = d_ - 1; i >= 0; --i) f = f * res_[i] + coord_clamped(p[i], i);
        return f;
    }

    int coord_clamped(double x, int axis) const {
        double t = (x - lo_[axis]) / width_[axis];
        long c = static_cast<long>(std::floor(t));
        return static_cast<int>(std::clamp(c, 0L, static_cast<long>(res_[axis] - 1)));
    }

    int max_ring_from(const std::vector<int>& c0) const {
        int m = 0;
        for (int i = 0; i < d_; ++i) m = std::max(m, std::max(c0[i], res_[i] - 1 - c0[i]));
        return m;
    }

    // smallest possible distance from `center` to any cell at Chebyshev ring k;
    // the nearest such cell is reached by moving `ring` cells along one axis
    double ring_lower_bound(std::span<const double> center, const std::vector<int>& c0,
                            int ring) const {
        if (ring == 0) return 0.0;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < d_; ++i) {
            double low_face = lo_[i] + (c0[i] - (ring - 1)) * width_[i];
            double high_face = lo_[i] + (c0[i] + ring) * width_[i];
            best = std::min(best, std::min(center[i] - low_face, high_face - center[i]));
        }
        return std::max(best, 0.0);
    }

    template <class Fn>
    void visit_ring(const std::vector<int>& c0, int ring, Fn&& fn) const {
        std::vector<int> c(d_);
        visit_ring_rec(c0, ring, 0, false, c, fn);
    }

    template <class Fn>
    void visit_ring_rec(const std::vector<int>& c0, int ring, int axis, bool boundary_hit,
                        std::vector<int>& c, Fn&& fn) const {
        if (axis == d_) {
            if (boundary_hit || ring == 0) fn(flat(c));
            return;
        }
        int lo = std::max(0, c0[axis] - ring);
        int hi = std::min(res_[axis] - 1, c0[axis] + ring);
        for (int v = lo; v <= hi; ++v) {
            c[axis] = v;
            bool on_face = (v == c0[axis] - ring) || (v == c0[axis] + ring);
            visit_ring_rec(c0, ring, axis + 1, boundary_hit || on_face, c, fn);
        }
    }

    int d_;
    std::vector<double> lo_, hi_;
    std::vector<int> res_;
    std::vector<double> width_;
    long total_cells_ = 0;
    std::size_t count_ = 0;
    std::vector<std::vector<int>> cells_;
};

} // namespace rgg
