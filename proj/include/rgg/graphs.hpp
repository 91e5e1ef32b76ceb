#pragma once

// The four graph families built on a point configuration. Each builder has a
// grid-accelerated path and a brute-force path; the two must agree exactly on
// generic inputs, which the test suite checks edge-for-edge.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rgg/errors.hpp"
#include "rgg/geometry.hpp"
#include "rgg/grid_index.hpp"
#include "rgg/sampling.hpp"

namespace rgg {

enum class GraphFamily { onng, gilbert, knn, rst };

inline const char* family_name(GraphFamily f) {
    switch (f) {
        case GraphFamily::onng: return "onng";
        case GraphFamily::gilbert: return "gilbert";
        case GraphFamily::knn: return "knn";
        case GraphFamily::rst: return "rst";
    }
    return "?";
}

inline GraphFamily family_from_name(const std::string& s) {
    if (s == "onng") return GraphFamily::onng;
    if (s == "gilbert") return GraphFamily::gilbert;
    if (s == "knn") return GraphFamily::knn;
    if (s == "rst") return GraphFamily::rst;
    throw argument_error("unknown graph family: " + s);
}

// vertex index -1 denotes the synthetic origin vertex of the RST
inline constexpr int origin_vertex = -1;
// connects_to sentinel for "no outgoing edge" (the minimal-mark ONNG vertex)
inline constexpr int no_target = -2;

struct Edge {
    int i = 0;
    int j = 0;
    double length = 0.0;
};

struct GeometricGraph {
    GraphFamily family = GraphFamily::gilbert;
    double epsilon = 0.0; // gilbert
    int k = 0;            // knn
    std::vector<Edge> edges;
    std::vector<int> connects_to; // per-vertex target (onng/rst), else empty
    const MarkedPointConfig* config = nullptr;

    std::size_t vertex_count() const { return config ? config->size() : 0; }
};

namespace detail {

inline double suggested_cell_size(const MarkedPointConfig& cfg, double floor_size = 0.0) {
    const int d = cfg.dim();
    const double n = std::max<double>(1.0, static_cast<double>(cfg.size()));
    double mean_spacing = std::pow(cfg.body().volume() / n, 1.0 / d);
    return std::max(mean_spacing, floor_size);
}

inline GridIndex build_index(const MarkedPointConfig& cfg, double cell_size) {
    std::vector<double> lo, hi;
    cfg.body().bounding_box(lo, hi);
    GridIndex g(cfg.dim(), std::move(lo), std::move(hi), cell_size);
    for (std::size_t i = 0; i < cfg.size(); ++i) g.insert(static_cast<int>(i), cfg.position(i));
    return g;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Online nearest neighbour graph: every point connects to the spatially
// nearest point of strictly smaller mark. Built by inserting points in mark
// order into a grid, mirroring the online semantics.
// ---------------------------------------------------------------------------
inline GeometricGraph build_onng(const MarkedPointConfig& cfg, bool use_index = true) {
    if (!cfg.marked()) throw argument_error("build_onng: configuration must be marked");
    const std::size_t n = cfg.size();
    GeometricGraph g;
    g.family = GraphFamily::onng;
    g.config = &cfg;
    g.connects_to.assign(n, no_target);
    if (n < 2) return g;

    std::vector<int> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return cfg.mark(a) < cfg.mark(b); });

    g.edges.reserve(n - 1);
    if (use_index) {
        std::vector<double> lo, hi;
        cfg.body().bounding_box(lo, hi);
        GridIndex idx(cfg.dim(), std::move(lo), std::move(hi), detail::suggested_cell_size(cfg));
        std::span<const double> flat{cfg.raw_positions()};
        idx.insert(order[0], cfg.position(order[0]));
        for (std::size_t r = 1; r < n; ++r) {
            int v = order[r];
            auto hit = idx.nearest(cfg.position(v), flat);
            g.connects_to[v] = hit->first;
            g.edges.push_back({v, hit->first, hit->second});
            idx.insert(v, cfg.position(v));
        }
    } else {
        for (std::size_t r = 1; r < n; ++r) {
            int v = order[r];
            int best = -1;
            double best2 = std::numeric_limits<double>::infinity();
            for (std::size_t q = 0; q < r; ++q) {
                int u = order[q];
                double d2 = squared_distance(cfg.position(v), cfg.position(u));
                if (d2 < best2) {
                    best2 = d2;
                    best = u;
                }
            }
            g.connects_to[v] = best;
            g.edges.push_back({v, best, std::sqrt(best2)});
        }
    }
    // canonical edge order: by source vertex
    std::sort(g.edges.begin(), g.edges.end(), [](const Edge& a, const Edge& b) { return a.i < b.i; });
    return g;
}

// ---------------------------------------------------------------------------
// Gilbert graph: edge iff |x-y| < epsilon (strict). Edges stored once, i < j.
// ---------------------------------------------------------------------------
inline GeometricGraph build_gilbert(const MarkedPointConfig& cfg, double epsilon,
                                    bool use_index = true) {
    if (!(epsilon > 0.0)) throw argument_error("build_gilbert: epsilon must be positive");
    const std::size_t n = cfg.size();
    GeometricGraph g;
    g.family = GraphFamily::gilbert;
    g.epsilon = epsilon;
    g.config = &cfg;
    if (n < 2) return g;
    if (use_index) {
        GridIndex idx = detail::build_index(cfg, std::max(epsilon, detail::suggested_cell_size(cfg)));
        std::span<const double> flat{cfg.raw_positions()};
        std::vector<int> hits;
        for (std::size_t i = 0; i < n; ++i) {
            idx.query_ball(cfg.position(i), epsilon, flat, hits);
            for (int j : hits) {
                if (j <= static_cast<int>(i)) continue;
                double len = distance(cfg.position(i), cfg.position(j));
                if (len < epsilon) g.edges.push_back({static_cast<int>(i), j, len});
            }
        }
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                double len = distance(cfg.position(i), cfg.position(j));
                if (len < epsilon) g.edges.push_back({static_cast<int>(i), static_cast<int>(j), len});
            }
    }
    std::sort(g.edges.begin(), g.edges.end(),
              [](const Edge& a, const Edge& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
    return g;
}

// ---------------------------------------------------------------------------
// k-nearest neighbour graph: undirected union of the directed k-NN relations.
// ---------------------------------------------------------------------------
inline GeometricGraph build_knn(const MarkedPointConfig& cfg, int k, bool use_index = true) {
    const std::size_t n = cfg.size();
    if (k < 1) throw argument_error("build_knn: k must be >= 1");
    if (n <= static_cast<std::size_t>(k))
        throw argument_error("build_knn: need more than k points");
    GeometricGraph g;
    g.family = GraphFamily::knn;
    g.k = k;
    g.config = &cfg;

    std::vector<std::vector<int>> nbr(n);
    if (use_index) {
        GridIndex idx = detail::build_index(
            cfg, detail::suggested_cell_size(cfg) * std::pow(static_cast<double>(k), 1.0 / cfg.dim()));
        std::span<const double> flat{cfg.raw_positions()};
        std::vector<std::pair<double, int>> found;
        for (std::size_t i = 0; i < n; ++i) {
            const int self = static_cast<int>(i);
            idx.k_nearest(cfg.position(i), flat, k, [self](int j) { return j != self; }, found);
            for (auto& [len, j] : found) nbr[i].push_back(j);
        }
    } else {
        std::vector<std::pair<double, int>> ds(n);
        for (std::size_t i = 0; i < n; ++i) {
            ds.clear();
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) ds.push_back({squared_distance(cfg.position(i), cfg.position(j)),
                                          static_cast<int>(j)});
            std::partial_sort(ds.begin(), ds.begin() + k, ds.end());
            for (int q = 0; q < k; ++q) nbr[i].push_back(ds[q].second);
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (int j : nbr[i]) {
            if (j > static_cast<int>(i)) {
                g.edges.push_back({static_cast<int>(i), j,
                                   distance(cfg.position(i), cfg.position(j))});
            } else {
                // keep only if not already present as j's neighbour
                bool dup = std::find(nbr[j].begin(), nbr[j].end(), static_cast<int>(i)) != nbr[j].end();
                if (!dup)
                    g.edges.push_back({j, static_cast<int>(i),
                                       distance(cfg.position(i), cfg.position(j))});
            }
        }
    std::sort(g.edges.begin(), g.edges.end(),
              [](const Edge& a, const Edge& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
    g.edges.erase(std::unique(g.edges.begin(), g.edges.end(),
                              [](const Edge& a, const Edge& b) { return a.i == b.i && a.j == b.j; }),
                  g.edges.end());
    return g;
}

// ---------------------------------------------------------------------------
// Radial spanning tree: every point connects to the nearest point of
// (mu + origin) strictly closer to the origin. j = origin_vertex for edges
// into the origin.
// ---------------------------------------------------------------------------
inline GeometricGraph build_rst(const MarkedPointConfig& cfg, bool use_index = true) {
    const std::size_t n = cfg.size();
    GeometricGraph g;
    g.family = GraphFamily::rst;
    g.config = &cfg;
    g.connects_to.assign(n, no_target);

    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        norms[i] = norm(cfg.position(i));
        if (norms[i] == 0.0) throw degenerate_input_error("build_rst: point at the origin");
    }
    if (n == 0) return g;
    g.edges.reserve(n);

    std::optional<GridIndex> idx;
    if (use_index) {
        std::vector<double> lo, hi;
        cfg.body().bounding_box(lo, hi);
        idx.emplace(cfg.dim(), std::move(lo), std::move(hi), detail::suggested_cell_size(cfg));
        for (std::size_t i = 0; i < n; ++i) idx->insert(static_cast<int>(i), cfg.position(i));
    }
    std::span<const double> flat{cfg.raw_positions()};
    for (std::size_t i = 0; i < n; ++i) {
        int best = origin_vertex;
        double best_len = norms[i]; // the origin itself is always a candidate
        if (use_index) {
            double ri = norms[i];
            auto hit = idx->nearest(cfg.position(i), flat,
                                    [&](int j) { return norms[j] < ri && j != static_cast<int>(i); });
            if (hit && hit->second < best_len) {
                best = hit->first;
                best_len = hit->second;
            }
        } else {
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i || norms[j] >= norms[i]) continue;
                double len = distance(cfg.position(i), cfg.position(j));
                if (len < best_len) {
                    best = static_cast<int>(j);
                    best_len = len;
                }
            }
        }
        g.connects_to[i] = best;
        g.edges.push_back({static_cast<int>(i), best, best_len});
    }
    return g;
}

// ---------------------------------------------------------------------------
// Query helpers shared by the functionals module; exact on generic inputs.
// ---------------------------------------------------------------------------
inline std::optional<std::pair<int, double>> nearest_in_subset(
    const MarkedPointConfig& cfg, std::span<const double> x,
    const std::function<bool(int)>& predicate) {
    int best = -1;
    double best2 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cfg.size(); ++j) {
        if (predicate && !predicate(static_cast<int>(j))) continue;
        double d2 = squared_distance(cfg.position(j), x);
        if (d2 < best2) {
            best2 = d2;
            best = static_cast<int>(j);
        }
    }
    if (best < 0) return std::nullopt;
    return std::make_pair(best, std::sqrt(best2));
}

inline std::vector<int> points_in_ball(const MarkedPointConfig& cfg, std::span<const double> center,
                                       double radius) {
    std::vector<int> out;
    const double r2 = radius * radius;
    for (std::size_t j = 0; j < cfg.size(); ++j)
        if (squared_distance(cfg.position(j), center) <= r2) out.push_back(static_cast<int>(j));
    return out;
}

// Edge-list text format: header with family and parameters, then one line
// `i j length` per edge.
inline void write_graph(std::ostream& os, const GeometricGraph& g) {
    os << family_name(g.family);
    char buf[64];
    if (g.family == GraphFamily::gilbert) {
        std::snprintf(buf, sizeof buf, " epsilon=%.17g", g.epsilon);
        os << buf;
    }
    if (g.family == GraphFamily::knn) os << " k=" << g.k;
    os << " edges=" << g.edges.size() << '\n';
    for (const Edge& e : g.edges) {
        std::snprintf(buf, sizeof buf, "%d %d %.17g\n", e.i, e.j, e.length);
        os << buf;
    }
}

} // namespace rgg
