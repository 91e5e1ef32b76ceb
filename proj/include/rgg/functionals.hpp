#pragma once

// Edge-weight functionals and their exact first and second add-one costs.
// Every incremental path is mirrored by a full-rebuild oracle; the two must
// agree to 1e-10 relative on generic inputs. Also provides the cone radius
// R_theta and the L-term that together dominate the ONNG add-one cost.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "rgg/errors.hpp"
#include "rgg/geometry.hpp"
#include "rgg/graphs.hpp"
#include "rgg/grid_index.hpp"
#include "rgg/sampling.hpp"

namespace rgg {

// ---------------------------------------------------------------------------
// Which statistic to compute: a power weight |e|^alpha or a decreasing
// function phi from a fixed catalogue, applied per edge. Zero lengths (the
// "no edge" sentinel) carry weight zero.
// ---------------------------------------------------------------------------
struct FunctionalSpec {
    enum class Weight { power, phi_inv_power, phi_exp };

    Weight weight_kind = Weight::power;
    double param = 1.0; // alpha for power, a for phi(x)=x^{-a}; unused for phi_exp
    GraphFamily family = GraphFamily::onng;

    static FunctionalSpec power(GraphFamily family, double alpha) {
        return {Weight::power, alpha, family};
    }
    static FunctionalSpec phi_inverse_power(GraphFamily family, double a) {
        if (a < 0.0) throw argument_error("phi_inverse_power: need a >= 0");
        return {Weight::phi_inv_power, a, family};
    }
    static FunctionalSpec phi_exponential(GraphFamily family) {
        return {Weight::phi_exp, 0.0, family};
    }

    double weight(double len) const {
        if (len < 0.0) throw argument_error("weight: negative length");
        if (len == 0.0) {
            if (weight_kind == Weight::power && param < 0.0)
                throw numeric_error("weight: zero length with negative exponent");
            return 0.0;
        }
        switch (weight_kind) {
            case Weight::power: return std::pow(len, param);
            case Weight::phi_inv_power: return std::pow(len, -param);
            case Weight::phi_exp: return std::exp(-len);
        }
        return 0.0;
    }

    // exponent range where the normal-approximation rates are established; informational
    bool power_in_clt_range(int d) const {
        if (weight_kind != Weight::power) return true;
        if (family == GraphFamily::onng) return param > 0.0 && param <= 0.5 * d;
        if (family == GraphFamily::gilbert) return param > -0.5 * d;
        return true;
    }
};

struct RewiredEntry {
    int vertex = 0;
    double old_length = 0.0; // 0 = had no edge
    double new_length = 0.0; // 0 = edge removed (knn)
};

struct AddOneCostResult {
    double first_order = 0.0;
    double own_edge_term = 0.0;
    std::vector<RewiredEntry> rewired;
    bool used_fallback = false; // knn incremental falls back to the oracle

    double detail_total(const FunctionalSpec& spec) const {
        double s = own_edge_term;
        for (const auto& r : rewired)
            s += (r.new_length > 0.0 ? spec.weight(r.new_length) : 0.0) -
                 (r.old_length > 0.0 ? spec.weight(r.old_length) : 0.0);
        return s;
    }
};

// ---------------------------------------------------------------------------
// evaluate: sum of edge weights. kNN/Gilbert edges are stored once per
// undirected edge, ONNG/RST once per vertex with an out-edge.
// ---------------------------------------------------------------------------
inline double evaluate(const FunctionalSpec& spec, const GeometricGraph& g) {
    if (spec.family != g.family) throw argument_error("evaluate: graph family mismatch");
    double s = 0.0;
    for (const Edge& e : g.edges) s += spec.weight(e.length);
    if (!std::isfinite(s)) throw numeric_error("evaluate: nonfinite functional value");
    return s;
}

namespace detail {

inline GeometricGraph build_family(const FunctionalSpec& spec, const MarkedPointConfig& cfg,
                                   double epsilon, int k, bool use_index = true) {
    switch (spec.family) {
        case GraphFamily::onng: return build_onng(cfg, use_index);
        case GraphFamily::gilbert: return build_gilbert(cfg, epsilon, use_index);
        case GraphFamily::knn: return build_knn(cfg, k, use_index);
        case GraphFamily::rst: return build_rst(cfg, use_index);
    }
    throw argument_error("build_family: bad family");
}

// per-vertex out-edge length for onng/rst; 0 = no edge
inline std::vector<double> out_edge_lengths(const GeometricGraph& g) {
    std::vector<double> len(g.vertex_count(), 0.0);
    for (const Edge& e : g.edges) len[static_cast<std::size_t>(e.i)] = e.length;
    return len;
}

} // namespace detail

// A graph together with the configuration it was built on. Used by the
// incremental insertion helpers, where the augmented configuration must
// outlive the returned graph.
struct OwnedGraph {
    std::shared_ptr<const MarkedPointConfig> config;
    GeometricGraph graph;
};

// Insert one point into an existing graph without a full rebuild (O(n) for
// onng/rst/gilbert). kNN has no incremental path and rebuilds.
inline OwnedGraph insert_point(const GeometricGraph& g, std::span<const double> pos,
                               std::optional<double> mark = {}) {
    const MarkedPointConfig& cfg = *g.config;
    auto cfg_y = std::make_shared<MarkedPointConfig>(cfg.add_point(pos, mark));
    const int n = static_cast<int>(cfg.size());
    OwnedGraph out;
    out.config = cfg_y;
    GeometricGraph& ng = out.graph;
    ng.family = g.family;
    ng.epsilon = g.epsilon;
    ng.k = g.k;
    ng.config = cfg_y.get();

    switch (g.family) {
        case GraphFamily::onng: {
            if (!mark) throw argument_error("insert_point: onng insertion needs a mark");
            const double s = *mark;
            auto lengths = detail::out_edge_lengths(g);
            ng.connects_to = g.connects_to;
            ng.connects_to.push_back(no_target);
            std::vector<double> nlen = lengths;
            nlen.push_back(0.0);
            // the new point's own target: nearest among strictly earlier marks
            auto own = nearest_in_subset(cfg, pos, [&](int j) { return cfg.mark(j) < s; });
            if (own) {
                ng.connects_to[n] = own->first;
                nlen[n] = own->second;
            }
            // later-marked vertices rewire when the new point is closer
            for (int v = 0; v < n; ++v) {
                if (cfg.mark(v) <= s) continue;
                double cand = distance(cfg.position(v), pos);
                if (ng.connects_to[v] == no_target || cand < lengths[v]) {
                    ng.connects_to[v] = n;
                    nlen[v] = cand;
                }
            }
            for (int v = 0; v <= n; ++v)
                if (ng.connects_to[v] != no_target) ng.edges.push_back({v, ng.connects_to[v], nlen[v]});
            break;
        }
        case GraphFamily::rst: {
            const double rx = norm(pos);
            if (rx == 0.0) throw degenerate_input_error("insert_point: point at the origin");
            auto lengths = detail::out_edge_lengths(g);
            ng.connects_to = g.connects_to;
            ng.connects_to.push_back(origin_vertex);
            std::vector<double> nlen = lengths;
            nlen.push_back(rx);
            auto own = nearest_in_subset(cfg, pos,
                                         [&](int j) { return norm(cfg.position(j)) < rx; });
            if (own && own->second < rx) {
                ng.connects_to[n] = own->first;
                nlen[n] = own->second;
            }
            for (int v = 0; v < n; ++v) {
                if (norm(cfg.position(v)) <= rx) continue;
                double cand = distance(cfg.position(v), pos);
                if (cand < lengths[v]) {
                    ng.connects_to[v] = n;
                    nlen[v] = cand;
                }
            }
            for (int v = 0; v <= n; ++v) ng.edges.push_back({v, ng.connects_to[v], nlen[v]});
            break;
        }
        case GraphFamily::gilbert: {
            ng.edges = g.edges;
            for (int v = 0; v < n; ++v) {
                double len = distance(cfg.position(v), pos);
                if (len < g.epsilon) ng.edges.push_back({v, n, len});
            }
            std::sort(ng.edges.begin(), ng.edges.end(), [](const Edge& a, const Edge& b) {
                return a.i != b.i ? a.i < b.i : a.j < b.j;
            });
            break;
        }
        case GraphFamily::knn: {
            ng = build_knn(*cfg_y, g.k);
            ng.config = cfg_y.get();
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// First-order add-one cost D_x F = F(mu + delta_x) - F(mu).
// ---------------------------------------------------------------------------

// exact by full rebuild; detail reconstructed from the edge diff
inline AddOneCostResult add_one_cost_oracle(const FunctionalSpec& spec,
                                            const MarkedPointConfig& cfg,
                                            std::span<const double> pos,
                                            std::optional<double> mark = {}, double epsilon = 0.0,
                                            int k = 0) {
    MarkedPointConfig cfg_y = cfg.add_point(pos, mark);
    GeometricGraph g_old = detail::build_family(spec, cfg, epsilon, k);
    GeometricGraph g_new = detail::build_family(spec, cfg_y, epsilon, k);
    const int n = static_cast<int>(cfg.size());

    AddOneCostResult res;
    res.first_order = evaluate(spec, g_new) - evaluate(spec, g_old);

    if (spec.family == GraphFamily::onng || spec.family == GraphFamily::rst) {
        auto len_old = detail::out_edge_lengths(g_old);
        auto len_new = detail::out_edge_lengths(g_new);
        if (!g_new.connects_to.empty() && g_new.connects_to[n] != no_target)
            res.own_edge_term = spec.weight(len_new[n]);
        for (int v = 0; v < n; ++v) {
            bool changed = g_old.connects_to[v] != g_new.connects_to[v];
            if (changed) res.rewired.push_back({v, len_old[v], len_new[v]});
        }
    } else {
        // gilbert/knn: the diff of undirected edge sets
        auto key = [](const Edge& e) { return std::pair<int, int>(e.i, e.j); };
        std::size_t io = 0;
        double own = 0.0;
        for (const Edge& e : g_new.edges) {
            if (e.i == n || e.j == n) {
                own += spec.weight(e.length);
                continue;
            }
            while (io < g_old.edges.size() && key(g_old.edges[io]) < key(e)) {
                res.rewired.push_back({g_old.edges[io].i, g_old.edges[io].length, 0.0});
                ++io;
            }
            if (io < g_old.edges.size() && key(g_old.edges[io]) == key(e)) ++io;
        }
        while (io < g_old.edges.size()) {
            res.rewired.push_back({g_old.edges[io].i, g_old.edges[io].length, 0.0});
            ++io;
        }
        res.own_edge_term = own;
    }
    return res;
}

// incremental path; equals the oracle on generic inputs
inline AddOneCostResult add_one_cost_fast(const FunctionalSpec& spec,
                                          const MarkedPointConfig& cfg, const GeometricGraph& g,
                                          std::span<const double> pos,
                                          std::optional<double> mark = {}) {
    if (g.config != &cfg) throw argument_error("add_one_cost_fast: graph was not built from config");
    AddOneCostResult res;
    const int n = static_cast<int>(cfg.size());
    switch (spec.family) {
        case GraphFamily::onng: {
            if (!cfg.marked() || !mark) throw argument_error("add_one_cost_fast: onng needs marks");
            const double s = *mark;
            auto lengths = detail::out_edge_lengths(g);
            auto own = nearest_in_subset(cfg, pos, [&](int j) { return cfg.mark(j) < s; });
            res.own_edge_term = own ? spec.weight(own->second) : 0.0;
            for (int v = 0; v < n; ++v) {
                if (cfg.mark(v) <= s) continue;
                double cand = distance(cfg.position(v), pos);
                bool had_edge = g.connects_to[v] != no_target;
                if (!had_edge || cand < lengths[v])
                    res.rewired.push_back({v, had_edge ? lengths[v] : 0.0, cand});
            }
            break;
        }
        case GraphFamily::rst: {
            const double rx = norm(pos);
            if (rx == 0.0) throw degenerate_input_error("add_one_cost_fast: probe at the origin");
            auto lengths = detail::out_edge_lengths(g);
            auto own = nearest_in_subset(cfg, pos,
                                         [&](int j) { return norm(cfg.position(j)) < rx; });
            double glen = own ? std::min(own->second, rx) : rx;
            res.own_edge_term = spec.weight(glen);
            for (int v = 0; v < n; ++v) {
                if (norm(cfg.position(v)) <= rx) continue;
                double cand = distance(cfg.position(v), pos);
                if (cand < lengths[v]) res.rewired.push_back({v, lengths[v], cand});
            }
            break;
        }
        case GraphFamily::gilbert: {
            double own = 0.0;
            for (int v = 0; v < n; ++v) {
                double len = distance(cfg.position(v), pos);
                if (len < g.epsilon) own += spec.weight(len);
            }
            res.own_edge_term = own;
            break;
        }
        case GraphFamily::knn: {
            res = add_one_cost_oracle(spec, cfg, pos, mark, g.epsilon, g.k);
            res.used_fallback = true;
            return res;
        }
    }
    res.first_order = res.detail_total(spec);
    if (!std::isfinite(res.first_order)) throw numeric_error("add_one_cost_fast: nonfinite cost");
    return res;
}

// ---------------------------------------------------------------------------
// Second-order add-one cost D^2_{x,y} F = D_x F(mu + delta_y) - D_x F(mu),
// computed as a diff of two incremental first-order costs sharing the base
// graph. Symmetric in (x,y).
// ---------------------------------------------------------------------------
inline double second_add_one_cost(const FunctionalSpec& spec, const MarkedPointConfig& cfg,
                                  const GeometricGraph& g, std::span<const double> x_pos,
                                  std::optional<double> x_mark, std::span<const double> y_pos,
                                  std::optional<double> y_mark) {
    if (spec.family == GraphFamily::gilbert) {
        double len = distance(x_pos, y_pos);
        return len < g.epsilon ? spec.weight(len) : 0.0;
    }
    if (spec.family == GraphFamily::knn) {
        MarkedPointConfig cfg_y = cfg.add_point(y_pos, y_mark);
        double d1 = add_one_cost_oracle(spec, cfg_y, x_pos, x_mark, g.epsilon, g.k).first_order;
        double d0 = add_one_cost_oracle(spec, cfg, x_pos, x_mark, g.epsilon, g.k).first_order;
        return d1 - d0;
    }
    OwnedGraph with_y = insert_point(g, y_pos, y_mark);
    double d1 = add_one_cost_fast(spec, *with_y.config, with_y.graph, x_pos, x_mark).first_order;
    double d0 = add_one_cost_fast(spec, cfg, g, x_pos, x_mark).first_order;
    return d1 - d0;
}

inline double second_add_one_cost(const FunctionalSpec& spec, const MarkedPointConfig& cfg,
                                  std::span<const double> x_pos, std::optional<double> x_mark,
                                  std::span<const double> y_pos, std::optional<double> y_mark,
                                  double epsilon = 0.0, int k = 0) {
    GeometricGraph g = detail::build_family(spec, cfg, epsilon, k);
    return second_add_one_cost(spec, cfg, g, x_pos, x_mark, y_pos, y_mark);
}

// ---------------------------------------------------------------------------
// Cone radius R_theta(x): per cone, the distance to the nearest point of mark
// below theta inside the widened cone, capped at the body diameter (a valid
// upper bound for the per-cone reach s_i); then the maximum over cones.
// ---------------------------------------------------------------------------
inline double onng_radius(const MarkedPointConfig& cfg, std::span<const double> x, double theta,
                          const ConeCover& cover, bool use_index = false) {
    if (!cfg.marked()) throw argument_error("onng_radius: configuration must be marked");
    if (cover.dim != cfg.dim()) throw argument_error("onng_radius: cover dimension mismatch");
    const double cap = cfg.body().diameter();
    const std::size_t K = cover.size();
    std::vector<double> best(K, cap);

    std::vector<double> diff(cfg.dim());
    auto offer = [&](int j) {
        if (!(cfg.mark(j) < theta)) return;
        auto p = cfg.position(j);
        double len2 = 0.0;
        for (int i = 0; i < cfg.dim(); ++i) {
            diff[i] = p[i] - x[i];
            len2 += diff[i] * diff[i];
        }
        double len = std::sqrt(len2);
        if (len == 0.0) return;
        for (std::size_t i = 0; i < K; ++i) {
            if (len < best[i] && cover.widened[i].contains_direction(diff)) best[i] = len;
        }
    };

    if (!use_index) {
        for (std::size_t j = 0; j < cfg.size(); ++j) offer(static_cast<int>(j));
    } else {
        std::vector<double> lo, hi;
        cfg.body().bounding_box(lo, hi);
        GridIndex idx(cfg.dim(), std::move(lo), std::move(hi), detail::suggested_cell_size(cfg));
        for (std::size_t j = 0; j < cfg.size(); ++j) idx.insert(static_cast<int>(j), cfg.position(j));
        idx.scan_by_rings(
            x,
            [&](double lb) {
                // all cones are final once their current best cannot improve
                for (double b : best)
                    if (b > lb) return true;
                return false;
            },
            offer);
    }
    double r = 0.0;
    for (double b : best) r = std::max(r, b);
    return r;
}

// ---------------------------------------------------------------------------
// L-term: sum of the OLD edge weights of the later-marked points that rewire
// to (x,s) upon insertion. A later point with no previous edge contributes
// weight(0) = 0.
// ---------------------------------------------------------------------------
inline double onng_L_term(const FunctionalSpec& spec, const MarkedPointConfig& cfg,
                          const GeometricGraph& g, std::span<const double> x, double s) {
    if (!cfg.marked()) throw argument_error("onng_L_term: configuration must be marked");
    auto lengths = detail::out_edge_lengths(g);
    double total = 0.0;
    for (std::size_t v = 0; v < cfg.size(); ++v) {
        if (cfg.mark(v) <= s) continue;
        bool had_edge = g.connects_to[v] != no_target;
        double cand = distance(cfg.position(v), x);
        if (!had_edge || cand < lengths[v]) total += had_edge ? spec.weight(lengths[v]) : 0.0;
    }
    return total;
}

inline double onng_L_term(const FunctionalSpec& spec, const MarkedPointConfig& cfg,
                          std::span<const double> x, double s) {
    GeometricGraph g = build_onng(cfg);
    return onng_L_term(spec, cfg, g, x, s);
}

} // namespace rgg
