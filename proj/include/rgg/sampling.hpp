#pragma once

// Seeded sampling of (marked) homogeneous Poisson point processes on convex
// bodies, plus Poisson moment utilities. Configurations are immutable after
// construction and safe to share across workers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <string>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "rgg/errors.hpp"
#include "rgg/geometry.hpp"
#include "rgg/rng.hpp"

namespace rgg {

struct MarkedPoint {
    std::vector<double> position;
    std::optional<double> mark;
};

struct SeedRecord {
    std::uint64_t base_seed = 0;
    std::uint64_t stream_id = 0;
    bool operator==(const SeedRecord&) const = default;
};

// Above this size the genericity check drops the exhaustive pairwise-distance
// comparison (O(n^2 log n)) and only verifies distinct positions and marks.
inline constexpr std::size_t genericity_exhaustive_limit = 512;

class MarkedPointConfig {
public:
    MarkedPointConfig(ConvexBody body, bool marked, SeedRecord seed = {})
        : body_(std::move(body)), marked_(marked), seed_(seed) {}

    const ConvexBody& body() const { return body_; }
    bool marked() const { return marked_; }
    const SeedRecord& seed_record() const { return seed_; }
    int dim() const { return body_.dim(); }
    std::size_t size() const { return marked_ ? marks_.size() : positions_.size() / body_.dim(); }

    std::span<const double> position(std::size_t i) const {
        return {positions_.data() + i * body_.dim(), static_cast<std::size_t>(body_.dim())};
    }
    double mark(std::size_t i) const { return marks_[i]; }
    const std::vector<double>& raw_positions() const { return positions_; }
    const std::vector<double>& raw_marks() const { return marks_; }

    MarkedPointConfig add_point(const MarkedPoint& p) const { return add_point(p.position, p.mark); }

    // Appends one point; the original configuration is left unchanged.
    MarkedPointConfig add_point(std::span<const double> pos, std::optional<double> mark = {}) const {
        if (pos.size() != static_cast<std::size_t>(dim()))
            throw argument_error("add_point: dimension mismatch");
        if (!body_.contains(pos)) throw argument_error("add_point: position outside body");
        if (marked_ != mark.has_value())
            throw argument_error("add_point: mark presence must match the configuration");
        MarkedPointConfig out = *this;
        out.positions_.insert(out.positions_.end(), pos.begin(), pos.end());
        if (marked_) out.marks_.push_back(*mark);
        if (!out.check_generic())
            throw degenerate_input_error("add_point: resulting configuration is not generic");
        return out;
    }

    MarkedPointConfig without_last() const {
        if (size() == 0) throw argument_error("without_last: empty configuration");
        MarkedPointConfig out = *this;
        out.positions_.resize(out.positions_.size() - dim());
        if (marked_) out.marks_.pop_back();
        return out;
    }

    bool operator==(const MarkedPointConfig& o) const {
        return body_ == o.body_ && marked_ == o.marked_ && positions_ == o.positions_ &&
               marks_ == o.marks_;
    }

    // Distinct positions and (when marked) distinct marks; for small
    // configurations additionally all pairwise distances distinct.
    bool check_generic(int* offending = nullptr) const {
        const std::size_t n = size();
        if (marked_) {
            std::vector<std::pair<double, int>> ms(n);
            for (std::size_t i = 0; i < n; ++i) ms[i] = {marks_[i], static_cast<int>(i)};
            std::sort(ms.begin(), ms.end());
            for (std::size_t i = 1; i < n; ++i)
                if (ms[i].first == ms[i - 1].first) {
                    if (offending) *offending = std::max(ms[i].second, ms[i - 1].second);
                    return false;
                }
        }
        if (n < 2) return true;
        if (n <= genericity_exhaustive_limit) {
            std::vector<std::pair<double, std::pair<int, int>>> ds;
            ds.reserve(n * (n - 1) / 2);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    ds.push_back({squared_distance(position(i), position(j)),
                                  {static_cast<int>(i), static_cast<int>(j)}});
            std::sort(ds.begin(), ds.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (ds.front().first == 0.0) {
                if (offending) *offending = ds.front().second.second;
                return false;
            }
            for (std::size_t i = 1; i < ds.size(); ++i)
                if (ds[i].first == ds[i - 1].first) {
                    if (offending) *offending = std::max(ds[i].second.second, ds[i - 1].second.second);
                    return false;
                }
            return true;
        }
        // large configuration: lexicographic position uniqueness only
        std::vector<int> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<int>(i);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) {
            auto pa = position(a), pb = position(b);
            return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
        });
        for (std::size_t i = 1; i < n; ++i) {
            auto pa = position(idx[i - 1]), pb = position(idx[i]);
            if (std::equal(pa.begin(), pa.end(), pb.begin())) {
                if (offending) *offending = std::max(idx[i], idx[i - 1]);
                return false;
            }
        }
        return true;
    }

    void write(std::ostream& os) const;
    static MarkedPointConfig read(std::istream& is);

    // used by the sampler below
    void append_unchecked(std::span<const double> pos, std::optional<double> mark) {
        positions_.insert(positions_.end(), pos.begin(), pos.end());
        if (marked_) marks_.push_back(*mark);
    }
    void set_point(std::size_t i, std::span<const double> pos, std::optional<double> mark) {
        std::copy(pos.begin(), pos.end(), positions_.begin() + i * dim());
        if (marked_) marks_[i] = *mark;
    }

private:
    ConvexBody body_;
    bool marked_;
    SeedRecord seed_;
    std::vector<double> positions_; // flat, n*d
    std::vector<double> marks_;     // n when marked, else empty
};

// uniform point inside the body; rejection-free for both body kinds
inline void sample_uniform_in_body(const ConvexBody& body, RngStream& rng, std::vector<double>& out) {
    const int d = body.dim();
    out.resize(d);
    if (body.kind() == ConvexBody::Kind::box) {
        for (int i = 0; i < d; ++i) out[i] = rng.uniform(body.box_min()[i], body.box_max()[i]);
        return;
    }
    // direction from normalized Gaussians, radius via U^{1/d} scaling
    double nn = 0.0;
    do {
        nn = 0.0;
        for (int i = 0; i < d; ++i) {
            out[i] = rng.normal();
            nn += out[i] * out[i];
        }
    } while (nn == 0.0);
    double r = body.ball_radius() * std::pow(rng.uniform01(), 1.0 / d) / std::sqrt(nn);
    for (int i = 0; i < d; ++i) out[i] = body.ball_center()[i] + r * out[i];
}

// Homogeneous Poisson sample on the body: count ~ Poisson(intensity * volume),
// positions i.i.d. uniform, marks i.i.d. uniform [0,1]. Genericity violations
// are resolved by resampling the offending point up to 16 times.
inline MarkedPointConfig sample_poisson(const ConvexBody& body, double intensity, bool marked,
                                        RngStream stream) {
    if (intensity < 0.0) throw argument_error("sample_poisson: intensity must be >= 0");
    MarkedPointConfig cfg(body, marked, SeedRecord{stream.base_seed(), stream.stream_id()});
    const long n = stream.poisson(intensity * body.volume());
    std::vector<double> pos;
    for (long i = 0; i < n; ++i) {
        sample_uniform_in_body(body, stream, pos);
        std::optional<double> mk;
        if (marked) mk = stream.uniform01();
        cfg.append_unchecked(pos, mk);
    }
    for (int attempt = 0; attempt < 16; ++attempt) {
        int bad = -1;
        if (cfg.check_generic(&bad)) return cfg;
        sample_uniform_in_body(body, stream, pos);
        std::optional<double> mk;
        if (marked) mk = stream.uniform01();
        cfg.set_point(static_cast<std::size_t>(bad), pos, mk);
    }
    if (!cfg.check_generic()) throw degenerate_input_error("sample_poisson: could not restore genericity");
    return cfg;
}

// ---------------------------------------------------------------------------
// Poisson raw moments via Stirling numbers of the second kind:
// E Z^m = sum_{i=1}^m S(m,i) lambda^i for Z ~ Poisson(lambda).
// ---------------------------------------------------------------------------
inline constexpr int poisson_moment_max_order = 30;

inline double poisson_raw_moment(double lambda, int m) {
    if (lambda < 0.0) throw argument_error("poisson_raw_moment: lambda must be >= 0");
    if (m < 1 || m > poisson_moment_max_order)
        throw argument_error("poisson_raw_moment: order outside table range [1,30]");
    // S(m,i) by the triangle recurrence, kept per call; m <= 30 so this is cheap
    std::vector<double> s(static_cast<std::size_t>(m) + 1, 0.0), next(s);
    s[0] = 1.0; // S(0,0)
    for (int row = 1; row <= m; ++row) {
        next.assign(s.size(), 0.0);
        for (int i = 1; i <= row; ++i) next[i] = i * s[i] + s[i - 1];
        s.swap(next);
    }
    double acc = 0.0;
    for (int i = m; i >= 1; --i) acc = acc * lambda + s[i];
    return acc * lambda;
}

inline double bell_number(int m) {
    if (m < 0 || m > poisson_moment_max_order) throw argument_error("bell_number: out of range");
    return m == 0 ? 1.0 : poisson_raw_moment(1.0, m);
}

// ---------------------------------------------------------------------------
// Plain-text serialization: header line `d marked n seed stream`, then one
// point per line (coordinates, optional mark) with 17 significant digits.
// The body itself is written on a second header line.
// ---------------------------------------------------------------------------
inline void MarkedPointConfig::write(std::ostream& os) const {
    const std::size_t n = size();
    char buf[64];
    os << dim() << ' ' << (marked_ ? 1 : 0) << ' ' << n << ' ' << seed_.base_seed << ' '
       << seed_.stream_id << '\n';
    if (body_.kind() == ConvexBody::Kind::ball) {
        os << "ball";
        for (double v : body_.ball_center()) {
            std::snprintf(buf, sizeof buf, " %.17g", v);
            os << buf;
        }
        std::snprintf(buf, sizeof buf, " %.17g", body_.ball_radius());
        os << buf << '\n';
    } else {
        os << "box";
        for (double v : body_.box_min()) {
            std::snprintf(buf, sizeof buf, " %.17g", v);
            os << buf;
        }
        for (double v : body_.box_max()) {
            std::snprintf(buf, sizeof buf, " %.17g", v);
            os << buf;
        }
        os << '\n';
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto p = position(i);
        for (int k = 0; k < dim(); ++k) {
            std::snprintf(buf, sizeof buf, "%s%.17g", k ? " " : "", p[k]);
            os << buf;
        }
        if (marked_) {
            std::snprintf(buf, sizeof buf, " %.17g", marks_[i]);
            os << buf;
        }
        os << '\n';
    }
}

inline MarkedPointConfig MarkedPointConfig::read(std::istream& is) {
    int d = 0, marked_flag = 0;
    std::size_t n = 0;
    SeedRecord seed;
    if (!(is >> d >> marked_flag >> n >> seed.base_seed >> seed.stream_id))
        throw argument_error("MarkedPointConfig::read: bad header");
    std::string kind;
    is >> kind;
    ConvexBody body = ConvexBody::unit_box(std::max(d, 1));
    if (kind == "ball") {
        std::vector<double> c(d);
        double r;
        for (auto& v : c) is >> v;
        is >> r;
        body = ConvexBody::ball(std::move(c), r);
    } else if (kind == "box") {
        std::vector<double> lo(d), hi(d);
        for (auto& v : lo) is >> v;
        for (auto& v : hi) is >> v;
        body = ConvexBody::box(std::move(lo), std::move(hi));
    } else {
        throw argument_error("MarkedPointConfig::read: unknown body kind");
    }
    MarkedPointConfig cfg(body, marked_flag != 0, seed);
    std::vector<double> p(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : p) is >> v;
        std::optional<double> mk;
        if (marked_flag) {
            double m;
            is >> m;
            mk = m;
        }
        cfg.append_unchecked(p, mk);
    }
    if (!is) throw argument_error("MarkedPointConfig::read: truncated input");
    return cfg;
}

} // namespace rgg
