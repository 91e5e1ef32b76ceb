#pragma once

// Seeded, stream-splittable random number generation. All randomness in the
// library flows through RngStream so that a (base_seed, stream_id) pair
// reproduces the identical sample on the same build. Streams derived from
// distinct ids are independent for practical purposes (splitmix64-expanded
// xoshiro256++ state).

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace rgg {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Combine identifying integers (subcommand id, t-index, replicate index, ...)
// into a stream id.
inline std::uint64_t derive_stream_id(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (std::uint64_t p : parts) {
        h ^= p + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        std::uint64_t s = h;
        h = splitmix64(s);
    }
    return h;
}

class RngStream {
public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t base_seed, std::uint64_t stream_id)
        : base_seed_(base_seed), stream_id_(stream_id) {
        std::uint64_t sm = base_seed ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1));
        for (auto& w : s_) w = splitmix64(sm);
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
        has_spare_normal_ = false;
        spare_normal_ = 0.0;
    }

    std::uint64_t base_seed() const { return base_seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    RngStream substream(std::uint64_t id) const {
        return RngStream(base_seed_, derive_stream_id({stream_id_, id}));
    }

    // xoshiro256++
    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0,1) with 53 random bits
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // standard normal, Box-Muller with cached spare
    double normal() {
        if (has_spare_normal_) {
            has_spare_normal_ = false;
            return spare_normal_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double c = std::cos(6.283185307179586476925286766559 * u2);
        double s = std::sin(6.283185307179586476925286766559 * u2);
        spare_normal_ = r * s;
        has_spare_normal_ = true;
        return r * c;
    }

    // Poisson count: sequential-search inversion for small means,
    // Hörmann's PTRS transformed rejection otherwise.
    long poisson(double mean) {
        if (mean <= 0.0) return 0;
        if (mean < 30.0) return poisson_inversion(mean);
        return poisson_ptrs(mean);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    long poisson_inversion(double mean) {
        double p = std::exp(-mean);
        double cum = p;
        double u = uniform01();
        long k = 0;
        while (u > cum) {
            ++k;
            p *= mean / static_cast<double>(k);
            cum += p;
            if (k > 2000) break; // cumulative underflow guard; unreachable for mean<30
        }
        return k;
    }

    long poisson_ptrs(double mean) {
        const double slam = std::sqrt(mean);
        const double llam = std::log(mean);
        const double b = 0.931 + 2.53 * slam;
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double vr = 0.9277 - 3.6224 / (b - 2.0);
        for (;;) {
            double u = uniform01() - 0.5;
            double v = uniform01();
            double us = 0.5 - std::fabs(u);
            double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= vr) return static_cast<long>(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
                kf * llam - mean - std::lgamma(kf + 1.0))
                return static_cast<long>(kf);
        }
    }

    std::uint64_t base_seed_;
    std::uint64_t stream_id_;
    std::uint64_t s_[4];
    bool has_spare_normal_;
    double spare_normal_;
};

} // namespace rgg
