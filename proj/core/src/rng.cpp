#include "gfra/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gfra {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// SplitMix64 finalizer; also used as the label/stream mixing function.
std::uint64_t mix64(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
    // Expand (seed, stream) into four nonzero state words via SplitMix64.
    std::uint64_t sm = seed ^ mix64(stream_id);
    for (auto& w : s_) {
        sm += kGolden;
        w = mix64(sm);
    }
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) {
        s_[0] = 1;
    }
}

SeededRng SeededRng::split(std::string_view label) const {
    if (label.empty()) {
        throw std::invalid_argument("SeededRng::split: label must be non-empty");
    }
    return SeededRng(seed_, mix64(stream_id_ ^ fnv1a(label)));
}

SeededRng SeededRng::split(std::string_view label, std::uint64_t index) const {
    if (label.empty()) {
        throw std::invalid_argument("SeededRng::split: label must be non-empty");
    }
    return SeededRng(seed_, mix64(stream_id_ ^ fnv1a(label)) ^ mix64(index));
}

std::uint64_t SeededRng::next_u64() {
    // xoshiro256++
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

double SeededRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) {
    return lo + uniform() * (hi - lo);
}

std::uint64_t SeededRng::uniform_below(std::uint64_t bound) {
    if (bound == 0) {
        throw std::invalid_argument("SeededRng::uniform_below: bound must be nonzero");
    }
    // Lemire's debiased multiply-shift.
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
        const std::uint64_t threshold = -bound % bound;
        while (lo < threshold) {
            x = next_u64();
            m = static_cast<__uint128_t>(x) * bound;
            lo = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double SeededRng::standard_normal() {
    // Box-Muller; u1 shifted into (0, 1] so the log is finite.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double SeededRng::normal(double mean, double stddev) {
    return mean + stddev * standard_normal();
}

std::complex<double> SeededRng::complex_normal(double variance) {
    if (!(variance > 0.0)) {
        throw std::invalid_argument("complex_normal: variance must be > 0");
    }
    // One Box-Muller pair feeds both components, each N(0, variance/2).
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-variance * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
}

int SeededRng::bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("bernoulli: p must lie in [0, 1]");
    }
    if (p >= 1.0) {
        return 1;
    }
    return uniform() < p ? 1 : 0;
}

std::array<std::uint64_t, 6> SeededRng::state() const {
    return {seed_, stream_id_, s_[0], s_[1], s_[2], s_[3]};
}

SeededRng SeededRng::from_state(const std::array<std::uint64_t, 6>& st) {
    SeededRng r;
    r.seed_ = st[0];
    r.stream_id_ = st[1];
    r.s_ = {st[2], st[3], st[4], st[5]};
    return r;
}

} // namespace gfra
