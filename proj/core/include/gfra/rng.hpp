/**
 * Seeded, splittable PRNG for reproducible Monte Carlo simulation.
 *
 * A stream is identified by (seed, stream_id); identical identifiers
 * reproduce the identical draw sequence across runs. Independent
 * sub-streams are derived with split(), which hashes a label into a
 * fresh stream_id without consuming parent state, so parallel workers
 * can each own a stream that does not depend on scheduling order.
 *
 * Generator: xoshiro256++ seeded through SplitMix64. Distributions are
 * implemented here (Box-Muller, Lemire bounded integers) instead of
 * <random> because libstdc++/libc++ distribution outputs differ.
 */
#ifndef GFRA_RNG_HPP
#define GFRA_RNG_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <string_view>

namespace gfra {

class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed, std::uint64_t stream_id = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    /// Child stream keyed by a label; the parent is not advanced.
    SeededRng split(std::string_view label) const;
    /// Child stream keyed by a label and an index (slot, AP, epoch, ...).
    SeededRng split(std::string_view label, std::uint64_t index) const;

    std::uint64_t next_u64();

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi);

    /// Uniform integer on [0, bound); bound must be nonzero.
    std::uint64_t uniform_below(std::uint64_t bound);

    double standard_normal();
    double normal(double mean, double stddev);

    /// Circularly-symmetric complex normal with E|z|^2 = variance.
    std::complex<double> complex_normal(double variance);

    /// 1 with probability p, 0 otherwise; p must lie in [0, 1].
    int bernoulli(double p);

    /// Full generator state: {seed, stream_id, s0..s3}.
    std::array<std::uint64_t, 6> state() const;
    static SeededRng from_state(const std::array<std::uint64_t, 6>& st);

private:
    SeededRng() = default;

    std::uint64_t seed_ = 0;
    std::uint64_t stream_id_ = 0;
    std::array<std::uint64_t, 4> s_{};
};

} // namespace gfra

#endif
