#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "gfra/rng.hpp"

using gfra::SeededRng;

namespace {

// Standard normal CDF for the KS oracle.
double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_statistic_vs(std::vector<double> sample, double (*cdf)(double)) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(f - (static_cast<double>(i) + 1.0) / n));
    }
    return d;
}

double exp1_cdf(double x) { return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x); }

} // namespace

TEST_SUITE("rng") {

TEST_CASE("identical (seed, stream) reproduces the identical sequence") {
    SeededRng a(42, 7);
    SeededRng b(42, 7);
    for (int i = 0; i < 1000; ++i) {
        REQUIRE(a.next_u64() == b.next_u64());
    }
}

TEST_CASE("different seeds or streams give different sequences") {
    SeededRng a(42, 0), b(43, 0), c(42, 1);
    bool differ_seed = false, differ_stream = false;
    for (int i = 0; i < 16; ++i) {
        const auto va = a.next_u64();
        differ_seed |= va != b.next_u64();
        differ_stream |= va != c.next_u64();
    }
    CHECK(differ_seed);
    CHECK(differ_stream);
}

TEST_CASE("split is deterministic and label-sensitive") {
    const SeededRng s(1234, 0);
    SeededRng c1 = s.split("topology");
    SeededRng c2 = s.split("topology");
    CHECK(c1.state() == c2.state());

    SeededRng a = s.split("a");
    SeededRng b = s.split("b");
    CHECK(a.state() != b.state());

    CHECK(s.split("x", 0).state() != s.split("x", 1).state());
    CHECK_THROWS_AS((void)s.split(""), std::invalid_argument);
}

TEST_CASE("split does not consume parent state") {
    SeededRng s(99, 5);
    const auto before = s.state();
    (void)s.split("child");
    (void)s.split("child", 3);
    CHECK(s.state() == before);
}

TEST_CASE("split children are statistically clean and uncorrelated with the parent") {
    SeededRng parent(2024, 0);
    SeededRng child = parent.split("mc");
    const int n = 1000000;
    double child_sum = 0.0, cross = 0.0;
    for (int i = 0; i < n; ++i) {
        const double p = parent.standard_normal();
        const double c = child.standard_normal();
        child_sum += c;
        cross += p * c;
    }
    CHECK(std::abs(child_sum / n) < 0.01);
    CHECK(std::abs(cross / n) < 0.01);
}

TEST_CASE("standard_normal moments at 1e6 draws") {
    SeededRng rng(7, 0);
    const int n = 1000000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.standard_normal();
        sum += z;
        sq += z * z;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.005);
    CHECK(std::abs(var - 1.0) < 0.01);
}

TEST_CASE("standard_normal passes a KS test against N(0,1)") {
    SeededRng rng(11, 0);
    std::vector<double> sample(1000000);
    for (auto& v : sample) {
        v = rng.standard_normal();
    }
    CHECK(ks_statistic_vs(std::move(sample), &phi) < 0.002);
}

TEST_CASE("complex_normal has the requested second moment") {
    SeededRng rng(5, 0);
    const int n = 1000000;

    double e1 = 0.0;
    for (int i = 0; i < n; ++i) {
        e1 += std::norm(rng.complex_normal(1.0));
    }
    e1 /= n;
    CHECK(e1 > 0.99);
    CHECK(e1 < 1.01);

    double e4 = 0.0;
    for (int i = 0; i < n; ++i) {
        e4 += std::norm(rng.complex_normal(4.0));
    }
    e4 /= n;
    CHECK(std::abs(e4 - 4.0) / 4.0 < 0.01);
}

TEST_CASE("complex_normal real/imag parts are uncorrelated") {
    SeededRng rng(17, 0);
    const int n = 1000000;
    double sum_re = 0.0, sum_im = 0.0, cross = 0.0, var_re = 0.0, var_im = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto z = rng.complex_normal(1.0);
        sum_re += z.real();
        sum_im += z.imag();
        cross += z.real() * z.imag();
        var_re += z.real() * z.real();
        var_im += z.imag() * z.imag();
    }
    const double corr =
        (cross / n - (sum_re / n) * (sum_im / n)) /
        std::sqrt((var_re / n) * (var_im / n));
    CHECK(std::abs(corr) < 0.005);
}

TEST_CASE("complex_normal envelope-squared is Exp(1) for unit variance") {
    SeededRng rng(23, 0);
    std::vector<double> sample(1000000);
    for (auto& v : sample) {
        v = std::norm(rng.complex_normal(1.0));
    }
    CHECK(ks_statistic_vs(std::move(sample), &exp1_cdf) < 0.002);
}

TEST_CASE("complex_normal rejects non-positive variance") {
    SeededRng rng(1, 0);
    CHECK_THROWS_AS((void)rng.complex_normal(0.0), std::invalid_argument);
    CHECK_THROWS_AS((void)rng.complex_normal(-1.0), std::invalid_argument);
}

TEST_CASE("bernoulli edge and frequency behavior") {
    SeededRng rng(3, 0);
    for (int i = 0; i < 10000; ++i) {
        REQUIRE(rng.bernoulli(0.0) == 0);
        REQUIRE(rng.bernoulli(1.0) == 1);
    }
    long long ones = 0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        ones += rng.bernoulli(0.1);
    }
    const double freq = static_cast<double>(ones) / n;
    CHECK(freq > 0.099);
    CHECK(freq < 0.101);

    CHECK_THROWS_AS((void)rng.bernoulli(-0.1), std::invalid_argument);
    CHECK_THROWS_AS((void)rng.bernoulli(1.1), std::invalid_argument);
}

TEST_CASE("uniform_below stays in range and is roughly uniform") {
    SeededRng rng(31, 0);
    const std::uint64_t bound = 13;
    std::vector<long long> counts(bound, 0);
    const int n = 130000;
    for (int i = 0; i < n; ++i) {
        const auto v = rng.uniform_below(bound);
        REQUIRE(v < bound);
        ++counts[v];
    }
    for (auto c : counts) {
        CHECK(std::abs(static_cast<double>(c) - n / 13.0) < 5.0 * std::sqrt(n / 13.0));
    }
    CHECK_THROWS_AS((void)rng.uniform_below(0), std::invalid_argument);
}

TEST_CASE("state serialization resumes the sequence exactly") {
    SeededRng rng(777, 2);
    for (int i = 0; i < 10; ++i) {
        (void)rng.next_u64();
    }
    const auto snapshot = rng.state();
    std::vector<std::uint64_t> expected(32);
    for (auto& v : expected) {
        v = rng.next_u64();
    }
    SeededRng resumed = SeededRng::from_state(snapshot);
    for (auto v : expected) {
        REQUIRE(resumed.next_u64() == v);
    }
}

TEST_CASE("uniform(lo, hi) respects its bounds") {
    SeededRng rng(9, 0);
    for (int i = 0; i < 100000; ++i) {
        const double v = rng.uniform(-2.5, 4.0);
        REQUIRE(v >= -2.5);
        REQUIRE(v < 4.0);
    }
}

} // TEST_SUITE
