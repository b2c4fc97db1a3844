#include <benchmark/benchmark.h>

#include "gfra/airlink.hpp"
#include "gfra/robustness.hpp"

using namespace gfra;

namespace {

LargeScaleMap flat_map(int m, int k) {
    LargeScaleMap map;
    map.num_aps = m;
    map.num_users = k;
    map.beta_linear.assign(static_cast<std::size_t>(m) * k, 1e-9);
    map.beta_db.assign(static_cast<std::size_t>(m) * k, -90.0);
    return map;
}

} // namespace

static void SynthSlotAllAps(benchmark::State& state) {
    SeededRng rng(1, 0);
    const int L = 40, K = 100, N = 2, M = 20;
    const PilotBook book = generate_pilotbook(L, K, rng);
    const auto map = flat_map(M, K);
    PowerProfile power;
    power.rho_w.assign(K, 0.2);
    power.noise_power_w = 1.26e-14;
    std::uint64_t slot = 0;
    for (auto _ : state) {
        SeededRng act = rng.split("a", slot);
        const ActivityVector activity = sample_activity(K, 0.1, act);
        const SmallScaleBlock block =
            small_scale_block(map, N, slot, rng.split("f", slot));
        benchmark::DoNotOptimize(
            synth_slot(book, activity, power, block, rng.split("n", slot)));
        ++slot;
    }
    state.SetItemsProcessed(state.iterations() * M);
}
BENCHMARK(SynthSlotAllAps);

static void QuantizeFeatures(benchmark::State& state) {
    SeededRng rng(2, 0);
    std::vector<double> features(160);
    for (auto& f : features) {
        f = 2e-5 * rng.standard_normal();
    }
    const FixedPointFormat fmt{8, 4};
    for (auto _ : state) {
        benchmark::DoNotOptimize(quantize_features(features, fmt));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long long>(features.size()));
}
BENCHMARK(QuantizeFeatures);
