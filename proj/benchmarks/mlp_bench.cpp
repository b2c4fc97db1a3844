#include <benchmark/benchmark.h>

#include "gfra/mlp.hpp"

using namespace gfra;

namespace {

FeatureScaler identity_scaler(int dim) {
    FeatureScaler s;
    s.mean.assign(static_cast<std::size_t>(dim), 0.0);
    s.stddev.assign(static_cast<std::size_t>(dim), 1.0);
    return s;
}

MlpModel reference_model(int width) {
    SeededRng rng(1, 0);
    return init_model({160, 2, width, 100}, identity_scaler(160), rng);
}

Eigen::MatrixXd random_batch(int rows, int cols) {
    SeededRng rng(2, 0);
    Eigen::MatrixXd x(rows, cols);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        x.data()[i] = rng.standard_normal();
    }
    return x;
}

} // namespace

static void ForwardBatch(benchmark::State& state) {
    const MlpModel model = reference_model(static_cast<int>(state.range(0)));
    const Eigen::MatrixXd x = random_batch(160, 256);
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.forward_batch(x));
    }
    state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(ForwardBatch)->Arg(64)->Arg(320)->Arg(1024);

static void TrainStep(benchmark::State& state) {
    MlpModel model = reference_model(static_cast<int>(state.range(0)));
    const Eigen::MatrixXd x = random_batch(160, 256);
    SeededRng rng(3, 0);
    Eigen::MatrixXd y(100, 256);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        y.data()[i] = rng.bernoulli(0.1);
    }
    TrainConfig cfg;
    AdamState adam = AdamState::zeros_like(model);
    ForwardCache cache;
    for (auto _ : state) {
        (void)forward_train(model, x, cache);
        const Gradients grads = backward(model, cache, y, cfg.reduction);
        adam_step(model, grads, adam, cfg);
    }
    state.SetItemsProcessed(state.iterations() * 256);
}
BENCHMARK(TrainStep)->Arg(64)->Arg(320);

BENCHMARK_MAIN();
