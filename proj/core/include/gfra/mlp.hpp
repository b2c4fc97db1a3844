/**
 * Multi-label activity detector: a fully connected network with ReLU
 * hidden layers and a sigmoid output per device, trained with
 * mini-batch Adam on clipped binary cross-entropy and
 * best-snapshot early stopping.
 *
 * All training math runs in double precision. Models returned by
 * init_model/train have their parameters rounded through float32 so
 * that the single-precision "GFRM" file format round-trips losslessly.
 */
#ifndef GFRA_MLP_HPP
#define GFRA_MLP_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gfra/dataset.hpp"
#include "gfra/rng.hpp"

namespace gfra {

struct MlpArchitecture {
    int input_dim = 0;    ///< 2NL
    int hidden_layers = 0; ///< Z
    int hidden_width = 0;  ///< V
    int output_dim = 0;    ///< K

    void validate() const;
    bool operator==(const MlpArchitecture&) const = default;
};

/// Closed-form trainable-parameter count:
/// (Z-1) V^2 + (input + output + Z) V + output.
long long parameter_count(const MlpArchitecture& arch);

/// Probabilities below/above this are clipped inside the loss so
/// log() stays finite; the gradient is zero in the clipped region.
inline constexpr double kProbClip = 1e-7;

enum class LossReduction { sum, mean };

struct MlpModel {
    MlpArchitecture arch;
    FeatureScaler scaler;
    std::vector<Eigen::MatrixXd> weights; ///< Z+1 layers
    std::vector<Eigen::VectorXd> biases;

    /// Per-device activity probabilities for standardized features.
    std::vector<double> forward(std::span<const double> scaled_features) const;

    /// Column-per-sample batch (input_dim x B) -> (output_dim x B).
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x) const;

    /// Applies the stored feature scaler, then forward().
    std::vector<double> predict(std::span<const double> raw_features) const;
};

/// Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases.
MlpModel init_model(const MlpArchitecture& arch, FeatureScaler scaler, SeededRng& rng);

struct ForwardCache {
    std::vector<Eigen::MatrixXd> pre;  ///< pre-activations, layers 1..Z+1
    std::vector<Eigen::MatrixXd> post; ///< post[0] = input, post[t] = activation
};

Eigen::MatrixXd forward_train(const MlpModel& model, const Eigen::MatrixXd& x,
                              ForwardCache& cache);

/// Cross-entropy of predicted probabilities against 0/1 labels,
/// clipped at kProbClip. `sum` totals over every element; `mean`
/// divides the total by the number of samples (columns).
double bce_loss(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& labels,
                LossReduction reduction);

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

/// Analytic gradients of the clipped BCE for the cached batch.
Gradients backward(const MlpModel& model, const ForwardCache& cache,
                   const Eigen::MatrixXd& labels, LossReduction reduction);

struct AdamState {
    std::vector<Eigen::MatrixXd> m_weights, v_weights;
    std::vector<Eigen::VectorXd> m_biases, v_biases;
    long long step = 0;

    static AdamState zeros_like(const MlpModel& model);
};

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 256;
    int max_epochs = 200;
    int patience = 10;          ///< epochs without improvement before stopping
    double min_improvement = 1e-5;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t init_seed = 1;
    LossReduction reduction = LossReduction::mean;

    void validate() const;
};

/// One bias-corrected Adam update; increments state.step.
void adam_step(MlpModel& model, const Gradients& grads, AdamState& state,
               const TrainConfig& cfg);

struct EpochStats {
    int epoch = 0;          ///< 1-based
    double train_loss = 0.0; ///< per-sample mean over the epoch's batches
    double val_loss = 0.0;   ///< per-sample mean on the validation split
};

struct TrainResult {
    MlpModel model; ///< best-validation snapshot
    std::vector<EpochStats> trace;
    int best_epoch = 0;
    double best_val_loss = 0.0;
};

/// Mini-batch Adam over shuffled epochs; stops when validation loss
/// fails to improve by min_improvement for `patience` consecutive
/// epochs. Throws divergence_error (naming epoch/batch) on non-finite
/// loss. The model's scaler standardizes features; the shuffle stream
/// derives from cfg.init_seed.
TrainResult train(MlpModel model, const Dataset& ds, const SlotSplit& split,
                  const TrainConfig& cfg);

/// "GFRM" v1: single-precision parameters, double-precision scaler.
void save_model(const std::filesystem::path& path, const MlpModel& model);
MlpModel load_model(const std::filesystem::path& path);

/// CSV with header `epoch,train_loss,val_loss`.
void write_loss_trace_csv(const std::filesystem::path& path,
                          const std::vector<EpochStats>& trace);

} // namespace gfra

#endif
