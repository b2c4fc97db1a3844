/**
 * Experiment orchestration: named scenario presets, flat-JSON config
 * files, and the pipelines behind each CLI subcommand (dataset
 * generation, training, architecture grid with Pareto filtering, SNR
 * coverage, threshold sweeps, ROC sweeps over L/K/T, perturbation and
 * quantization evaluations).
 *
 * Randomness is compartmentalized by named seeds: topology, channel
 * (shadowing/pilots/fading), activity (+ AP picks), noise, and
 * detector initialization. Identical configs reproduce identical
 * artifact bytes.
 */
#ifndef GFRA_EXPERIMENT_HPP
#define GFRA_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gfra/airlink.hpp"
#include "gfra/channel.hpp"
#include "gfra/dataset.hpp"
#include "gfra/detect.hpp"
#include "gfra/mlp.hpp"
#include "gfra/robustness.hpp"
#include "gfra/topology.hpp"

namespace gfra {

enum class PathLossModel { uma_los_3gpp, log_distance };

struct ExperimentConfig {
    std::string scenario = "scenario-1";

    // Geometry
    double area_side_m = 0.0;
    int num_aps = 0;
    int num_users = 0;
    double edge_distance_m = 0.0;
    double min_ue_ap_distance_m = 0.0;
    double min_ap_ap_distance_m = 0.0;
    double ap_height_m = 0.0;
    double ue_height_m = 0.0;

    // Radio
    double carrier_freq_hz = 0.0;
    double shadow_std_db = 0.0;
    double noise_dbm = 0.0;
    double tx_power_w = 0.0;
    double epsilon = 0.0;
    int pilot_length = 0;
    int num_antennas = 0;
    double coherence_time_s = 0.0;
    double coherence_bandwidth_hz = 0.0;
    double reserved_fraction = 0.0;
    PathLossModel path_loss_model = PathLossModel::uma_los_3gpp;
    LogDistanceParams log_distance;

    // Data generation
    FadingMode fading_mode = FadingMode::per_slot;
    int slots_per_block = 10;
    ApPolicy ap_policy = ApPolicy::uniform_random_ap;
    int dataset_slots = 0;

    // Detector
    int hidden_layers = 0; ///< Z
    int hidden_width = 0;  ///< V
    TrainConfig train;
    double tau = 0.5;
    double tau_step = 0.01;
    double snr_coverage = 0.95;

    // Seeds
    std::uint64_t seed_topology = 101;
    std::uint64_t seed_channel = 202;
    std::uint64_t seed_activity = 303;
    std::uint64_t seed_noise = 404;
    std::uint64_t seed_init = 505;

    /// Throws std::invalid_argument naming the offending field; warns
    /// on stderr when L disagrees with the coherence-block budget
    /// round(reserved_fraction * coherence_time * coherence_bandwidth).
    void validate() const;

    TopologyConfig topology_config() const;
    PathLossParams path_loss_params() const;
    MlpArchitecture architecture() const;
    double noise_power_w() const;
};

ExperimentConfig scenario1_config();
ExperimentConfig scenario2_like_config();

/// Preset lookup for "scenario-1", "scenario-2-like", "custom"
/// (custom starts from scenario-1 values).
ExperimentConfig preset_config(const std::string& name);

/// Flat JSON object; "scenario" picks the preset the remaining keys
/// override. Unknown keys are errors naming the key.
ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_json_text(const ExperimentConfig& cfg);

/// Topology + shadowed gains + pilot codebook + power budget, realized
/// from the config seeds.
SystemRealization realize_system(const ExperimentConfig& cfg);

/// Dataset whose randomness is namespaced by `purpose` ("train",
/// "eval", ...) so different purposes never share slots.
Dataset make_dataset(const ExperimentConfig& cfg, const SystemRealization& sys,
                     int slot_count, ApPolicy policy, const std::string& purpose);

/// Slot split + scaler fit + init + train, all from config seeds.
TrainResult train_detector(const ExperimentConfig& cfg, const Dataset& ds);

/// Optional per-sample raw-feature transform (perturbation,
/// quantization) applied before the model's scaler.
using FeatureTransform =
    std::function<std::vector<double>(std::span<const double>, std::size_t)>;

/// Pooled per-device scores over the dataset, sample-major.
ScoreSet score_dataset(const MlpModel& model, const Dataset& ds,
                       const FeatureTransform& transform = nullptr);

double auc_of(const MlpModel& model, const Dataset& ds,
              const FeatureTransform& transform = nullptr);

// --- Architecture grid / Pareto front ------------------------------

struct ParetoRow {
    int hidden_layers = 0;
    int hidden_width = 0;
    long long params = 0;
    double train_loss = 0.0; ///< best epoch train loss
    double val_loss = 0.0;   ///< best epoch validation loss
    bool efficient = false;
};

/// Marks rows that no other row dominates in (params, train_loss).
void mark_pareto_efficient(std::vector<ParetoRow>& rows);

/// Trains every (Z, V) on the same dataset and marks the Pareto set.
std::vector<ParetoRow> run_pareto(const ExperimentConfig& cfg, const Dataset& ds,
                                  const std::vector<int>& hidden_layer_choices,
                                  const std::vector<int>& hidden_width_choices);

void write_pareto_csv(const std::filesystem::path& path,
                      const std::vector<ParetoRow>& rows);

// --- SNR coverage ----------------------------------------------------

struct SnrCdfResult {
    std::vector<double> sorted_snr_db; ///< pooled over realizations
    double target_db = 0.0;            ///< (1 - coverage) quantile
    double coverage = 0.0;
};

/// Pools dominant-AP SNR over `realizations` independent topologies.
SnrCdfResult run_snr_cdf(const ExperimentConfig& cfg, int realizations);

void write_snr_cdf_csv(const std::filesystem::path& path, const SnrCdfResult& result);

// --- Sweeps -----------------------------------------------------------

struct SweepPoint {
    double value = 0.0;
    std::string label; ///< e.g. the "W_F" format spelling; empty = use value
    double auc = 0.0;
    RocCurve curve;
};

struct SweepOptions {
    int train_slots = 0;  ///< 0 = use cfg.dataset_slots
    int eval_slots = 4000;
};

/// Retrains per pilot length; topology/gains stay fixed by seed.
std::vector<SweepPoint> run_pilot_length_sweep(const ExperimentConfig& cfg,
                                               const std::vector<int>& pilot_lengths,
                                               const SweepOptions& opts);

/// Retrains per user count (the output layer resizes with K).
std::vector<SweepPoint> run_user_count_sweep(const ExperimentConfig& cfg,
                                             const std::vector<int>& user_counts,
                                             const SweepOptions& opts);

/// One shared model; per slot a fresh random cluster of each size T,
/// per-AP hard decisions fused by majority vote, ROC swept over tau.
std::vector<SweepPoint> run_cluster_sweep(const ExperimentConfig& cfg,
                                          const SystemRealization& sys,
                                          const MlpModel& model,
                                          const std::vector<int>& cluster_sizes,
                                          int eval_slots);

/// AUC versus perturbation level theta applied to the raw features.
std::vector<SweepPoint> run_perturb_eval(const ExperimentConfig& cfg,
                                         const MlpModel& model, const Dataset& eval_ds,
                                         const std::vector<double>& thetas);

/// AUC per fixed-point format applied to the raw features (ADC model).
std::vector<SweepPoint> run_quant_eval(const MlpModel& model, const Dataset& eval_ds,
                                       const std::vector<FixedPointFormat>& formats);

/// Generic sweep CSV: `<value_name>,auc`.
void write_sweep_csv(const std::filesystem::path& path, const std::string& value_name,
                     const std::vector<SweepPoint>& points);

} // namespace gfra

#endif
