/**
 * Decision layer on top of the detector: hard thresholding, false
 * alarm / miss detection accounting, threshold calibration, ROC/AUC,
 * and the AP-cluster majority fusion performed at the CPU.
 *
 * The decision boundary is inclusive: a device is declared active when
 * its probability is >= tau, and the empirical rates use the same
 * convention.
 */
#ifndef GFRA_DETECT_HPP
#define GFRA_DETECT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "gfra/airlink.hpp"
#include "gfra/mlp.hpp"
#include "gfra/rng.hpp"

namespace gfra {

std::vector<std::uint8_t> hard_decision(std::span<const double> probs, double tau);

struct DetectionReport {
    /// Undefined (nullopt) when the ground truth has no entry of the
    /// conditioning class, rather than silently reporting 0.
    std::optional<double> p_fa;
    std::optional<double> p_md;
    std::optional<double> p_error; ///< (1-eps) P_FA + eps P_MD when both defined
    double accuracy = 0.0;
    long long true_positives = 0;
    long long false_positives = 0;
    long long true_negatives = 0;
    long long false_negatives = 0;
    double epsilon_used = 0.0;
};

DetectionReport rates(std::span<const std::uint8_t> decided,
                      std::span<const std::uint8_t> truth, double epsilon_used);

/// P_E(tau, eps) = (1 - eps) P_FA + eps P_MD.
double error_probability(double p_fa, double p_md, double epsilon);

/// Pooled per-device scores with their ground-truth activity bits.
struct ScoreSet {
    std::vector<double> scores;
    std::vector<std::uint8_t> labels;
};

struct ThresholdTable {
    std::vector<double> tau;
    std::vector<double> p_fa;
    std::vector<double> p_md;
    std::vector<double> p_e;
    double tau_star = 0.0; ///< smallest grid tau minimizing p_e
    double p_e_star = 0.0;
};

/// Grid search tau in {0, step, 2 step, ..., 1}; the table feeds
/// error-vs-threshold plots and tau_star is the calibrated threshold.
ThresholdTable calibrate_threshold(const ScoreSet& calibration, double epsilon,
                                   double grid_step);

struct RocCurve {
    std::vector<double> tau;
    std::vector<double> fpr;
    std::vector<double> tpr;
    double auc = 0.0; ///< trapezoid over points sorted by fpr
};

/// ROC over an explicit threshold grid. Requires both classes present.
RocCurve roc(const ScoreSet& scores, std::span<const double> grid);

/// ROC thresholded at every distinct score (plus anchors), which makes
/// the trapezoid AUC exact (ties count one half).
RocCurve roc_exact(const ScoreSet& scores);

/// Trapezoid area under arbitrary (fpr, tpr) points after sorting by
/// fpr and anchoring at (0,0) and (1,1). Used for decision-level
/// (fused) curves where no per-device score exists.
double auc_from_points(std::span<const double> fpr, std::span<const double> tpr);

std::vector<double> make_tau_grid(double step);

struct ClusterConfig {
    int size = 0;             ///< T
    std::vector<int> ap_ids;  ///< T distinct AP indices
};

/// T distinct APs uniformly without replacement.
ClusterConfig select_cluster(int num_aps, int cluster_size, SeededRng& rng);

/// Per-device vote count over the T rows; active when at least T/2
/// agree for even T and at least (T+1)/2 for odd T.
std::vector<std::uint8_t> majority_fuse(
    const std::vector<std::vector<std::uint8_t>>& per_ap_decisions);

/// Runs the detector at each cluster AP on its own observation, hard
/// decides at tau, then fuses the votes.
std::vector<std::uint8_t> cluster_detect(const MlpModel& model, const ReceivedSlot& slot,
                                         const ClusterConfig& cluster, double tau);

/// CSV writers used by the experiment tooling.
void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve);
void write_threshold_csv(const std::filesystem::path& path, const ThresholdTable& table);
void write_report_csv(const std::filesystem::path& path, const DetectionReport& report);

} // namespace gfra

#endif
