#include "gfra/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gfra/errors.hpp"
#include "io_util.hpp"

namespace gfra {

std::vector<std::uint8_t> hard_decision(std::span<const double> probs, double tau) {
    std::vector<std::uint8_t> out(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        out[i] = probs[i] >= tau ? 1 : 0;
    }
    return out;
}

DetectionReport rates(std::span<const std::uint8_t> decided,
                      std::span<const std::uint8_t> truth, double epsilon_used) {
    if (decided.size() != truth.size()) {
        throw std::invalid_argument("rates: length mismatch");
    }
    if (decided.empty()) {
        throw std::invalid_argument("rates: empty input");
    }
    DetectionReport r;
    r.epsilon_used = epsilon_used;
    for (std::size_t i = 0; i < decided.size(); ++i) {
        const bool est = decided[i] != 0;
        const bool act = truth[i] != 0;
        if (act && est) {
            ++r.true_positives;
        } else if (act && !est) {
            ++r.false_negatives;
        } else if (!act && est) {
            ++r.false_positives;
        } else {
            ++r.true_negatives;
        }
    }
    const long long negatives = r.false_positives + r.true_negatives;
    const long long positives = r.true_positives + r.false_negatives;
    if (negatives > 0) {
        r.p_fa = static_cast<double>(r.false_positives) / static_cast<double>(negatives);
    }
    if (positives > 0) {
        r.p_md = static_cast<double>(r.false_negatives) / static_cast<double>(positives);
    }
    if (r.p_fa && r.p_md) {
        r.p_error = error_probability(*r.p_fa, *r.p_md, epsilon_used);
    }
    r.accuracy = static_cast<double>(r.true_positives + r.true_negatives) /
                 static_cast<double>(decided.size());
    return r;
}

double error_probability(double p_fa, double p_md, double epsilon) {
    return (1.0 - epsilon) * p_fa + epsilon * p_md;
}

std::vector<double> make_tau_grid(double step) {
    if (!(step > 0.0 && step <= 0.5)) {
        throw std::invalid_argument("make_tau_grid: step must lie in (0, 0.5]");
    }
    std::vector<double> grid;
    const auto n = static_cast<long long>(std::floor(1.0 / step + 1e-12));
    for (long long i = 0; i <= n; ++i) {
        grid.push_back(std::min(1.0, static_cast<double>(i) * step));
    }
    if (grid.back() < 1.0) {
        grid.push_back(1.0);
    }
    return grid;
}

namespace {

/// Sorted class scores for O(log n) threshold counting.
struct SplitScores {
    std::vector<double> active;   // sorted ascending
    std::vector<double> inactive; // sorted ascending

    explicit SplitScores(const ScoreSet& s) {
        if (s.scores.size() != s.labels.size()) {
            throw std::invalid_argument("ScoreSet: scores/labels length mismatch");
        }
        for (std::size_t i = 0; i < s.scores.size(); ++i) {
            (s.labels[i] ? active : inactive).push_back(s.scores[i]);
        }
        std::sort(active.begin(), active.end());
        std::sort(inactive.begin(), inactive.end());
    }

    static std::size_t count_at_least(const std::vector<double>& sorted, double tau) {
        return static_cast<std::size_t>(
            sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), tau));
    }
};

} // namespace

ThresholdTable calibrate_threshold(const ScoreSet& calibration, double epsilon,
                                   double grid_step) {
    if (calibration.scores.empty()) {
        throw std::invalid_argument("calibrate_threshold: empty calibration set");
    }
    const SplitScores split(calibration);
    if (split.active.empty() || split.inactive.empty()) {
        throw std::invalid_argument(
            "calibrate_threshold: calibration set must contain both classes");
    }
    ThresholdTable table;
    table.tau = make_tau_grid(grid_step);
    table.p_fa.reserve(table.tau.size());
    table.p_md.reserve(table.tau.size());
    table.p_e.reserve(table.tau.size());

    double best = std::numeric_limits<double>::infinity();
    for (double tau : table.tau) {
        const double p_fa =
            static_cast<double>(SplitScores::count_at_least(split.inactive, tau)) /
            static_cast<double>(split.inactive.size());
        const double p_md =
            1.0 - static_cast<double>(SplitScores::count_at_least(split.active, tau)) /
                      static_cast<double>(split.active.size());
        const double p_e = error_probability(p_fa, p_md, epsilon);
        table.p_fa.push_back(p_fa);
        table.p_md.push_back(p_md);
        table.p_e.push_back(p_e);
        if (p_e < best) {
            best = p_e;
            table.tau_star = tau;
            table.p_e_star = p_e;
        }
    }
    return table;
}

double auc_from_points(std::span<const double> fpr, std::span<const double> tpr) {
    if (fpr.size() != tpr.size()) {
        throw std::invalid_argument("auc_from_points: length mismatch");
    }
    // Trapezoid over the staircase, anchored at (0,0) and (1,1).
    std::vector<std::pair<double, double>> pts;
    pts.reserve(fpr.size() + 2);
    pts.emplace_back(0.0, 0.0);
    pts.emplace_back(1.0, 1.0);
    for (std::size_t i = 0; i < fpr.size(); ++i) {
        pts.emplace_back(fpr[i], tpr[i]);
    }
    std::sort(pts.begin(), pts.end());
    double auc = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        auc += (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second) / 2.0;
    }
    return auc;
}

namespace {

RocCurve roc_from_thresholds(const SplitScores& split, std::span<const double> grid) {
    RocCurve curve;
    curve.tau.assign(grid.begin(), grid.end());
    curve.fpr.reserve(grid.size());
    curve.tpr.reserve(grid.size());
    for (double tau : grid) {
        curve.fpr.push_back(
            static_cast<double>(SplitScores::count_at_least(split.inactive, tau)) /
            static_cast<double>(split.inactive.size()));
        curve.tpr.push_back(
            static_cast<double>(SplitScores::count_at_least(split.active, tau)) /
            static_cast<double>(split.active.size()));
    }
    curve.auc = auc_from_points(curve.fpr, curve.tpr);
    return curve;
}

} // namespace

RocCurve roc(const ScoreSet& scores, std::span<const double> grid) {
    const SplitScores split(scores);
    if (split.active.empty() || split.inactive.empty()) {
        throw std::invalid_argument("roc: ground truth contains a single class");
    }
    if (grid.empty()) {
        throw std::invalid_argument("roc: empty threshold grid");
    }
    return roc_from_thresholds(split, grid);
}

RocCurve roc_exact(const ScoreSet& scores) {
    const SplitScores split(scores);
    if (split.active.empty() || split.inactive.empty()) {
        throw std::invalid_argument("roc_exact: ground truth contains a single class");
    }
    std::vector<double> grid;
    grid.reserve(scores.scores.size() + 1);
    grid.insert(grid.end(), split.active.begin(), split.active.end());
    grid.insert(grid.end(), split.inactive.begin(), split.inactive.end());
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    // One threshold above every score closes the curve at (0,0).
    grid.push_back(std::nextafter(grid.back(), std::numeric_limits<double>::infinity()));
    return roc_from_thresholds(split, grid);
}

ClusterConfig select_cluster(int num_aps, int cluster_size, SeededRng& rng) {
    if (cluster_size < 1 || cluster_size > num_aps) {
        throw std::invalid_argument("select_cluster: need 1 <= T <= M");
    }
    std::vector<int> ids(static_cast<std::size_t>(num_aps));
    std::iota(ids.begin(), ids.end(), 0);
    for (int i = 0; i < cluster_size; ++i) {
        const auto j = static_cast<std::size_t>(i) +
                       rng.uniform_below(static_cast<std::uint64_t>(num_aps - i));
        std::swap(ids[static_cast<std::size_t>(i)], ids[j]);
    }
    ids.resize(static_cast<std::size_t>(cluster_size));
    return ClusterConfig{cluster_size, std::move(ids)};
}

std::vector<std::uint8_t> majority_fuse(
    const std::vector<std::vector<std::uint8_t>>& per_ap_decisions) {
    if (per_ap_decisions.empty()) {
        throw std::invalid_argument("majority_fuse: no votes");
    }
    const std::size_t k = per_ap_decisions.front().size();
    const auto t = static_cast<int>(per_ap_decisions.size());
    for (const auto& row : per_ap_decisions) {
        if (row.size() != k) {
            throw std::invalid_argument("majority_fuse: vote rows differ in length");
        }
    }
    std::vector<std::uint8_t> fused(k, 0);
    for (std::size_t i = 0; i < k; ++i) {
        int votes = 0;
        for (const auto& row : per_ap_decisions) {
            votes += row[i] ? 1 : 0;
        }
        // >= T/2 for even T, >= (T+1)/2 for odd T; both are 2*votes >= T.
        fused[i] = 2 * votes >= t ? 1 : 0;
    }
    return fused;
}

std::vector<std::uint8_t> cluster_detect(const MlpModel& model, const ReceivedSlot& slot,
                                         const ClusterConfig& cluster, double tau) {
    if (cluster.ap_ids.empty()) {
        throw std::invalid_argument("cluster_detect: empty cluster");
    }
    std::vector<std::vector<std::uint8_t>> votes;
    votes.reserve(cluster.ap_ids.size());
    for (int ap : cluster.ap_ids) {
        if (ap < 0 || static_cast<std::size_t>(ap) >= slot.y.size()) {
            throw std::invalid_argument("cluster_detect: AP index " + std::to_string(ap) +
                                        " out of range");
        }
        const auto features = extract_features(slot.y[static_cast<std::size_t>(ap)]);
        const auto probs = model.predict(features);
        votes.push_back(hard_decision(probs, tau));
    }
    return majority_fuse(votes);
}

void write_roc_csv(const std::filesystem::path& path, const RocCurve& curve) {
    detail::atomic_write(path, [&](std::ofstream& out) {
        out.precision(std::numeric_limits<double>::max_digits10);
        out << "tau,fpr,tpr\n";
        for (std::size_t i = 0; i < curve.tau.size(); ++i) {
            out << curve.tau[i] << "," << curve.fpr[i] << "," << curve.tpr[i] << "\n";
        }
    });
}

void write_threshold_csv(const std::filesystem::path& path, const ThresholdTable& table) {
    detail::atomic_write(path, [&](std::ofstream& out) {
        out.precision(std::numeric_limits<double>::max_digits10);
        out << "tau,p_fa,p_md,p_e\n";
        for (std::size_t i = 0; i < table.tau.size(); ++i) {
            out << table.tau[i] << "," << table.p_fa[i] << "," << table.p_md[i] << ","
                << table.p_e[i] << "\n";
        }
    });
}

void write_report_csv(const std::filesystem::path& path, const DetectionReport& report) {
    detail::atomic_write(path, [&](std::ofstream& out) {
        out.precision(std::numeric_limits<double>::max_digits10);
        out << "p_fa,p_md,p_e,accuracy,tp_count,fp_count,tn_count,fn_count,epsilon\n";
        auto opt = [&](const std::optional<double>& v) {
            if (v) {
                out << *v;
            }
            out << ",";
        };
        opt(report.p_fa);
        opt(report.p_md);
        opt(report.p_error);
        out << report.accuracy << "," << report.true_positives << ","
            << report.false_positives << "," << report.true_negatives << ","
            << report.false_negatives << "," << report.epsilon_used << "\n";
    });
}

} // namespace gfra
