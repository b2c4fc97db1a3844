#include "gfra/airlink.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gfra {

namespace {

using ComplexMapConst =
    Eigen::Map<const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>;
using ComplexMap =
    Eigen::Map<Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>>;

ComplexMapConst as_map(const ComplexMatrix& m) {
    return ComplexMapConst(m.entries.data(), static_cast<Eigen::Index>(m.rows),
                           static_cast<Eigen::Index>(m.cols));
}

} // namespace

PilotBook generate_pilotbook(int pilot_length, int num_users, SeededRng& rng) {
    if (pilot_length < 1 || num_users < 1) {
        throw std::invalid_argument("generate_pilotbook: L and K must be >= 1");
    }
    PilotBook book;
    book.pilot_length = pilot_length;
    book.num_users = num_users;
    book.s = ComplexMatrix(static_cast<std::size_t>(pilot_length),
                           static_cast<std::size_t>(num_users));
    const double var = 1.0 / static_cast<double>(pilot_length);
    for (auto& z : book.s.entries) {
        z = rng.complex_normal(var);
    }
    return book;
}

int ActivityVector::active_count() const {
    return static_cast<int>(std::count(a.begin(), a.end(), std::uint8_t{1}));
}

std::vector<int> ActivityVector::support() const {
    std::vector<int> idx;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k]) {
            idx.push_back(static_cast<int>(k));
        }
    }
    return idx;
}

ActivityVector sample_activity(int num_users, double epsilon, SeededRng& rng) {
    if (num_users < 1) {
        throw std::invalid_argument("sample_activity: num_users must be >= 1");
    }
    ActivityVector v;
    v.epsilon = epsilon;
    v.a.resize(static_cast<std::size_t>(num_users));
    for (auto& bit : v.a) {
        bit = static_cast<std::uint8_t>(rng.bernoulli(epsilon));
    }
    return v;
}

PowerProfile PowerProfile::uniform(int num_users, double tx_power_w,
                                   double noise_power_w) {
    PowerProfile p;
    p.rho_w.assign(static_cast<std::size_t>(num_users), tx_power_w);
    p.noise_power_w = noise_power_w;
    p.validate();
    return p;
}

void PowerProfile::validate() const {
    for (double rho : rho_w) {
        if (!(rho > 0.0)) {
            throw std::invalid_argument("PowerProfile: all rho_k must be > 0");
        }
    }
    if (!(noise_power_w > 0.0)) {
        throw std::invalid_argument("PowerProfile: noise_power_w must be > 0");
    }
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

int dominant_ap(const LargeScaleMap& beta, int k) {
    if (k < 0 || k >= beta.num_users) {
        throw std::invalid_argument("dominant_ap: device index out of range");
    }
    int best = 0;
    double best_beta = beta.beta(0, k);
    for (int m = 1; m < beta.num_aps; ++m) {
        const double b = beta.beta(m, k);
        if (b > best_beta) {
            best_beta = b;
            best = m;
        }
    }
    return best;
}

std::vector<double> snr_per_device_db(const LargeScaleMap& beta,
                                      const PowerProfile& power) {
    if (static_cast<int>(power.rho_w.size()) != beta.num_users) {
        throw std::invalid_argument("snr_per_device_db: rho size mismatch");
    }
    std::vector<double> snr(static_cast<std::size_t>(beta.num_users));
    for (int k = 0; k < beta.num_users; ++k) {
        const int m = dominant_ap(beta, k);
        const double lin = power.rho_w[static_cast<std::size_t>(k)] * beta.beta(m, k) /
                           power.noise_power_w;
        snr[static_cast<std::size_t>(k)] = 10.0 * std::log10(lin);
    }
    return snr;
}

double snr_target_db(std::vector<double> snrs_db, double coverage) {
    if (snrs_db.empty()) {
        throw std::invalid_argument("snr_target_db: empty sample");
    }
    if (!(coverage > 0.0 && coverage < 1.0)) {
        throw std::invalid_argument("snr_target_db: coverage must lie in (0, 1)");
    }
    std::sort(snrs_db.begin(), snrs_db.end());
    const double q = 1.0 - coverage;
    const double pos = q * static_cast<double>(snrs_db.size() - 1);
    const auto below = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(below);
    if (below + 1 >= snrs_db.size()) {
        return snrs_db.back();
    }
    return snrs_db[below] + frac * (snrs_db[below + 1] - snrs_db[below]);
}

ComplexMatrix synth_ap_observation(const PilotBook& pilots,
                                   const ActivityVector& activity,
                                   const PowerProfile& power,
                                   const ComplexMatrix& g_m, SeededRng& noise_rng) {
    const auto K = static_cast<std::size_t>(pilots.num_users);
    const auto L = static_cast<std::size_t>(pilots.pilot_length);
    if (activity.a.size() != K || power.rho_w.size() != K || g_m.rows != K) {
        throw std::invalid_argument("synth_ap_observation: user-dimension mismatch");
    }
    const std::size_t N = g_m.cols;

    // Scale channel rows by a_k sqrt(rho_k), then one L x K * K x N product.
    ComplexMatrix scaled(K, N);
    for (std::size_t k = 0; k < K; ++k) {
        const double w = activity.a[k] ? std::sqrt(power.rho_w[k]) : 0.0;
        for (std::size_t n = 0; n < N; ++n) {
            scaled(k, n) = w * g_m(k, n);
        }
    }

    ComplexMatrix y(L, N);
    ComplexMap(y.entries.data(), static_cast<Eigen::Index>(L),
               static_cast<Eigen::Index>(N)) = as_map(pilots.s) * as_map(scaled);

    if (power.noise_power_w > 0.0) {
        for (auto& z : y.entries) {
            z += noise_rng.complex_normal(power.noise_power_w);
        }
    }
    return y;
}

ReceivedSlot synth_slot(const PilotBook& pilots, const ActivityVector& activity,
                        const PowerProfile& power, const SmallScaleBlock& small_scale,
                        const SeededRng& noise_rng) {
    if (small_scale.num_users != pilots.num_users) {
        throw std::invalid_argument("synth_slot: user-dimension mismatch");
    }
    ReceivedSlot slot;
    slot.activity = activity;
    slot.block_id = small_scale.block_id;
    slot.y.reserve(small_scale.per_ap.size());
    for (std::size_t m = 0; m < small_scale.per_ap.size(); ++m) {
        SeededRng ap_noise = noise_rng.split("ap", m);
        slot.y.push_back(synth_ap_observation(pilots, activity, power,
                                              small_scale.per_ap[m], ap_noise));
    }
    return slot;
}

} // namespace gfra
