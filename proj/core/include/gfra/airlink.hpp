/**
 * Random-access air interface: non-orthogonal Gaussian pilot codebook,
 * sparse Bernoulli activity, transmit/noise power bookkeeping, and
 * synthesis of the per-AP received pilot observation
 *
 *     Y_m = S D_a D_rho^{1/2} G_m + W_m,   W entries ~ CN(0, sigma^2).
 */
#ifndef GFRA_AIRLINK_HPP
#define GFRA_AIRLINK_HPP

#include <cstdint>
#include <vector>

#include "gfra/channel.hpp"
#include "gfra/complex_matrix.hpp"
#include "gfra/rng.hpp"
#include "gfra/topology.hpp"

namespace gfra {

/// L x K codebook; entries i.i.d. CN(0, 1/L) so E||s_k||^2 = 1 and the
/// per-user transmit power is carried entirely by rho_k.
struct PilotBook {
    int pilot_length = 0; ///< L
    int num_users = 0;    ///< K
    ComplexMatrix s;      ///< L x K
};

PilotBook generate_pilotbook(int pilot_length, int num_users, SeededRng& rng);

struct ActivityVector {
    std::vector<std::uint8_t> a; ///< K bits
    double epsilon = 0.0;        ///< activation probability used to draw it

    int active_count() const;
    std::vector<int> support() const;
};

ActivityVector sample_activity(int num_users, double epsilon, SeededRng& rng);

struct PowerProfile {
    std::vector<double> rho_w;  ///< per-user transmit power, watts
    double noise_power_w = 0.0; ///< sigma^2, watts

    static PowerProfile uniform(int num_users, double tx_power_w, double noise_power_w);
    void validate() const;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// AP index maximizing beta_mk for device k; ties go to the lowest index.
int dominant_ap(const LargeScaleMap& beta, int k);

/// Per-device SNR at its dominant AP: rho_k beta_{m*k} / sigma^2, in dB.
std::vector<double> snr_per_device_db(const LargeScaleMap& beta,
                                      const PowerProfile& power);

/// Empirical (1 - coverage)-quantile of the SNR sample, linear
/// interpolation between order statistics (the 5th percentile when
/// coverage = 0.95).
double snr_target_db(std::vector<double> snrs_db, double coverage);

/// One random-access slot as seen by every AP.
struct ReceivedSlot {
    std::vector<ComplexMatrix> y; ///< per AP, L x N
    ActivityVector activity;
    std::uint64_t block_id = 0;
};

/// Observation of a single AP given its small-scale matrix g_m (K x N).
/// Noise is drawn row-major from noise_rng; sigma^2 = 0 draws nothing.
ComplexMatrix synth_ap_observation(const PilotBook& pilots,
                                   const ActivityVector& activity,
                                   const PowerProfile& power,
                                   const ComplexMatrix& g_m, SeededRng& noise_rng);

/// All M APs of one slot; AP m uses noise stream rng.split("ap", m).
ReceivedSlot synth_slot(const PilotBook& pilots, const ActivityVector& activity,
                        const PowerProfile& power, const SmallScaleBlock& small_scale,
                        const SeededRng& noise_rng);

/// Everything fixed for the lifetime of one experiment: geometry,
/// large-scale gains, codebook, and the power budget.
struct SystemRealization {
    Topology topology;
    LargeScaleMap beta;
    PilotBook pilots;
    PowerProfile power;
    int num_antennas = 0;
};

} // namespace gfra

#endif
