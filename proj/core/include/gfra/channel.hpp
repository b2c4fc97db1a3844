/**
 * Large-scale fading (3GPP TR 38.901 UMa-LOS path loss plus log-normal
 * shadowing) and per-antenna Rayleigh small-scale fading.
 *
 * Conventions: carrier frequency enters the path-loss logs in GHz; the
 * breakpoint distance uses the TR 38.901 effective antenna heights
 * (h - 1 m). Channel gain is returned as beta = 10^((-PL + F)/10), so
 * path loss attenuates and shadowing F ~ N(0, sigma_sh^2) dithers in dB.
 */
#ifndef GFRA_CHANNEL_HPP
#define GFRA_CHANNEL_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gfra/complex_matrix.hpp"
#include "gfra/rng.hpp"
#include "gfra/topology.hpp"

namespace gfra {

struct PathLossParams {
    double carrier_freq_hz = 0.0;
    double ap_height_m = 0.0; ///< h_BS
    double ue_height_m = 0.0; ///< h_UT
    double shadow_std_db = 0.0;

    void validate() const;
};

/// d'_BP = 4 (h_BS - 1)(h_UT - 1) f_c / c. Heights must exceed 1 m.
double breakpoint_distance_m(double h_bs_m, double h_ut_m, double carrier_freq_hz);

/// Pre-breakpoint UMa-LOS branch, 28 + 22 log10(d_3D) + 20 log10(f_GHz).
double pl1_db(double d3d_m, double fc_ghz);

/// Post-breakpoint branch; continuous with pl1_db at the breakpoint.
double pl2_db(double d3d_m, double breakpoint_m, double h_bs_m, double h_ut_m,
              double fc_ghz);

/// Branch dispatch on the 2-D distance. Valid for 10 m <= d_2d <= 5 km;
/// outside that range throws model_range_error.
double path_loss_db(double d2d_m, const PathLossParams& params);

/// Generic log-distance alternative: PL = intercept + slope*log10(d_3D / d_ref).
struct LogDistanceParams {
    double intercept_db = 0.0;
    double slope_db_per_decade = 0.0;
    double shadow_std_db = 0.0;
    double reference_distance_m = 1.0;
};

double log_distance_path_loss_db(double d3d_m, const LogDistanceParams& params);

/// Linear channel gains beta_mk (and their dB image) for every AP/UE pair.
struct LargeScaleMap {
    int num_aps = 0;
    int num_users = 0;
    std::vector<double> beta_linear; ///< row-major M x K
    std::vector<double> beta_db;     ///< row-major M x K

    double beta(int m, int k) const { return beta_linear[idx(m, k)]; }
    double beta_in_db(int m, int k) const { return beta_db[idx(m, k)]; }

    std::size_t idx(int m, int k) const {
        return static_cast<std::size_t>(m) * static_cast<std::size_t>(num_users) +
               static_cast<std::size_t>(k);
    }
};

/// beta_db = -PL(d_2d) + F, F ~ N(0, shadow_std^2), drawn AP-major.
/// Distances below 10 m are clamped to the model floor; above 5 km the
/// range error propagates.
LargeScaleMap large_scale_map(const Topology& topo, const PathLossParams& params,
                              SeededRng& rng);

/// Same map built from the log-distance hook instead of UMa-LOS.
LargeScaleMap large_scale_map_log_distance(const Topology& topo,
                                           const LogDistanceParams& params,
                                           SeededRng& rng);

/// One coherence block of small-scale gains: per AP m a K x N matrix
/// with entries sqrt(beta_mk) * CN(0,1).
struct SmallScaleBlock {
    int num_aps = 0;
    int num_users = 0;
    int num_antennas = 0;
    std::uint64_t block_id = 0;
    std::vector<ComplexMatrix> per_ap; ///< M matrices of shape K x N
};

/// Draws are taken from rng.split("ap", m), so per-AP generation is
/// order-independent and parallelizable.
SmallScaleBlock small_scale_block(const LargeScaleMap& beta, int num_antennas,
                                  std::uint64_t block_id, const SeededRng& rng);

/// The K x N matrix a single AP would get inside small_scale_block for
/// the same block stream; lets callers realize one AP without paying
/// for the full block.
ComplexMatrix small_scale_for_ap(const LargeScaleMap& beta, int ap, int num_antennas,
                                 const SeededRng& block_rng);

/// CSV with header `m,k,beta_db`.
void write_beta_csv(const std::filesystem::path& path, const LargeScaleMap& map);

} // namespace gfra

#endif
