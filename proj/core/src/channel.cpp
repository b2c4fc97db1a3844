#include "gfra/channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "gfra/errors.hpp"
#include "io_util.hpp"

namespace gfra {

namespace {
constexpr double kSpeedOfLight = 299792458.0; // m/s
constexpr double kMinModelDistance = 10.0;    // m
constexpr double kMaxModelDistance = 5000.0;  // m
} // namespace

void PathLossParams::validate() const {
    if (!(carrier_freq_hz > 0.0)) {
        throw std::invalid_argument("PathLossParams: carrier_freq_hz must be > 0");
    }
    if (shadow_std_db < 0.0) {
        throw std::invalid_argument("PathLossParams: shadow_std_db must be >= 0");
    }
    breakpoint_distance_m(ap_height_m, ue_height_m, carrier_freq_hz); // height check
}

double breakpoint_distance_m(double h_bs_m, double h_ut_m, double carrier_freq_hz) {
    if (!(h_bs_m > 1.0) || !(h_ut_m > 1.0)) {
        throw std::invalid_argument(
            "breakpoint_distance_m: effective antenna heights require h > 1 m");
    }
    if (!(carrier_freq_hz > 0.0)) {
        throw std::invalid_argument("breakpoint_distance_m: carrier_freq_hz must be > 0");
    }
    return 4.0 * (h_bs_m - 1.0) * (h_ut_m - 1.0) * carrier_freq_hz / kSpeedOfLight;
}

double pl1_db(double d3d_m, double fc_ghz) {
    return 28.0 + 22.0 * std::log10(d3d_m) + 20.0 * std::log10(fc_ghz);
}

double pl2_db(double d3d_m, double breakpoint_m, double h_bs_m, double h_ut_m,
              double fc_ghz) {
    const double dh = h_bs_m - h_ut_m;
    return 28.0 + 40.0 * std::log10(d3d_m) + 20.0 * std::log10(fc_ghz) -
           9.0 * std::log10(breakpoint_m * breakpoint_m + dh * dh);
}

double path_loss_db(double d2d_m, const PathLossParams& params) {
    if (!(d2d_m >= kMinModelDistance && d2d_m <= kMaxModelDistance)) {
        throw model_range_error("path_loss_db: d_2d=" + std::to_string(d2d_m) +
                                " m outside model range [10, 5000]");
    }
    const double bp = breakpoint_distance_m(params.ap_height_m, params.ue_height_m,
                                            params.carrier_freq_hz);
    const double dh = params.ap_height_m - params.ue_height_m;
    const double d3d = std::sqrt(d2d_m * d2d_m + dh * dh);
    const double fc_ghz = params.carrier_freq_hz / 1e9;
    if (d2d_m <= bp) {
        return pl1_db(d3d, fc_ghz);
    }
    return pl2_db(d3d, bp, params.ap_height_m, params.ue_height_m, fc_ghz);
}

double log_distance_path_loss_db(double d3d_m, const LogDistanceParams& params) {
    if (!(d3d_m > 0.0) || !(params.reference_distance_m > 0.0)) {
        throw std::invalid_argument("log_distance_path_loss_db: distances must be > 0");
    }
    return params.intercept_db +
           params.slope_db_per_decade * std::log10(d3d_m / params.reference_distance_m);
}

namespace {

template <typename PathLossFn>
LargeScaleMap build_map(const Topology& topo, double shadow_std_db, SeededRng& rng,
                        PathLossFn&& pl_of_pair) {
    LargeScaleMap map;
    map.num_aps = static_cast<int>(topo.ap_positions.size());
    map.num_users = static_cast<int>(topo.ue_positions.size());
    const std::size_t n =
        static_cast<std::size_t>(map.num_aps) * static_cast<std::size_t>(map.num_users);
    map.beta_db.resize(n);
    map.beta_linear.resize(n);

    std::size_t i = 0;
    for (int m = 0; m < map.num_aps; ++m) {
        for (int k = 0; k < map.num_users; ++k, ++i) {
            const double pl = pl_of_pair(m, k);
            const double shadow = shadow_std_db > 0.0 ? rng.normal(0.0, shadow_std_db) : 0.0;
            map.beta_db[i] = -pl + shadow;
            map.beta_linear[i] = std::pow(10.0, map.beta_db[i] / 10.0);
        }
    }
    return map;
}

} // namespace

LargeScaleMap large_scale_map(const Topology& topo, const PathLossParams& params,
                              SeededRng& rng) {
    params.validate();
    return build_map(topo, params.shadow_std_db, rng, [&](int m, int k) {
        double d2d = distance_2d(topo.ap_positions[static_cast<std::size_t>(m)],
                                 topo.ue_positions[static_cast<std::size_t>(k)]);
        // Sub-10 m distances can occur in non-default geometries; the
        // model floor is applied rather than rejecting the topology.
        d2d = std::max(d2d, kMinModelDistance);
        return path_loss_db(d2d, params);
    });
}

LargeScaleMap large_scale_map_log_distance(const Topology& topo,
                                           const LogDistanceParams& params,
                                           SeededRng& rng) {
    const double h_bs = topo.config.ap_height_m;
    const double h_ut = topo.config.ue_height_m;
    return build_map(topo, params.shadow_std_db, rng, [&](int m, int k) {
        // Floor at 1 m so co-located antennas cannot produce log(0).
        const double d3d = std::max(
            distance_3d(topo.ap_positions[static_cast<std::size_t>(m)],
                        topo.ue_positions[static_cast<std::size_t>(k)], h_bs, h_ut),
            1.0);
        return log_distance_path_loss_db(d3d, params);
    });
}

ComplexMatrix small_scale_for_ap(const LargeScaleMap& beta, int ap, int num_antennas,
                                 const SeededRng& block_rng) {
    if (num_antennas < 1) {
        throw std::invalid_argument("small_scale_for_ap: num_antennas must be >= 1");
    }
    if (ap < 0 || ap >= beta.num_aps) {
        throw std::invalid_argument("small_scale_for_ap: AP index out of range");
    }
    SeededRng ap_rng = block_rng.split("ap", static_cast<std::uint64_t>(ap));
    ComplexMatrix g(static_cast<std::size_t>(beta.num_users),
                    static_cast<std::size_t>(num_antennas));
    for (int k = 0; k < beta.num_users; ++k) {
        const double scale = std::sqrt(beta.beta(ap, k));
        for (int n = 0; n < num_antennas; ++n) {
            g(static_cast<std::size_t>(k), static_cast<std::size_t>(n)) =
                scale * ap_rng.complex_normal(1.0);
        }
    }
    return g;
}

SmallScaleBlock small_scale_block(const LargeScaleMap& beta, int num_antennas,
                                  std::uint64_t block_id, const SeededRng& rng) {
    if (num_antennas < 1) {
        throw std::invalid_argument("small_scale_block: num_antennas must be >= 1");
    }
    SmallScaleBlock block;
    block.num_aps = beta.num_aps;
    block.num_users = beta.num_users;
    block.num_antennas = num_antennas;
    block.block_id = block_id;
    block.per_ap.reserve(static_cast<std::size_t>(beta.num_aps));
    for (int m = 0; m < beta.num_aps; ++m) {
        block.per_ap.push_back(small_scale_for_ap(beta, m, num_antennas, rng));
    }
    return block;
}

void write_beta_csv(const std::filesystem::path& path, const LargeScaleMap& map) {
    detail::atomic_write(path, [&](std::ofstream& out) {
        out.precision(std::numeric_limits<double>::max_digits10);
        out << "m,k,beta_db\n";
        for (int m = 0; m < map.num_aps; ++m) {
            for (int k = 0; k < map.num_users; ++k) {
                out << m << "," << k << "," << map.beta_in_db(m, k) << "\n";
            }
        }
    });
}

} // namespace gfra
