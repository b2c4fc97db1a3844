/**
 * Planar placement of access points and user devices in a square
 * service area, with minimum-spacing constraints enforced by
 * rejection sampling.
 */
#ifndef GFRA_TOPOLOGY_HPP
#define GFRA_TOPOLOGY_HPP

#include <filesystem>
#include <vector>

#include "gfra/rng.hpp"

namespace gfra {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Vec2&) const = default;
};

struct TopologyConfig {
    double area_side_m = 0.0;          ///< D: side of the D x D area
    int num_aps = 0;                   ///< M
    int num_users = 0;                 ///< K
    double edge_distance_m = 0.0;      ///< AP margin from the area border
    double min_ue_ap_distance_m = 0.0; ///< minimum horizontal UE-AP spacing
    double min_ap_ap_distance_m = 0.0; ///< minimum AP-AP spacing
    double ap_height_m = 0.0;          ///< h_BS
    double ue_height_m = 0.0;          ///< h_UT

    /// Throws std::invalid_argument on inconsistent geometry.
    void validate() const;
};

struct Topology {
    std::vector<Vec2> ap_positions;
    std::vector<Vec2> ue_positions;
    TopologyConfig config;
};

/// Horizontal (2-D) Euclidean distance in meters.
double distance_2d(const Vec2& p, const Vec2& q);

/// 3-D distance assuming p is at height h_bs and q at height h_ut.
double distance_3d(const Vec2& p, const Vec2& q, double h_bs_m, double h_ut_m);

/// Uniform placement conditioned on the spacing constraints. APs keep
/// the edge margin and mutual spacing; UEs keep the UE-AP minimum and
/// the area boundary. Throws placement_error when the rejection budget
/// (1e5 draws per point) is exhausted.
Topology generate_topology(const TopologyConfig& cfg, SeededRng& rng);

/// CSV with header `kind,x_m,y_m`, kind in {ap, ue}.
void write_topology_csv(const std::filesystem::path& path, const Topology& topo);

} // namespace gfra

#endif
