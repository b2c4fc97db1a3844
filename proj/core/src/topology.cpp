#include "gfra/topology.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "gfra/errors.hpp"
#include "io_util.hpp"

namespace gfra {

namespace {
constexpr int kRetryBudgetPerPoint = 100000;
} // namespace

void TopologyConfig::validate() const {
    if (!(area_side_m > 0.0)) {
        throw std::invalid_argument("TopologyConfig: area_side_m must be > 0");
    }
    if (num_aps < 1 || num_users < 1) {
        throw std::invalid_argument("TopologyConfig: num_aps and num_users must be >= 1");
    }
    if (edge_distance_m < 0.0 || min_ue_ap_distance_m < 0.0 || min_ap_ap_distance_m < 0.0) {
        throw std::invalid_argument("TopologyConfig: distances must be >= 0");
    }
    if (!(area_side_m > 2.0 * edge_distance_m)) {
        throw std::invalid_argument(
            "TopologyConfig: area_side_m must exceed twice edge_distance_m");
    }
}

double distance_2d(const Vec2& p, const Vec2& q) {
    return std::hypot(p.x - q.x, p.y - q.y);
}

double distance_3d(const Vec2& p, const Vec2& q, double h_bs_m, double h_ut_m) {
    const double d2 = distance_2d(p, q);
    const double dh = h_bs_m - h_ut_m;
    return std::sqrt(d2 * d2 + dh * dh);
}

Topology generate_topology(const TopologyConfig& cfg, SeededRng& rng) {
    cfg.validate();

    Topology topo;
    topo.config = cfg;
    topo.ap_positions.reserve(static_cast<std::size_t>(cfg.num_aps));
    topo.ue_positions.reserve(static_cast<std::size_t>(cfg.num_users));

    const double lo = cfg.edge_distance_m;
    const double hi = cfg.area_side_m - cfg.edge_distance_m;

    for (int m = 0; m < cfg.num_aps; ++m) {
        bool placed = false;
        for (int attempt = 0; attempt < kRetryBudgetPerPoint; ++attempt) {
            const Vec2 cand{rng.uniform(lo, hi), rng.uniform(lo, hi)};
            bool ok = true;
            for (const auto& ap : topo.ap_positions) {
                if (distance_2d(cand, ap) < cfg.min_ap_ap_distance_m) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                topo.ap_positions.push_back(cand);
                placed = true;
                break;
            }
        }
        if (!placed) {
            throw placement_error(
                "generate_topology: could not satisfy min_ap_ap_distance_m=" +
                std::to_string(cfg.min_ap_ap_distance_m) + " for AP " + std::to_string(m));
        }
    }

    for (int k = 0; k < cfg.num_users; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < kRetryBudgetPerPoint; ++attempt) {
            const Vec2 cand{rng.uniform(0.0, cfg.area_side_m),
                            rng.uniform(0.0, cfg.area_side_m)};
            bool ok = true;
            for (const auto& ap : topo.ap_positions) {
                if (distance_2d(cand, ap) < cfg.min_ue_ap_distance_m) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                topo.ue_positions.push_back(cand);
                placed = true;
                break;
            }
        }
        if (!placed) {
            throw placement_error(
                "generate_topology: could not satisfy min_ue_ap_distance_m=" +
                std::to_string(cfg.min_ue_ap_distance_m) + " for UE " + std::to_string(k));
        }
    }

    return topo;
}

void write_topology_csv(const std::filesystem::path& path, const Topology& topo) {
    detail::atomic_write(path, [&](std::ofstream& out) {
        out.precision(std::numeric_limits<double>::max_digits10);
        out << "kind,x_m,y_m\n";
        for (const auto& p : topo.ap_positions) {
            out << "ap," << p.x << "," << p.y << "\n";
        }
        for (const auto& p : topo.ue_positions) {
            out << "ue," << p.x << "," << p.y << "\n";
        }
    });
}

} // namespace gfra
