/**
 * Supervised samples for the activity detector and their on-disk form.
 *
 * A sample is the flattened observation of one AP in one slot:
 * 2NL features laid out as [Re block | Im block], each block
 * antenna-major (all L symbols of antenna 0, then antenna 1, ...),
 * labeled with the slot's K-bit activity vector.
 *
 * File format "GFRA" v1, little-endian:
 *   magic[4] u32(version) u32(K) u32(L) u32(N) u32(M)
 *   u32(epsilon * 1e6) u64(sample_count) u8(fading_mode) u64(seed)
 * followed by sample_count records of
 *   u32(ap_index) u64(block_id) f32[2NL](features) u8[ceil(K/8)](labels,
 *   LSB-first packed bits).
 */
#ifndef GFRA_DATASET_HPP
#define GFRA_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gfra/airlink.hpp"
#include "gfra/complex_matrix.hpp"
#include "gfra/rng.hpp"

namespace gfra {

enum class FadingMode : std::uint8_t {
    per_slot = 0, ///< independent small-scale fading every slot
    fixed = 1,    ///< fading held constant within a coherence block
};

enum class ApPolicy {
    dominant_random_user, ///< record the dominant AP of a random device
    uniform_random_ap,    ///< record one uniformly chosen AP per slot
    all_aps,              ///< record every AP (M samples per slot)
};

struct Sample {
    std::vector<float> features;      ///< 2NL, raw (unstandardized)
    std::vector<std::uint8_t> labels; ///< K entries of 0/1
    std::uint32_t ap_index = 0;
    std::uint64_t block_id = 0;

    bool operator==(const Sample&) const = default;
};

struct DatasetHeader {
    std::uint32_t version = 1;
    std::uint32_t num_users = 0;    ///< K
    std::uint32_t pilot_length = 0; ///< L
    std::uint32_t num_antennas = 0; ///< N
    std::uint32_t num_aps = 0;      ///< M
    std::uint32_t epsilon_micro = 0;
    std::uint64_t sample_count = 0;
    FadingMode fading_mode = FadingMode::per_slot;
    std::uint64_t generator_seed = 0;

    std::size_t feature_dim() const {
        return 2ull * num_antennas * pilot_length;
    }

    bool operator==(const DatasetHeader&) const = default;
};

struct Dataset {
    DatasetHeader header;
    std::vector<Sample> samples;
};

/// Flattens an L x N observation into 2NL reals: all real parts
/// antenna-major, then all imaginary parts in the same order.
std::vector<double> extract_features(const ComplexMatrix& y);

/// Inverse of extract_features (used to rebuild Y for transforms).
ComplexMatrix assemble_observation(std::span<const double> features,
                                   std::size_t pilot_length, std::size_t num_antennas);

std::vector<double> features_as_double(const Sample& s);

/// Per-feature standardization fitted on the training split.
/// Zero-variance features keep std = 1 so they map to zero.
struct FeatureScaler {
    std::vector<double> mean;
    std::vector<double> stddev;

    bool operator==(const FeatureScaler&) const = default;
};

FeatureScaler fit_scaler(const Dataset& ds, std::span<const std::size_t> indices);
std::vector<double> apply_scaler(const FeatureScaler& scaler,
                                 std::span<const double> features);

/// Simulation inputs for dataset generation beyond the fixed system.
struct GenerationOptions {
    int slot_count = 0;
    double epsilon = 0.0;
    ApPolicy policy = ApPolicy::uniform_random_ap;
    FadingMode fading_mode = FadingMode::per_slot;
    int slots_per_block = 1;          ///< used when fading_mode == fixed
    std::uint64_t recorded_seed = 0;  ///< provenance value stored in the header
};

/// Independent randomness sources for generation; each is split per
/// slot (or per coherence block for fading) internally.
struct GenerationStreams {
    SeededRng activity;
    SeededRng noise;
    SeededRng fading;
    SeededRng pick; ///< AP / user selection for single-AP policies
};

/// Simulates slot_count random-access slots. Per-slot randomness comes
/// from split sub-streams, so output bytes do not depend on generation
/// order. Labels are always the full K-bit activity vector.
Dataset generate_dataset(const SystemRealization& sys, const GenerationOptions& opts,
                         const GenerationStreams& streams);

void write_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset(const std::filesystem::path& path);

/// Inspection CSV: sample_id, ap, block_id, label_bits_hex, feature_0...
void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds);

/// 90/10-style split on slot (block/slot id) boundaries so co-slot
/// samples never straddle the train/validation line.
struct SlotSplit {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> val_indices;
};

SlotSplit split_by_slot(const Dataset& ds, double val_fraction = 0.1);

} // namespace gfra

#endif
