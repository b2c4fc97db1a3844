#include "gfra/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

#include "gfra/errors.hpp"
#include "io_util.hpp"

namespace gfra {

namespace {
constexpr char kMagic[4] = {'G', 'F', 'R', 'A'};
constexpr std::uint32_t kVersion = 1;
} // namespace

std::vector<double> extract_features(const ComplexMatrix& y) {
    if (y.rows == 0 || y.cols == 0) {
        throw std::invalid_argument("extract_features: empty observation");
    }
    const std::size_t L = y.rows;
    const std::size_t N = y.cols;
    std::vector<double> f;
    f.reserve(2 * N * L);
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t l = 0; l < L; ++l) {
            f.push_back(y(l, n).real());
        }
    }
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t l = 0; l < L; ++l) {
            f.push_back(y(l, n).imag());
        }
    }
    return f;
}

ComplexMatrix assemble_observation(std::span<const double> features,
                                   std::size_t pilot_length, std::size_t num_antennas) {
    if (features.size() != 2 * pilot_length * num_antennas) {
        throw std::invalid_argument("assemble_observation: feature length mismatch");
    }
    ComplexMatrix y(pilot_length, num_antennas);
    const std::size_t half = pilot_length * num_antennas;
    std::size_t i = 0;
    for (std::size_t n = 0; n < num_antennas; ++n) {
        for (std::size_t l = 0; l < pilot_length; ++l, ++i) {
            y(l, n) = {features[i], features[half + i]};
        }
    }
    return y;
}

std::vector<double> features_as_double(const Sample& s) {
    return {s.features.begin(), s.features.end()};
}

FeatureScaler fit_scaler(const Dataset& ds, std::span<const std::size_t> indices) {
    if (indices.size() < 2) {
        throw std::invalid_argument("fit_scaler: need at least 2 samples");
    }
    const std::size_t dim = ds.header.feature_dim();
    FeatureScaler scaler;
    scaler.mean.assign(dim, 0.0);
    scaler.stddev.assign(dim, 0.0);

    for (std::size_t idx : indices) {
        const auto& f = ds.samples[idx].features;
        for (std::size_t j = 0; j < dim; ++j) {
            scaler.mean[j] += static_cast<double>(f[j]);
        }
    }
    const double inv_n = 1.0 / static_cast<double>(indices.size());
    for (auto& m : scaler.mean) {
        m *= inv_n;
    }
    for (std::size_t idx : indices) {
        const auto& f = ds.samples[idx].features;
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = static_cast<double>(f[j]) - scaler.mean[j];
            scaler.stddev[j] += d * d;
        }
    }
    std::size_t degenerate = 0;
    for (auto& v : scaler.stddev) {
        v = std::sqrt(v * inv_n);
        if (!(v > 0.0)) {
            v = 1.0;
            ++degenerate;
        }
    }
    if (degenerate > 0) {
        std::fprintf(stderr,
                     "fit_scaler: %zu zero-variance feature(s); their std set to 1\n",
                     degenerate);
    }
    return scaler;
}

std::vector<double> apply_scaler(const FeatureScaler& scaler,
                                 std::span<const double> features) {
    if (features.size() != scaler.mean.size()) {
        throw std::invalid_argument("apply_scaler: feature length mismatch");
    }
    std::vector<double> out(features.size());
    for (std::size_t j = 0; j < features.size(); ++j) {
        out[j] = (features[j] - scaler.mean[j]) / scaler.stddev[j];
    }
    return out;
}

Dataset generate_dataset(const SystemRealization& sys, const GenerationOptions& opts,
                         const GenerationStreams& streams) {
    if (opts.slot_count < 1) {
        throw std::invalid_argument("generate_dataset: slot_count must be >= 1");
    }
    if (!(opts.epsilon >= 0.0 && opts.epsilon <= 1.0)) {
        throw std::invalid_argument("generate_dataset: epsilon must lie in [0, 1]");
    }
    if (opts.fading_mode == FadingMode::fixed && opts.slots_per_block < 1) {
        throw std::invalid_argument("generate_dataset: slots_per_block must be >= 1");
    }

    const int M = sys.beta.num_aps;
    const int K = sys.beta.num_users;
    const int N = sys.num_antennas;
    const int L = sys.pilots.pilot_length;

    Dataset ds;
    ds.header.num_users = static_cast<std::uint32_t>(K);
    ds.header.pilot_length = static_cast<std::uint32_t>(L);
    ds.header.num_antennas = static_cast<std::uint32_t>(N);
    ds.header.num_aps = static_cast<std::uint32_t>(M);
    ds.header.epsilon_micro =
        static_cast<std::uint32_t>(std::llround(opts.epsilon * 1e6));
    ds.header.fading_mode = opts.fading_mode;
    ds.header.generator_seed = opts.recorded_seed;

    const std::size_t per_slot = opts.policy == ApPolicy::all_aps
                                     ? static_cast<std::size_t>(M)
                                     : std::size_t{1};
    ds.samples.reserve(static_cast<std::size_t>(opts.slot_count) * per_slot);

    for (int slot = 0; slot < opts.slot_count; ++slot) {
        const auto slot_u = static_cast<std::uint64_t>(slot);
        const std::uint64_t block = opts.fading_mode == FadingMode::fixed
                                        ? slot_u / static_cast<std::uint64_t>(
                                                       opts.slots_per_block)
                                        : slot_u;

        SeededRng activity_rng = streams.activity.split("slot", slot_u);
        const SeededRng noise_rng = streams.noise.split("slot", slot_u);
        const SeededRng fading_rng = streams.fading.split("block", block);

        const ActivityVector activity = sample_activity(K, opts.epsilon, activity_rng);

        auto record_ap = [&](int ap) {
            const ComplexMatrix g =
                small_scale_for_ap(sys.beta, ap, N, fading_rng);
            SeededRng ap_noise = noise_rng.split("ap", static_cast<std::uint64_t>(ap));
            const ComplexMatrix y =
                synth_ap_observation(sys.pilots, activity, sys.power, g, ap_noise);
            Sample s;
            const auto f = extract_features(y);
            s.features.assign(f.begin(), f.end());
            s.labels = activity.a;
            s.ap_index = static_cast<std::uint32_t>(ap);
            s.block_id = block;
            ds.samples.push_back(std::move(s));
        };

        switch (opts.policy) {
        case ApPolicy::uniform_random_ap: {
            SeededRng pick = streams.pick.split("slot", slot_u);
            record_ap(static_cast<int>(pick.uniform_below(static_cast<std::uint64_t>(M))));
            break;
        }
        case ApPolicy::dominant_random_user: {
            SeededRng pick = streams.pick.split("slot", slot_u);
            const int user =
                static_cast<int>(pick.uniform_below(static_cast<std::uint64_t>(K)));
            record_ap(dominant_ap(sys.beta, user));
            break;
        }
        case ApPolicy::all_aps:
            for (int m = 0; m < M; ++m) {
                record_ap(m);
            }
            break;
        }
    }

    ds.header.sample_count = ds.samples.size();
    return ds;
}

namespace {

std::vector<std::uint8_t> pack_labels(const std::vector<std::uint8_t>& labels) {
    std::vector<std::uint8_t> bytes((labels.size() + 7) / 8, 0);
    for (std::size_t k = 0; k < labels.size(); ++k) {
        if (labels[k]) {
            bytes[k / 8] |= static_cast<std::uint8_t>(1u << (k % 8));
        }
    }
    return bytes;
}

std::vector<std::uint8_t> unpack_labels(const std::vector<std::uint8_t>& bytes,
                                        std::size_t count) {
    std::vector<std::uint8_t> labels(count);
    for (std::size_t k = 0; k < count; ++k) {
        labels[k] = (bytes[k / 8] >> (k % 8)) & 1u;
    }
    return labels;
}

} // namespace

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
    detail::atomic_write(path, [&](std::ofstream& out) {
        detail::put_bytes(out, kMagic, 4);
        detail::put_u32(out, ds.header.version);
        detail::put_u32(out, ds.header.num_users);
        detail::put_u32(out, ds.header.pilot_length);
        detail::put_u32(out, ds.header.num_antennas);
        detail::put_u32(out, ds.header.num_aps);
        detail::put_u32(out, ds.header.epsilon_micro);
        detail::put_u64(out, ds.samples.size());
        detail::put_u8(out, static_cast<std::uint8_t>(ds.header.fading_mode));
        detail::put_u64(out, ds.header.generator_seed);

        const std::size_t dim = ds.header.feature_dim();
        for (const auto& s : ds.samples) {
            if (s.features.size() != dim ||
                s.labels.size() != ds.header.num_users) {
                throw format_error("write_dataset: sample does not match header dims");
            }
            detail::put_u32(out, s.ap_index);
            detail::put_u64(out, s.block_id);
            detail::put_bytes(out, s.features.data(), 4 * s.features.size());
            const auto packed = pack_labels(s.labels);
            detail::put_bytes(out, packed.data(), packed.size());
        }
    });
}

Dataset read_dataset(const std::filesystem::path& path) {
    detail::BinaryReader in(path, "read_dataset");

    char magic[4];
    in.read_bytes(magic, 4);
    if (std::string_view(magic, 4) != std::string_view(kMagic, 4)) {
        throw format_error("read_dataset: bad magic at byte offset 0 (not a GFRA file)");
    }
    Dataset ds;
    ds.header.version = in.u32();
    if (ds.header.version != kVersion) {
        throw format_error("read_dataset: unsupported version " +
                           std::to_string(ds.header.version));
    }
    ds.header.num_users = in.u32();
    ds.header.pilot_length = in.u32();
    ds.header.num_antennas = in.u32();
    ds.header.num_aps = in.u32();
    ds.header.epsilon_micro = in.u32();
    ds.header.sample_count = in.u64();
    const std::uint8_t mode = in.u8();
    if (mode > 1) {
        throw format_error("read_dataset: invalid fading_mode flag " +
                           std::to_string(mode));
    }
    ds.header.fading_mode = static_cast<FadingMode>(mode);
    ds.header.generator_seed = in.u64();

    if (ds.header.num_users == 0 || ds.header.pilot_length == 0 ||
        ds.header.num_antennas == 0) {
        throw format_error("read_dataset: header declares zero dimensions");
    }

    const std::size_t dim = ds.header.feature_dim();
    const std::size_t label_bytes = (ds.header.num_users + 7) / 8;
    ds.samples.resize(ds.header.sample_count);
    for (std::size_t i = 0; i < ds.header.sample_count; ++i) {
        try {
            auto& s = ds.samples[i];
            s.ap_index = in.u32();
            s.block_id = in.u64();
            s.features.resize(dim);
            in.read_bytes(s.features.data(), 4 * dim);
            std::vector<std::uint8_t> packed(label_bytes);
            in.read_bytes(packed.data(), packed.size());
            s.labels = unpack_labels(packed, ds.header.num_users);
        } catch (const format_error& e) {
            throw format_error("read_dataset: sample " + std::to_string(i) + ": " +
                               e.what());
        }
    }
    if (!in.at_eof()) {
        throw format_error("read_dataset: trailing bytes after sample " +
                           std::to_string(ds.header.sample_count - 1));
    }
    return ds;
}

void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds) {
    detail::atomic_write(path, [&](std::ofstream& out) {
        out.precision(std::numeric_limits<float>::max_digits10);
        out << "sample_id,ap,block_id,label_bits_hex";
        for (std::size_t j = 0; j < ds.header.feature_dim(); ++j) {
            out << ",feature_" << j;
        }
        out << "\n";
        for (std::size_t i = 0; i < ds.samples.size(); ++i) {
            const auto& s = ds.samples[i];
            out << i << "," << s.ap_index << "," << s.block_id << ",";
            static const char* hex = "0123456789abcdef";
            for (std::uint8_t b : pack_labels(s.labels)) {
                out << hex[b >> 4] << hex[b & 0xf];
            }
            for (float f : s.features) {
                out << "," << f;
            }
            out << "\n";
        }
    });
}

SlotSplit split_by_slot(const Dataset& ds, double val_fraction) {
    if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
        throw std::invalid_argument("split_by_slot: val_fraction must lie in [0, 1)");
    }
    // Group contiguous runs of equal block_id; a run is one slot (or one
    // coherence block in fixed-fading mode) and is never split.
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= ds.samples.size(); ++i) {
        if (i == ds.samples.size() || ds.samples[i].block_id != ds.samples[start].block_id) {
            groups.emplace_back(start, i);
            start = i;
        }
    }
    if (groups.empty()) {
        throw std::invalid_argument("split_by_slot: empty dataset");
    }
    auto val_groups = static_cast<std::size_t>(
        std::llround(val_fraction * static_cast<double>(groups.size())));
    if (val_fraction > 0.0 && val_groups == 0 && groups.size() >= 2) {
        val_groups = 1;
    }
    val_groups = std::min(val_groups, groups.size() - 1);

    SlotSplit split;
    const std::size_t train_groups = groups.size() - val_groups;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        auto& dst = g < train_groups ? split.train_indices : split.val_indices;
        for (std::size_t i = groups[g].first; i < groups[g].second; ++i) {
            dst.push_back(i);
        }
    }
    return split;
}

} // namespace gfra
