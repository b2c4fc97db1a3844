#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "gfra/dataset.hpp"
#include "gfra/errors.hpp"

using namespace gfra;

namespace {

/// Small fully-specified system: M=4 APs, K=6 devices, L=5, N=2.
SystemRealization tiny_system(double noise_w, std::uint64_t seed = 77) {
    SystemRealization sys;
    TopologyConfig tc;
    tc.area_side_m = 200.0;
    tc.num_aps = 4;
    tc.num_users = 6;
    tc.min_ue_ap_distance_m = 10.0;
    tc.ap_height_m = 12.0;
    tc.ue_height_m = 1.5;
    SeededRng topo_rng(seed, 0);
    sys.topology = generate_topology(tc, topo_rng);

    PathLossParams plp;
    plp.carrier_freq_hz = 900e6;
    plp.ap_height_m = 12.0;
    plp.ue_height_m = 1.5;
    plp.shadow_std_db = 1.0;
    SeededRng shadow(seed + 1, 0);
    sys.beta = large_scale_map(sys.topology, plp, shadow);

    SeededRng pilot(seed + 2, 0);
    sys.pilots = generate_pilotbook(5, 6, pilot);

    sys.power.rho_w.assign(6, 0.2);
    sys.power.noise_power_w = noise_w;
    sys.num_antennas = 2;
    return sys;
}

GenerationStreams streams_from(std::uint64_t seed) {
    return GenerationStreams{
        SeededRng(seed, 1),
        SeededRng(seed, 2),
        SeededRng(seed, 3),
        SeededRng(seed, 4),
    };
}

std::filesystem::path temp_file(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_SUITE("dataset") {

TEST_CASE("feature layout: real block then imaginary block, antenna-major") {
    ComplexMatrix y(2, 1);
    y(0, 0) = {1.0, 2.0};
    y(1, 0) = {3.0, 4.0};
    CHECK(extract_features(y) == std::vector<double>{1.0, 3.0, 2.0, 4.0});

    ComplexMatrix zero(3, 2);
    for (double v : extract_features(zero)) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("feature layout round-trips through the inverse assembly") {
    SeededRng rng(9, 0);
    ComplexMatrix y(7, 3);
    for (auto& z : y.entries) {
        z = rng.complex_normal(2.0);
    }
    const auto f = extract_features(y);
    REQUIRE(f.size() == 2 * 7 * 3);
    const ComplexMatrix back = assemble_observation(f, 7, 3);
    CHECK(back == y);
}

TEST_CASE("scaler standardizes the fit set and keeps degenerate columns finite") {
    Dataset ds;
    ds.header.num_users = 1;
    ds.header.pilot_length = 1;
    ds.header.num_antennas = 2; // feature_dim = 4
    for (int i = 0; i < 8; ++i) {
        Sample s;
        s.features = {static_cast<float>(i), 5.0f, static_cast<float>(-i), 1.0f};
        s.labels = {0};
        s.block_id = static_cast<std::uint64_t>(i);
        ds.samples.push_back(s);
    }
    std::vector<std::size_t> all(ds.samples.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i] = i;
    }
    const FeatureScaler scaler = fit_scaler(ds, all);
    CHECK(scaler.stddev[1] == 1.0); // constant column

    std::vector<double> colmean(4, 0.0);
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        const auto scaled = apply_scaler(scaler, features_as_double(ds.samples[i]));
        for (int j = 0; j < 4; ++j) {
            colmean[j] += scaled[j];
        }
        CHECK(scaled[1] == 0.0);
        CHECK(scaled[3] == 0.0);
    }
    for (double m : colmean) {
        CHECK(std::abs(m / 8.0) < 1e-10);
    }

    CHECK_THROWS_AS((void)fit_scaler(ds, std::vector<std::size_t>{0}),
                    std::invalid_argument);
}

TEST_CASE("apply_scaler is affine") {
    FeatureScaler scaler;
    scaler.mean = {1.0, -2.0};
    scaler.stddev = {2.0, 4.0};
    const std::vector<double> x{3.0, 6.0};
    std::vector<double> ax{2.0 * 3.0 + 0.5, 2.0 * 6.0 + 0.5};
    const auto sx = apply_scaler(scaler, x);
    const auto sax = apply_scaler(scaler, ax);
    for (int j = 0; j < 2; ++j) {
        CHECK(sax[j] == doctest::Approx(2.0 * sx[j] +
                                        (0.5 + scaler.mean[j] * (2.0 - 1.0) - 0.0) /
                                            scaler.stddev[j] * 1.0)
                            .epsilon(1e-12));
    }
}

TEST_CASE("all-aps policy emits one sample per AP sharing the slot's labels") {
    const auto sys = tiny_system(1e-13);
    GenerationOptions opts;
    opts.slot_count = 1;
    opts.epsilon = 0.5;
    opts.policy = ApPolicy::all_aps;
    const Dataset ds = generate_dataset(sys, opts, streams_from(5));
    REQUIRE(ds.samples.size() == 4);
    for (const auto& s : ds.samples) {
        CHECK(s.labels == ds.samples[0].labels);
        CHECK(s.block_id == 0);
    }
    CHECK(ds.samples[0].ap_index == 0);
    CHECK(ds.samples[3].ap_index == 3);
}

TEST_CASE("header reflects the generation parameters") {
    const auto sys = tiny_system(1e-13);
    GenerationOptions opts;
    opts.slot_count = 50;
    opts.epsilon = 0.1;
    opts.policy = ApPolicy::uniform_random_ap;
    opts.recorded_seed = 12345;
    const Dataset ds = generate_dataset(sys, opts, streams_from(6));
    CHECK(ds.header.sample_count == 50);
    CHECK(ds.header.num_users == 6);
    CHECK(ds.header.pilot_length == 5);
    CHECK(ds.header.num_antennas == 2);
    CHECK(ds.header.num_aps == 4);
    CHECK(ds.header.epsilon_micro == 100000);
    CHECK(ds.header.generator_seed == 12345);
    CHECK(ds.header.feature_dim() == 20);
    for (const auto& s : ds.samples) {
        CHECK(s.features.size() == 20);
        CHECK(s.labels.size() == 6);
        CHECK(s.ap_index < 4);
    }
}

TEST_CASE("label density tracks the activation probability") {
    const auto sys = tiny_system(1e-13);
    GenerationOptions opts;
    opts.slot_count = 20000;
    opts.epsilon = 0.1;
    opts.policy = ApPolicy::uniform_random_ap;
    const Dataset ds = generate_dataset(sys, opts, streams_from(7));
    long long active = 0, total = 0;
    for (const auto& s : ds.samples) {
        for (auto b : s.labels) {
            active += b;
            ++total;
        }
    }
    const double density = static_cast<double>(active) / static_cast<double>(total);
    // binomial CI at ~3.5 sigma for n = 120000, p = 0.1
    CHECK(std::abs(density - 0.1) < 0.0035);
}

TEST_CASE("fixed fading shares the channel within a block, per-slot does not") {
    auto sys = tiny_system(0.0); // noiseless so features expose the channel
    GenerationOptions opts;
    opts.slot_count = 4;
    opts.epsilon = 1.0; // every device active in every slot
    opts.policy = ApPolicy::all_aps;
    opts.fading_mode = FadingMode::fixed;
    opts.slots_per_block = 2;
    const Dataset fixed = generate_dataset(sys, opts, streams_from(8));
    REQUIRE(fixed.samples.size() == 16);
    // slots 0,1 share block 0: identical observations per AP
    for (int ap = 0; ap < 4; ++ap) {
        CHECK(fixed.samples[ap].features == fixed.samples[4 + ap].features);
        CHECK(fixed.samples[8 + ap].features == fixed.samples[12 + ap].features);
        CHECK(fixed.samples[ap].features != fixed.samples[8 + ap].features);
        CHECK(fixed.samples[ap].block_id == 0);
        CHECK(fixed.samples[8 + ap].block_id == 1);
    }

    opts.fading_mode = FadingMode::per_slot;
    const Dataset per_slot = generate_dataset(sys, opts, streams_from(8));
    for (int ap = 0; ap < 4; ++ap) {
        CHECK(per_slot.samples[ap].features != per_slot.samples[4 + ap].features);
    }
}

TEST_CASE("file round-trip preserves header and samples exactly") {
    const auto sys = tiny_system(1e-13);
    GenerationOptions opts;
    opts.slot_count = 30;
    opts.epsilon = 0.2;
    opts.policy = ApPolicy::dominant_random_user;
    opts.recorded_seed = 99;
    const Dataset ds = generate_dataset(sys, opts, streams_from(9));

    const auto path = temp_file("gfra_dataset_roundtrip.gfra");
    write_dataset(path, ds);
    const Dataset back = read_dataset(path);
    CHECK(back.header == ds.header);
    REQUIRE(back.samples.size() == ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        CHECK(back.samples[i] == ds.samples[i]);
    }
    std::filesystem::remove(path);
}

TEST_CASE("identical seeds produce byte-identical dataset files") {
    const auto sys = tiny_system(1e-13);
    GenerationOptions opts;
    opts.slot_count = 40;
    opts.epsilon = 0.1;

    const auto p1 = temp_file("gfra_dataset_det1.gfra");
    const auto p2 = temp_file("gfra_dataset_det2.gfra");
    write_dataset(p1, generate_dataset(sys, opts, streams_from(10)));
    write_dataset(p2, generate_dataset(sys, opts, streams_from(10)));

    std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
    const std::string b1((std::istreambuf_iterator<char>(f1)), {});
    const std::string b2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(b1 == b2);
    CHECK(!b1.empty());
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}

TEST_CASE("corrupt magic and truncation are reported with locations") {
    const auto sys = tiny_system(1e-13);
    GenerationOptions opts;
    opts.slot_count = 3;
    opts.epsilon = 0.3;
    const Dataset ds = generate_dataset(sys, opts, streams_from(11));
    const auto path = temp_file("gfra_dataset_bad.gfra");
    write_dataset(path, ds);

    // Corrupt the magic.
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(0);
        f.write("XXXX", 4);
    }
    CHECK_THROWS_AS((void)read_dataset(path), format_error);

    // Rewrite, then truncate inside the last record.
    write_dataset(path, ds);
    const auto full = std::filesystem::file_size(path);
    std::filesystem::resize_file(path, full - 3);
    try {
        (void)read_dataset(path);
        FAIL("expected format_error");
    } catch (const format_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("sample 2") != std::string::npos);
    }
    std::filesystem::remove(path);
}

TEST_CASE("slot split keeps co-slot samples on one side") {
    const auto sys = tiny_system(1e-13);
    GenerationOptions opts;
    opts.slot_count = 10;
    opts.epsilon = 0.5;
    opts.policy = ApPolicy::all_aps;
    const Dataset ds = generate_dataset(sys, opts, streams_from(12));
    const SlotSplit split = split_by_slot(ds, 0.2);
    CHECK(split.train_indices.size() == 8 * 4);
    CHECK(split.val_indices.size() == 2 * 4);

    for (std::size_t ti : split.train_indices) {
        for (std::size_t vi : split.val_indices) {
            CHECK(ds.samples[ti].block_id != ds.samples[vi].block_id);
        }
    }
}

TEST_CASE("inspection CSV has the documented header") {
    const auto sys = tiny_system(1e-13);
    GenerationOptions opts;
    opts.slot_count = 2;
    opts.epsilon = 0.5;
    const Dataset ds = generate_dataset(sys, opts, streams_from(13));
    const auto path = temp_file("gfra_dataset_export.csv");
    write_dataset_csv(path, ds);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header.rfind("sample_id,ap,block_id,label_bits_hex,feature_0", 0) == 0);
    std::filesystem::remove(path);
}

} // TEST_SUITE
