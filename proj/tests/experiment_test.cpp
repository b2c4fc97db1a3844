#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gfra/errors.hpp"
#include "gfra/experiment.hpp"

using namespace gfra;

namespace {

/// Desk-sized config that keeps every pipeline test under a second or
/// two: M=4, K=8, L=6, N=2, small detector.
ExperimentConfig tiny_config() {
    ExperimentConfig cfg = scenario1_config();
    cfg.area_side_m = 300.0;
    cfg.num_aps = 4;
    cfg.num_users = 8;
    cfg.edge_distance_m = 30.0;
    cfg.min_ap_ap_distance_m = 15.0;
    cfg.pilot_length = 6;
    cfg.num_antennas = 2;
    cfg.epsilon = 0.25;
    cfg.dataset_slots = 400;
    cfg.hidden_layers = 1;
    cfg.hidden_width = 16;
    cfg.train.batch_size = 64;
    cfg.train.max_epochs = 6;
    cfg.train.patience = 6;
    // Out of step with the coherence budget; silence the warning.
    cfg.coherence_time_s = 0.0;
    return cfg;
}

} // namespace

TEST_SUITE("experiment") {

TEST_CASE("scenario presets satisfy the coherence-block identity") {
    const ExperimentConfig cfg = scenario1_config();
    CHECK(cfg.pilot_length == 40);
    const auto budget = static_cast<int>(std::llround(
        cfg.reserved_fraction * cfg.coherence_time_s * cfg.coherence_bandwidth_hz));
    CHECK(budget == 40); // 0.2 * 1 ms * 200 kHz = 40 symbols
    CHECK(cfg.num_users == 100);
    CHECK(cfg.num_aps == 20);
    CHECK(cfg.num_antennas == 2);
    CHECK(cfg.epsilon == 0.1);
    CHECK(cfg.tx_power_w == 0.2);
    CHECK(cfg.noise_dbm == -109.0);
    CHECK(cfg.shadow_std_db == 1.0);
    CHECK(cfg.hidden_layers == 2);
    CHECK(cfg.hidden_width == 320);
    CHECK_NOTHROW(cfg.validate());

    const ExperimentConfig s2 = scenario2_like_config();
    CHECK(s2.area_side_m == 1000.0);
    CHECK(s2.path_loss_model == PathLossModel::log_distance);
    CHECK(s2.shadow_std_db == 2.0);
    CHECK_NOTHROW(s2.validate());

    CHECK_THROWS_AS((void)preset_config("scenario-9"), std::invalid_argument);
}

TEST_CASE("config JSON round-trip and error reporting") {
    const ExperimentConfig cfg = tiny_config();
    const std::string text = config_to_json_text(cfg);
    const ExperimentConfig back = config_from_json_text(text);
    CHECK(back.area_side_m == cfg.area_side_m);
    CHECK(back.num_users == cfg.num_users);
    CHECK(back.pilot_length == cfg.pilot_length);
    CHECK(back.train.batch_size == cfg.train.batch_size);
    CHECK(back.seed_init == cfg.seed_init);
    CHECK(back.ap_policy == cfg.ap_policy);

    CHECK_THROWS_WITH_AS((void)config_from_json_text(R"({"no_such_key": 1})"),
                         doctest::Contains("no_such_key"), std::invalid_argument);
    CHECK_THROWS_AS((void)config_from_json_text("not json"), format_error);
    CHECK_THROWS_WITH_AS((void)config_from_json_text(R"({"ap_policy": "sideways"})"),
                         doctest::Contains("ap_policy"), std::invalid_argument);

    // Overrides apply on top of the selected preset.
    const ExperimentConfig two =
        config_from_json_text(R"({"scenario": "scenario-2-like", "num_aps": 25})");
    CHECK(two.num_aps == 25);
    CHECK(two.path_loss_model == PathLossModel::log_distance);
}

TEST_CASE("config validation names the offending field") {
    ExperimentConfig cfg = tiny_config();
    cfg.epsilon = 1.5;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("epsilon"),
                         std::invalid_argument);
    cfg = tiny_config();
    cfg.tau_step = 0.0;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("tau_step"),
                         std::invalid_argument);
}

TEST_CASE("realized systems respect the geometry and dimensions") {
    const ExperimentConfig cfg = tiny_config();
    const SystemRealization sys = realize_system(cfg);
    CHECK(sys.topology.ap_positions.size() == 4);
    CHECK(sys.topology.ue_positions.size() == 8);
    CHECK(sys.beta.num_aps == 4);
    CHECK(sys.beta.num_users == 8);
    CHECK(sys.pilots.pilot_length == 6);
    CHECK(sys.power.noise_power_w == doctest::Approx(std::pow(10.0, -13.9)));
    CHECK(sys.num_antennas == 2);
}

TEST_CASE("dataset purposes draw disjoint randomness; reruns are identical") {
    const ExperimentConfig cfg = tiny_config();
    const SystemRealization sys = realize_system(cfg);
    const Dataset a1 = make_dataset(cfg, sys, 25, ApPolicy::uniform_random_ap, "train");
    const Dataset a2 = make_dataset(cfg, sys, 25, ApPolicy::uniform_random_ap, "train");
    const Dataset b = make_dataset(cfg, sys, 25, ApPolicy::uniform_random_ap, "eval");
    REQUIRE(a1.samples.size() == a2.samples.size());
    for (std::size_t i = 0; i < a1.samples.size(); ++i) {
        CHECK(a1.samples[i] == a2.samples[i]);
    }
    bool any_difference = false;
    for (std::size_t i = 0; i < a1.samples.size(); ++i) {
        any_difference |= !(a1.samples[i] == b.samples[i]);
    }
    CHECK(any_difference);
}

TEST_CASE("train_detector produces a usable model and scores") {
    const ExperimentConfig cfg = tiny_config();
    const SystemRealization sys = realize_system(cfg);
    const Dataset train_ds =
        make_dataset(cfg, sys, cfg.dataset_slots, cfg.ap_policy, "train");
    const TrainResult result = train_detector(cfg, train_ds);
    CHECK(!result.trace.empty());
    CHECK(result.model.arch.input_dim == 24); // 2 * 2 * 6
    CHECK(result.model.arch.output_dim == 8);

    const Dataset eval_ds = make_dataset(cfg, sys, 100, ApPolicy::uniform_random_ap, "eval");
    const ScoreSet scores = score_dataset(result.model, eval_ds);
    CHECK(scores.scores.size() == 100 * 8);
    const double auc = auc_of(result.model, eval_ds);
    CHECK(auc >= 0.0);
    CHECK(auc <= 1.0);
}

TEST_CASE("pareto filter marks exactly the non-dominated rows") {
    std::vector<ParetoRow> rows(4);
    rows[0].params = 10;
    rows[0].train_loss = 0.5;
    rows[1].params = 20;
    rows[1].train_loss = 0.4;
    rows[2].params = 30;
    rows[2].train_loss = 0.45; // dominated by rows[1]
    rows[3].params = 20;
    rows[3].train_loss = 0.4; // duplicate of rows[1]: neither dominates
    mark_pareto_efficient(rows);
    CHECK(rows[0].efficient);
    CHECK(rows[1].efficient);
    CHECK(!rows[2].efficient);
    CHECK(rows[3].efficient);
}

TEST_CASE("reduced architecture grid emits one row per point") {
    ExperimentConfig cfg = tiny_config();
    cfg.dataset_slots = 150;
    cfg.train.max_epochs = 2;
    cfg.train.patience = 2;
    const SystemRealization sys = realize_system(cfg);
    const Dataset ds = make_dataset(cfg, sys, cfg.dataset_slots, cfg.ap_policy, "train");
    const auto rows = run_pareto(cfg, ds, {1}, {8, 16});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].hidden_width == 8);
    CHECK(rows[1].hidden_width == 16);
    CHECK(rows[0].params < rows[1].params);
    for (const auto& r : rows) {
        CHECK(std::isfinite(r.train_loss));
        CHECK(std::isfinite(r.val_loss));
        CHECK(r.params == parameter_count({24, r.hidden_layers, r.hidden_width, 8}));
    }
    // With two points either both are efficient or the bigger one lost.
    CHECK(rows[0].efficient);

    const auto path = std::filesystem::temp_directory_path() / "gfra_pareto_test.csv";
    write_pareto_csv(path, rows);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "z,v,params_count,train_loss,val_loss,pareto_efficient");
    std::filesystem::remove(path);
}

TEST_CASE("snr-cdf matches an independent recomputation without shadowing") {
    ExperimentConfig cfg = tiny_config();
    cfg.num_aps = 1;
    cfg.num_users = 1;
    cfg.min_ap_ap_distance_m = 0.0;
    cfg.shadow_std_db = 0.0;
    const SnrCdfResult result = run_snr_cdf(cfg, 1);
    REQUIRE(result.sorted_snr_db.size() == 1);

    // Rebuild the same realization by hand and evaluate the closed form.
    SeededRng topo_rng = SeededRng(cfg.seed_topology).split("snr-topology", 0);
    const Topology topo = generate_topology(cfg.topology_config(), topo_rng);
    SeededRng shadow_rng = SeededRng(cfg.seed_channel).split("snr-shadowing", 0);
    const LargeScaleMap beta = large_scale_map(topo, cfg.path_loss_params(), shadow_rng);
    const auto expected = snr_per_device_db(
        beta, PowerProfile::uniform(1, cfg.tx_power_w, cfg.noise_power_w()));
    CHECK(result.sorted_snr_db[0] == doctest::Approx(expected[0]).epsilon(1e-12));
    CHECK(result.target_db == doctest::Approx(expected[0]).epsilon(1e-12));
}

TEST_CASE("threshold table and sweep writers emit unit-labeled headers") {
    SeededRng rng(1, 0);
    ScoreSet s;
    for (int i = 0; i < 500; ++i) {
        const bool active = rng.bernoulli(0.2) != 0;
        s.labels.push_back(active ? 1 : 0);
        s.scores.push_back(active ? rng.uniform(0.5, 1.0) : rng.uniform(0.0, 0.5));
    }
    const auto table = calibrate_threshold(s, 0.2, 0.05);
    const auto tmp = std::filesystem::temp_directory_path();
    write_threshold_csv(tmp / "gfra_thresh_test.csv", table);
    std::ifstream in(tmp / "gfra_thresh_test.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "tau,p_fa,p_md,p_e");
    std::filesystem::remove(tmp / "gfra_thresh_test.csv");

    std::vector<SweepPoint> points(2);
    points[0].value = 20;
    points[0].auc = 0.9;
    points[1].value = 40;
    points[1].auc = 0.95;
    write_sweep_csv(tmp / "gfra_sweep_test.csv", "pilot_length", points);
    std::ifstream in2(tmp / "gfra_sweep_test.csv");
    std::getline(in2, header);
    CHECK(header == "pilot_length,auc");
    std::filesystem::remove(tmp / "gfra_sweep_test.csv");
}

TEST_CASE("cluster sweep grows a curve per requested size") {
    ExperimentConfig cfg = tiny_config();
    cfg.dataset_slots = 200;
    const SystemRealization sys = realize_system(cfg);
    const Dataset train_ds = make_dataset(cfg, sys, 200, cfg.ap_policy, "train");
    const TrainResult trained = train_detector(cfg, train_ds);

    const auto points = run_cluster_sweep(cfg, sys, trained.model, {1, 3}, 60);
    REQUIRE(points.size() == 2);
    CHECK(points[0].value == 1.0);
    CHECK(points[1].value == 3.0);
    for (const auto& p : points) {
        CHECK(p.auc >= 0.0);
        CHECK(p.auc <= 1.0);
        CHECK(p.curve.fpr.size() == p.curve.tau.size());
    }
}

TEST_CASE("perturbation at theta 0 scores identically to the clean pass") {
    ExperimentConfig cfg = tiny_config();
    const SystemRealization sys = realize_system(cfg);
    const Dataset train_ds = make_dataset(cfg, sys, 200, cfg.ap_policy, "train");
    const TrainResult trained = train_detector(cfg, train_ds);
    const Dataset eval_ds = make_dataset(cfg, sys, 80, ApPolicy::uniform_random_ap, "eval");

    const auto points = run_perturb_eval(cfg, trained.model, eval_ds, {0.0, 0.5});
    REQUIRE(points.size() == 2);
    CHECK(points[0].auc == auc_of(trained.model, eval_ds));
    CHECK(points[1].auc >= 0.0);

    const auto quant = run_quant_eval(trained.model, eval_ds,
                                      {FixedPointFormat{8, 4}, FixedPointFormat{12, 8}});
    REQUIRE(quant.size() == 2);
    CHECK(quant[0].label == "8_4");
    CHECK(quant[1].label == "12_8");
}

} // TEST_SUITE
