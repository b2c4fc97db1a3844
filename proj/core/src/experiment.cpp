#include "gfra/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "gfra/errors.hpp"
#include "io_util.hpp"

namespace gfra {

using nlohmann::json;

// ----------------------------------------------------------------- presets

ExperimentConfig scenario1_config() {
    ExperimentConfig c;
    c.scenario = "scenario-1";
    c.area_side_m = 500.0;
    c.num_aps = 20;
    c.num_users = 100;
    c.edge_distance_m = 50.0;
    c.min_ue_ap_distance_m = 10.0;
    c.min_ap_ap_distance_m = 15.0;
    c.ap_height_m = 12.0;
    c.ue_height_m = 1.5;
    c.carrier_freq_hz = 900e6;
    c.shadow_std_db = 1.0;
    c.noise_dbm = -109.0;
    c.tx_power_w = 0.2;
    c.epsilon = 0.1;
    c.pilot_length = 40;
    c.num_antennas = 2;
    c.coherence_time_s = 1e-3;
    c.coherence_bandwidth_hz = 200e3;
    c.reserved_fraction = 0.2;
    c.path_loss_model = PathLossModel::uma_los_3gpp;
    c.fading_mode = FadingMode::per_slot;
    c.slots_per_block = 10;
    c.ap_policy = ApPolicy::uniform_random_ap;
    c.dataset_slots = 30000;
    c.hidden_layers = 2;
    c.hidden_width = 320;
    c.train = TrainConfig{};
    c.train.init_seed = c.seed_init;
    c.tau = 0.5;
    c.tau_step = 0.01;
    c.snr_coverage = 0.95;
    return c;
}

ExperimentConfig scenario2_like_config() {
    ExperimentConfig c = scenario1_config();
    c.scenario = "scenario-2-like";
    c.area_side_m = 1000.0;
    c.edge_distance_m = 0.0;
    c.min_ap_ap_distance_m = 0.0;
    c.shadow_std_db = 2.0;
    c.path_loss_model = PathLossModel::log_distance;
    // Macro-cell style placeholder: 120.9 dB at 1 km, 37.6 dB/decade.
    c.log_distance.intercept_db = 120.9;
    c.log_distance.slope_db_per_decade = 37.6;
    c.log_distance.shadow_std_db = 2.0;
    c.log_distance.reference_distance_m = 1000.0;
    return c;
}

ExperimentConfig preset_config(const std::string& name) {
    if (name == "scenario-1" || name == "custom") {
        ExperimentConfig c = scenario1_config();
        c.scenario = name;
        return c;
    }
    if (name == "scenario-2-like") {
        return scenario2_like_config();
    }
    throw std::invalid_argument("unknown scenario preset: " + name);
}

// ------------------------------------------------------------- validation

void ExperimentConfig::validate() const {
    topology_config().validate();
    if (path_loss_model == PathLossModel::uma_los_3gpp) {
        path_loss_params().validate();
    } else if (!(log_distance.reference_distance_m > 0.0)) {
        throw std::invalid_argument("config: log_distance_reference_m must be > 0");
    }
    if (!(tx_power_w > 0.0)) {
        throw std::invalid_argument("config: tx_power_w must be > 0");
    }
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
        throw std::invalid_argument("config: epsilon must lie in [0, 1]");
    }
    if (pilot_length < 1 || num_antennas < 1) {
        throw std::invalid_argument("config: pilot_length and num_antennas must be >= 1");
    }
    if (dataset_slots < 1) {
        throw std::invalid_argument("config: dataset_slots must be >= 1");
    }
    if (fading_mode == FadingMode::fixed && slots_per_block < 1) {
        throw std::invalid_argument("config: slots_per_block must be >= 1");
    }
    if (!(tau >= 0.0 && tau <= 1.0)) {
        throw std::invalid_argument("config: tau must lie in [0, 1]");
    }
    if (!(tau_step > 0.0 && tau_step <= 0.5)) {
        throw std::invalid_argument("config: tau_step must lie in (0, 0.5]");
    }
    if (!(snr_coverage > 0.0 && snr_coverage < 1.0)) {
        throw std::invalid_argument("config: snr_coverage must lie in (0, 1)");
    }
    architecture().validate();
    train.validate();

    if (coherence_time_s > 0.0 && coherence_bandwidth_hz > 0.0 && reserved_fraction > 0.0) {
        const auto expected = static_cast<int>(std::llround(
            reserved_fraction * coherence_time_s * coherence_bandwidth_hz));
        if (expected != pilot_length) {
            std::fprintf(stderr,
                         "config warning: pilot_length=%d but the coherence budget "
                         "gives round(%.3g * %.3g * %.3g) = %d symbols\n",
                         pilot_length, reserved_fraction, coherence_time_s,
                         coherence_bandwidth_hz, expected);
        }
    }
}

TopologyConfig ExperimentConfig::topology_config() const {
    TopologyConfig t;
    t.area_side_m = area_side_m;
    t.num_aps = num_aps;
    t.num_users = num_users;
    t.edge_distance_m = edge_distance_m;
    t.min_ue_ap_distance_m = min_ue_ap_distance_m;
    t.min_ap_ap_distance_m = min_ap_ap_distance_m;
    t.ap_height_m = ap_height_m;
    t.ue_height_m = ue_height_m;
    return t;
}

PathLossParams ExperimentConfig::path_loss_params() const {
    PathLossParams p;
    p.carrier_freq_hz = carrier_freq_hz;
    p.ap_height_m = ap_height_m;
    p.ue_height_m = ue_height_m;
    p.shadow_std_db = shadow_std_db;
    return p;
}

MlpArchitecture ExperimentConfig::architecture() const {
    MlpArchitecture a;
    a.input_dim = 2 * num_antennas * pilot_length;
    a.hidden_layers = hidden_layers;
    a.hidden_width = hidden_width;
    a.output_dim = num_users;
    return a;
}

double ExperimentConfig::noise_power_w() const { return dbm_to_watts(noise_dbm); }

// ------------------------------------------------------------------- JSON

namespace {

PathLossModel path_loss_model_from_string(const std::string& s) {
    if (s == "3gpp-uma-los") {
        return PathLossModel::uma_los_3gpp;
    }
    if (s == "log-distance") {
        return PathLossModel::log_distance;
    }
    throw std::invalid_argument("config: unknown path_loss_model \"" + s + "\"");
}

std::string to_string(PathLossModel m) {
    return m == PathLossModel::uma_los_3gpp ? "3gpp-uma-los" : "log-distance";
}

FadingMode fading_mode_from_string(const std::string& s) {
    if (s == "per-slot") {
        return FadingMode::per_slot;
    }
    if (s == "fixed") {
        return FadingMode::fixed;
    }
    throw std::invalid_argument("config: unknown fading_mode \"" + s + "\"");
}

std::string to_string(FadingMode m) {
    return m == FadingMode::per_slot ? "per-slot" : "fixed";
}

ApPolicy ap_policy_from_string(const std::string& s) {
    if (s == "dominant-random-user") {
        return ApPolicy::dominant_random_user;
    }
    if (s == "uniform-random-ap") {
        return ApPolicy::uniform_random_ap;
    }
    if (s == "all-aps") {
        return ApPolicy::all_aps;
    }
    throw std::invalid_argument("config: unknown ap_policy \"" + s + "\"");
}

std::string to_string(ApPolicy p) {
    switch (p) {
    case ApPolicy::dominant_random_user:
        return "dominant-random-user";
    case ApPolicy::uniform_random_ap:
        return "uniform-random-ap";
    case ApPolicy::all_aps:
        return "all-aps";
    }
    return "";
}

LossReduction reduction_from_string(const std::string& s) {
    if (s == "mean") {
        return LossReduction::mean;
    }
    if (s == "sum") {
        return LossReduction::sum;
    }
    throw std::invalid_argument("config: unknown loss_reduction \"" + s + "\"");
}

} // namespace

ExperimentConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw format_error(std::string("config: JSON parse error: ") + e.what());
    }
    if (!j.is_object()) {
        throw format_error("config: top level must be a flat JSON object");
    }

    ExperimentConfig cfg =
        preset_config(j.value("scenario", std::string("scenario-1")));

    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "scenario") {
                // handled above
            } else if (key == "area_side_m") {
                cfg.area_side_m = value.get<double>();
            } else if (key == "num_aps") {
                cfg.num_aps = value.get<int>();
            } else if (key == "num_users") {
                cfg.num_users = value.get<int>();
            } else if (key == "edge_distance_m") {
                cfg.edge_distance_m = value.get<double>();
            } else if (key == "min_ue_ap_distance_m") {
                cfg.min_ue_ap_distance_m = value.get<double>();
            } else if (key == "min_ap_ap_distance_m") {
                cfg.min_ap_ap_distance_m = value.get<double>();
            } else if (key == "ap_height_m") {
                cfg.ap_height_m = value.get<double>();
            } else if (key == "ue_height_m") {
                cfg.ue_height_m = value.get<double>();
            } else if (key == "carrier_freq_hz") {
                cfg.carrier_freq_hz = value.get<double>();
            } else if (key == "shadow_std_db") {
                cfg.shadow_std_db = value.get<double>();
            } else if (key == "noise_dbm") {
                cfg.noise_dbm = value.get<double>();
            } else if (key == "tx_power_w") {
                cfg.tx_power_w = value.get<double>();
            } else if (key == "epsilon") {
                cfg.epsilon = value.get<double>();
            } else if (key == "pilot_length") {
                cfg.pilot_length = value.get<int>();
            } else if (key == "num_antennas") {
                cfg.num_antennas = value.get<int>();
            } else if (key == "coherence_time_s") {
                cfg.coherence_time_s = value.get<double>();
            } else if (key == "coherence_bandwidth_hz") {
                cfg.coherence_bandwidth_hz = value.get<double>();
            } else if (key == "reserved_fraction") {
                cfg.reserved_fraction = value.get<double>();
            } else if (key == "path_loss_model") {
                cfg.path_loss_model =
                    path_loss_model_from_string(value.get<std::string>());
            } else if (key == "log_distance_intercept_db") {
                cfg.log_distance.intercept_db = value.get<double>();
            } else if (key == "log_distance_slope_db_per_decade") {
                cfg.log_distance.slope_db_per_decade = value.get<double>();
            } else if (key == "log_distance_shadow_std_db") {
                cfg.log_distance.shadow_std_db = value.get<double>();
            } else if (key == "log_distance_reference_m") {
                cfg.log_distance.reference_distance_m = value.get<double>();
            } else if (key == "fading_mode") {
                cfg.fading_mode = fading_mode_from_string(value.get<std::string>());
            } else if (key == "slots_per_block") {
                cfg.slots_per_block = value.get<int>();
            } else if (key == "ap_policy") {
                cfg.ap_policy = ap_policy_from_string(value.get<std::string>());
            } else if (key == "dataset_slots") {
                cfg.dataset_slots = value.get<int>();
            } else if (key == "hidden_layers") {
                cfg.hidden_layers = value.get<int>();
            } else if (key == "hidden_width") {
                cfg.hidden_width = value.get<int>();
            } else if (key == "learning_rate") {
                cfg.train.learning_rate = value.get<double>();
            } else if (key == "batch_size") {
                cfg.train.batch_size = value.get<int>();
            } else if (key == "max_epochs") {
                cfg.train.max_epochs = value.get<int>();
            } else if (key == "patience") {
                cfg.train.patience = value.get<int>();
            } else if (key == "min_improvement") {
                cfg.train.min_improvement = value.get<double>();
            } else if (key == "adam_beta1") {
                cfg.train.adam_beta1 = value.get<double>();
            } else if (key == "adam_beta2") {
                cfg.train.adam_beta2 = value.get<double>();
            } else if (key == "adam_epsilon") {
                cfg.train.adam_epsilon = value.get<double>();
            } else if (key == "loss_reduction") {
                cfg.train.reduction = reduction_from_string(value.get<std::string>());
            } else if (key == "tau") {
                cfg.tau = value.get<double>();
            } else if (key == "tau_step") {
                cfg.tau_step = value.get<double>();
            } else if (key == "snr_coverage") {
                cfg.snr_coverage = value.get<double>();
            } else if (key == "seed_topology") {
                cfg.seed_topology = value.get<std::uint64_t>();
            } else if (key == "seed_channel") {
                cfg.seed_channel = value.get<std::uint64_t>();
            } else if (key == "seed_activity") {
                cfg.seed_activity = value.get<std::uint64_t>();
            } else if (key == "seed_noise") {
                cfg.seed_noise = value.get<std::uint64_t>();
            } else if (key == "seed_init") {
                cfg.seed_init = value.get<std::uint64_t>();
            } else {
                throw std::invalid_argument("config: unknown key \"" + key + "\"");
            }
        } catch (const json::exception& e) {
            throw std::invalid_argument("config: bad value for \"" + key + "\": " +
                                        e.what());
        }
    }
    cfg.train.init_seed = cfg.seed_init;
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw format_error("load_config: cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return config_from_json_text(ss.str());
}

std::string config_to_json_text(const ExperimentConfig& cfg) {
    json j;
    j["scenario"] = cfg.scenario;
    j["area_side_m"] = cfg.area_side_m;
    j["num_aps"] = cfg.num_aps;
    j["num_users"] = cfg.num_users;
    j["edge_distance_m"] = cfg.edge_distance_m;
    j["min_ue_ap_distance_m"] = cfg.min_ue_ap_distance_m;
    j["min_ap_ap_distance_m"] = cfg.min_ap_ap_distance_m;
    j["ap_height_m"] = cfg.ap_height_m;
    j["ue_height_m"] = cfg.ue_height_m;
    j["carrier_freq_hz"] = cfg.carrier_freq_hz;
    j["shadow_std_db"] = cfg.shadow_std_db;
    j["noise_dbm"] = cfg.noise_dbm;
    j["tx_power_w"] = cfg.tx_power_w;
    j["epsilon"] = cfg.epsilon;
    j["pilot_length"] = cfg.pilot_length;
    j["num_antennas"] = cfg.num_antennas;
    j["coherence_time_s"] = cfg.coherence_time_s;
    j["coherence_bandwidth_hz"] = cfg.coherence_bandwidth_hz;
    j["reserved_fraction"] = cfg.reserved_fraction;
    j["path_loss_model"] = to_string(cfg.path_loss_model);
    j["log_distance_intercept_db"] = cfg.log_distance.intercept_db;
    j["log_distance_slope_db_per_decade"] = cfg.log_distance.slope_db_per_decade;
    j["log_distance_shadow_std_db"] = cfg.log_distance.shadow_std_db;
    j["log_distance_reference_m"] = cfg.log_distance.reference_distance_m;
    j["fading_mode"] = to_string(cfg.fading_mode);
    j["slots_per_block"] = cfg.slots_per_block;
    j["ap_policy"] = to_string(cfg.ap_policy);
    j["dataset_slots"] = cfg.dataset_slots;
    j["hidden_layers"] = cfg.hidden_layers;
    j["hidden_width"] = cfg.hidden_width;
    j["learning_rate"] = cfg.train.learning_rate;
    j["batch_size"] = cfg.train.batch_size;
    j["max_epochs"] = cfg.train.max_epochs;
    j["patience"] = cfg.train.patience;
    j["min_improvement"] = cfg.train.min_improvement;
    j["adam_beta1"] = cfg.train.adam_beta1;
    j["adam_beta2"] = cfg.train.adam_beta2;
    j["adam_epsilon"] = cfg.train.adam_epsilon;
    j["loss_reduction"] =
        cfg.train.reduction == LossReduction::mean ? "mean" : "sum";
    j["tau"] = cfg.tau;
    j["tau_step"] = cfg.tau_step;
    j["snr_coverage"] = cfg.snr_coverage;
    j["seed_topology"] = cfg.seed_topology;
    j["seed_channel"] = cfg.seed_channel;
    j["seed_activity"] = cfg.seed_activity;
    j["seed_noise"] = cfg.seed_noise;
    j["seed_init"] = cfg.seed_init;
    return j.dump(2) + "\n";
}

// -------------------------------------------------------------- pipelines

SystemRealization realize_system(const ExperimentConfig& cfg) {
    cfg.validate();
    SystemRealization sys;

    SeededRng topo_rng = SeededRng(cfg.seed_topology).split("topology");
    sys.topology = generate_topology(cfg.topology_config(), topo_rng);

    SeededRng shadow_rng = SeededRng(cfg.seed_channel).split("shadowing");
    if (cfg.path_loss_model == PathLossModel::uma_los_3gpp) {
        sys.beta = large_scale_map(sys.topology, cfg.path_loss_params(), shadow_rng);
    } else {
        sys.beta =
            large_scale_map_log_distance(sys.topology, cfg.log_distance, shadow_rng);
    }

    SeededRng pilot_rng = SeededRng(cfg.seed_channel).split("pilots");
    sys.pilots = generate_pilotbook(cfg.pilot_length, cfg.num_users, pilot_rng);

    sys.power = PowerProfile::uniform(cfg.num_users, cfg.tx_power_w, cfg.noise_power_w());
    sys.num_antennas = cfg.num_antennas;
    return sys;
}

Dataset make_dataset(const ExperimentConfig& cfg, const SystemRealization& sys,
                     int slot_count, ApPolicy policy, const std::string& purpose) {
    GenerationOptions opts;
    opts.slot_count = slot_count;
    opts.epsilon = cfg.epsilon;
    opts.policy = policy;
    opts.fading_mode = cfg.fading_mode;
    opts.slots_per_block = cfg.slots_per_block;
    opts.recorded_seed = cfg.seed_activity;

    GenerationStreams streams{
        SeededRng(cfg.seed_activity).split("activity").split(purpose),
        SeededRng(cfg.seed_noise).split("noise").split(purpose),
        SeededRng(cfg.seed_channel).split("fading").split(purpose),
        SeededRng(cfg.seed_activity).split("pick").split(purpose),
    };
    return generate_dataset(sys, opts, streams);
}

TrainResult train_detector(const ExperimentConfig& cfg, const Dataset& ds) {
    const SlotSplit split = split_by_slot(ds, 0.1);
    const FeatureScaler scaler = fit_scaler(ds, split.train_indices);

    MlpArchitecture arch = cfg.architecture();
    arch.input_dim = static_cast<int>(ds.header.feature_dim());
    arch.output_dim = static_cast<int>(ds.header.num_users);

    SeededRng init_rng = SeededRng(cfg.seed_init).split("init");
    MlpModel model = init_model(arch, scaler, init_rng);

    TrainConfig tc = cfg.train;
    tc.init_seed = cfg.seed_init;
    return train(std::move(model), ds, split, tc);
}

ScoreSet score_dataset(const MlpModel& model, const Dataset& ds,
                       const FeatureTransform& transform) {
    const auto dim = static_cast<Eigen::Index>(ds.header.feature_dim());
    const std::size_t k = ds.header.num_users;
    const std::size_t n = ds.samples.size();

    ScoreSet out;
    out.scores.reserve(n * k);
    out.labels.reserve(n * k);

    constexpr std::size_t kChunk = 512;
    Eigen::MatrixXd x;
    for (std::size_t start = 0; start < n; start += kChunk) {
        const std::size_t count = std::min(kChunk, n - start);
        x.resize(dim, static_cast<Eigen::Index>(count));
        for (std::size_t c = 0; c < count; ++c) {
            const Sample& s = ds.samples[start + c];
            std::vector<double> raw = features_as_double(s);
            if (transform) {
                raw = transform(raw, start + c);
            }
            const auto scaled = apply_scaler(model.scaler, raw);
            for (Eigen::Index j = 0; j < dim; ++j) {
                x(j, static_cast<Eigen::Index>(c)) = scaled[static_cast<std::size_t>(j)];
            }
        }
        const Eigen::MatrixXd probs = model.forward_batch(x);
        for (std::size_t c = 0; c < count; ++c) {
            const Sample& s = ds.samples[start + c];
            for (std::size_t j = 0; j < k; ++j) {
                out.scores.push_back(probs(static_cast<Eigen::Index>(j),
                                           static_cast<Eigen::Index>(c)));
                out.labels.push_back(s.labels[j]);
            }
        }
    }
    return out;
}

double auc_of(const MlpModel& model, const Dataset& ds,
              const FeatureTransform& transform) {
    return roc_exact(score_dataset(model, ds, transform)).auc;
}

// ----------------------------------------------------------------- pareto

void mark_pareto_efficient(std::vector<ParetoRow>& rows) {
    for (auto& r : rows) {
        r.efficient = true;
        for (const auto& other : rows) {
            const bool no_worse =
                other.params <= r.params && other.train_loss <= r.train_loss;
            const bool better =
                other.params < r.params || other.train_loss < r.train_loss;
            if (no_worse && better) {
                r.efficient = false;
                break;
            }
        }
    }
}

std::vector<ParetoRow> run_pareto(const ExperimentConfig& cfg, const Dataset& ds,
                                  const std::vector<int>& hidden_layer_choices,
                                  const std::vector<int>& hidden_width_choices) {
    std::vector<ParetoRow> rows;
    for (int z : hidden_layer_choices) {
        for (int v : hidden_width_choices) {
            ExperimentConfig point = cfg;
            point.hidden_layers = z;
            point.hidden_width = v;
            const TrainResult result = train_detector(point, ds);

            ParetoRow row;
            row.hidden_layers = z;
            row.hidden_width = v;
            row.params = parameter_count(result.model.arch);
            row.train_loss = std::numeric_limits<double>::infinity();
            row.val_loss = std::numeric_limits<double>::infinity();
            for (const auto& e : result.trace) {
                row.train_loss = std::min(row.train_loss, e.train_loss);
                row.val_loss = std::min(row.val_loss, e.val_loss);
            }
            rows.push_back(row);
        }
    }
    mark_pareto_efficient(rows);
    return rows;
}

void write_pareto_csv(const std::filesystem::path& path,
                      const std::vector<ParetoRow>& rows) {
    detail::atomic_write(path, [&](std::ofstream& out) {
        out.precision(std::numeric_limits<double>::max_digits10);
        out << "z,v,params_count,train_loss,val_loss,pareto_efficient\n";
        for (const auto& r : rows) {
            out << r.hidden_layers << "," << r.hidden_width << "," << r.params << ","
                << r.train_loss << "," << r.val_loss << "," << (r.efficient ? 1 : 0)
                << "\n";
        }
    });
}

// ---------------------------------------------------------------- snr cdf

SnrCdfResult run_snr_cdf(const ExperimentConfig& cfg, int realizations) {
    cfg.validate();
    if (realizations < 1) {
        throw std::invalid_argument("run_snr_cdf: realizations must be >= 1");
    }
    SnrCdfResult result;
    result.coverage = cfg.snr_coverage;
    const PowerProfile power =
        PowerProfile::uniform(cfg.num_users, cfg.tx_power_w, cfg.noise_power_w());

    for (int r = 0; r < realizations; ++r) {
        SeededRng topo_rng =
            SeededRng(cfg.seed_topology).split("snr-topology", static_cast<std::uint64_t>(r));
        const Topology topo = generate_topology(cfg.topology_config(), topo_rng);

        SeededRng shadow_rng =
            SeededRng(cfg.seed_channel).split("snr-shadowing", static_cast<std::uint64_t>(r));
        const LargeScaleMap beta =
            cfg.path_loss_model == PathLossModel::uma_los_3gpp
                ? large_scale_map(topo, cfg.path_loss_params(), shadow_rng)
                : large_scale_map_log_distance(topo, cfg.log_distance, shadow_rng);

        const auto snrs = snr_per_device_db(beta, power);
        result.sorted_snr_db.insert(result.sorted_snr_db.end(), snrs.begin(), snrs.end());
    }
    result.target_db = snr_target_db(result.sorted_snr_db, cfg.snr_coverage);
    std::sort(result.sorted_snr_db.begin(), result.sorted_snr_db.end());
    return result;
}

void write_snr_cdf_csv(const std::filesystem::path& path, const SnrCdfResult& result) {
    detail::atomic_write(path, [&](std::ofstream& out) {
        out.precision(std::numeric_limits<double>::max_digits10);
        out << "snr_db,cdf\n";
        const auto n = static_cast<double>(result.sorted_snr_db.size());
        for (std::size_t i = 0; i < result.sorted_snr_db.size(); ++i) {
            out << result.sorted_snr_db[i] << "," << (static_cast<double>(i) + 1.0) / n
                << "\n";
        }
    });
}

// ----------------------------------------------------------------- sweeps

namespace {

SweepPoint evaluate_point(const ExperimentConfig& cfg, const SweepOptions& opts,
                          double value) {
    const SystemRealization sys = realize_system(cfg);
    const int train_slots = opts.train_slots > 0 ? opts.train_slots : cfg.dataset_slots;
    const Dataset train_ds =
        make_dataset(cfg, sys, train_slots, cfg.ap_policy, "train");
    const TrainResult trained = train_detector(cfg, train_ds);
    const Dataset eval_ds =
        make_dataset(cfg, sys, opts.eval_slots, ApPolicy::uniform_random_ap, "eval");

    SweepPoint point;
    point.value = value;
    point.curve = roc_exact(score_dataset(trained.model, eval_ds));
    point.auc = point.curve.auc;
    return point;
}

} // namespace

std::vector<SweepPoint> run_pilot_length_sweep(const ExperimentConfig& cfg,
                                               const std::vector<int>& pilot_lengths,
                                               const SweepOptions& opts) {
    std::vector<SweepPoint> points;
    for (int length : pilot_lengths) {
        ExperimentConfig point_cfg = cfg;
        point_cfg.pilot_length = length;
        points.push_back(evaluate_point(point_cfg, opts, static_cast<double>(length)));
    }
    return points;
}

std::vector<SweepPoint> run_user_count_sweep(const ExperimentConfig& cfg,
                                             const std::vector<int>& user_counts,
                                             const SweepOptions& opts) {
    std::vector<SweepPoint> points;
    for (int users : user_counts) {
        ExperimentConfig point_cfg = cfg;
        point_cfg.num_users = users;
        points.push_back(evaluate_point(point_cfg, opts, static_cast<double>(users)));
    }
    return points;
}

std::vector<SweepPoint> run_cluster_sweep(const ExperimentConfig& cfg,
                                          const SystemRealization& sys,
                                          const MlpModel& model,
                                          const std::vector<int>& cluster_sizes,
                                          int eval_slots) {
    if (eval_slots < 1) {
        throw std::invalid_argument("run_cluster_sweep: eval_slots must be >= 1");
    }
    const int num_aps = sys.beta.num_aps;
    const int num_users = sys.beta.num_users;

    const SeededRng act_s = SeededRng(cfg.seed_activity).split("activity").split("cluster-eval");
    const SeededRng noise_s = SeededRng(cfg.seed_noise).split("noise").split("cluster-eval");
    const SeededRng fading_s = SeededRng(cfg.seed_channel).split("fading").split("cluster-eval");
    const SeededRng pick_s = SeededRng(cfg.seed_activity).split("cluster-pick");

    // Score all APs of every slot once; fusion reuses the matrix per T.
    std::vector<Eigen::MatrixXd> slot_scores; // K x M each
    std::vector<std::vector<std::uint8_t>> slot_labels;
    slot_scores.reserve(static_cast<std::size_t>(eval_slots));
    slot_labels.reserve(static_cast<std::size_t>(eval_slots));

    Eigen::MatrixXd x(static_cast<Eigen::Index>(model.arch.input_dim),
                      static_cast<Eigen::Index>(num_aps));
    for (int i = 0; i < eval_slots; ++i) {
        const auto slot_u = static_cast<std::uint64_t>(i);
        const std::uint64_t block =
            cfg.fading_mode == FadingMode::fixed
                ? slot_u / static_cast<std::uint64_t>(cfg.slots_per_block)
                : slot_u;

        SeededRng act_rng = act_s.split("slot", slot_u);
        const ActivityVector activity =
            sample_activity(num_users, cfg.epsilon, act_rng);
        const SmallScaleBlock fading = small_scale_block(
            sys.beta, sys.num_antennas, block, fading_s.split("block", block));
        const ReceivedSlot slot = synth_slot(sys.pilots, activity, sys.power, fading,
                                             noise_s.split("slot", slot_u));

        for (int m = 0; m < num_aps; ++m) {
            const auto features = extract_features(slot.y[static_cast<std::size_t>(m)]);
            const auto scaled = apply_scaler(model.scaler, features);
            for (Eigen::Index j = 0; j < x.rows(); ++j) {
                x(j, m) = scaled[static_cast<std::size_t>(j)];
            }
        }
        slot_scores.push_back(model.forward_batch(x));
        slot_labels.push_back(activity.a);
    }

    const std::vector<double> grid = make_tau_grid(cfg.tau_step);
    std::vector<SweepPoint> points;

    for (int t : cluster_sizes) {
        // Fresh random cluster per slot, redrawn per cluster size.
        std::vector<std::vector<int>> clusters;
        clusters.reserve(static_cast<std::size_t>(eval_slots));
        for (int i = 0; i < eval_slots; ++i) {
            SeededRng r = pick_s.split("size", static_cast<std::uint64_t>(t))
                              .split("slot", static_cast<std::uint64_t>(i));
            clusters.push_back(select_cluster(num_aps, t, r).ap_ids);
        }

        SweepPoint point;
        point.value = static_cast<double>(t);
        point.curve.tau = grid;
        for (double tau : grid) {
            long long fp = 0, tn = 0, tp = 0, fn = 0;
            for (int i = 0; i < eval_slots; ++i) {
                const auto& scores = slot_scores[static_cast<std::size_t>(i)];
                const auto& labels = slot_labels[static_cast<std::size_t>(i)];
                const auto& cluster = clusters[static_cast<std::size_t>(i)];
                for (int k = 0; k < num_users; ++k) {
                    int votes = 0;
                    for (int ap : cluster) {
                        votes += scores(k, ap) >= tau ? 1 : 0;
                    }
                    const bool fused = 2 * votes >= t;
                    if (labels[static_cast<std::size_t>(k)]) {
                        (fused ? tp : fn) += 1;
                    } else {
                        (fused ? fp : tn) += 1;
                    }
                }
            }
            point.curve.fpr.push_back(static_cast<double>(fp) /
                                      static_cast<double>(fp + tn));
            point.curve.tpr.push_back(static_cast<double>(tp) /
                                      static_cast<double>(tp + fn));
        }
        point.curve.auc = auc_from_points(point.curve.fpr, point.curve.tpr);
        point.auc = point.curve.auc;
        points.push_back(std::move(point));
    }
    return points;
}

std::vector<SweepPoint> run_perturb_eval(const ExperimentConfig& cfg,
                                         const MlpModel& model, const Dataset& eval_ds,
                                         const std::vector<double>& thetas) {
    const SeededRng base = SeededRng(cfg.seed_noise).split("perturb");
    std::vector<SweepPoint> points;
    for (std::size_t ti = 0; ti < thetas.size(); ++ti) {
        const double theta = thetas[ti];
        if (!(theta >= 0.0 && theta <= 1.0)) {
            throw std::invalid_argument("run_perturb_eval: theta must lie in [0, 1]");
        }
        FeatureTransform transform;
        if (theta > 0.0) {
            const SeededRng theta_stream = base.split("theta", ti);
            transform = [theta, theta_stream](std::span<const double> raw,
                                              std::size_t index) {
                SeededRng rng = theta_stream.split("sample", index);
                return perturb_features(raw, theta, rng);
            };
        }
        SweepPoint point;
        point.value = theta;
        point.curve = roc_exact(score_dataset(model, eval_ds, transform));
        point.auc = point.curve.auc;
        points.push_back(std::move(point));
    }
    return points;
}

std::vector<SweepPoint> run_quant_eval(const MlpModel& model, const Dataset& eval_ds,
                                       const std::vector<FixedPointFormat>& formats) {
    std::vector<SweepPoint> points;
    for (const auto& fmt : formats) {
        fmt.validate();
        FeatureTransform transform = [fmt](std::span<const double> raw, std::size_t) {
            return quantize_features(raw, fmt, AgcMode::per_vector);
        };
        SweepPoint point;
        point.value = static_cast<double>(fmt.fractional_bits);
        point.label = fmt.to_string();
        point.curve = roc_exact(score_dataset(model, eval_ds, transform));
        point.auc = point.curve.auc;
        points.push_back(std::move(point));
    }
    return points;
}

void write_sweep_csv(const std::filesystem::path& path, const std::string& value_name,
                     const std::vector<SweepPoint>& points) {
    detail::atomic_write(path, [&](std::ofstream& out) {
        out.precision(std::numeric_limits<double>::max_digits10);
        out << value_name << ",auc\n";
        for (const auto& p : points) {
            if (p.label.empty()) {
                out << p.value;
            } else {
                out << p.label;
            }
            out << "," << p.auc << "\n";
        }
    });
}

} // namespace gfra
