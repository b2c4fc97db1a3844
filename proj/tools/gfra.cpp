/**
 * gfra — desk-scale experiments for grant-free random access in
 * cell-free massive MIMO: synthetic uplink datasets, a multi-label
 * activity detector, and the evaluation sweeps behind the study plots.
 */
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gfra/experiment.hpp"

using namespace gfra;
namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::string scenario;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_topology, seed_channel, seed_activity,
        seed_noise, seed_init;
    std::optional<int> pilot_length, num_users, num_antennas, num_aps;
    std::optional<int> dataset_slots, hidden_layers, hidden_width, max_epochs;
    std::optional<double> epsilon, tau, tau_step;
    std::optional<std::string> ap_policy, fading_mode;
};

ExperimentConfig resolve_config(const GlobalOptions& g) {
    ExperimentConfig cfg;
    if (!g.config_path.empty()) {
        cfg = load_config(g.config_path);
        if (!g.scenario.empty() && g.scenario != cfg.scenario) {
            throw std::invalid_argument(
                "--scenario conflicts with the scenario in --config");
        }
    } else {
        cfg = preset_config(g.scenario.empty() ? "scenario-1" : g.scenario);
    }
    if (g.seed_topology) cfg.seed_topology = *g.seed_topology;
    if (g.seed_channel) cfg.seed_channel = *g.seed_channel;
    if (g.seed_activity) cfg.seed_activity = *g.seed_activity;
    if (g.seed_noise) cfg.seed_noise = *g.seed_noise;
    if (g.seed_init) {
        cfg.seed_init = *g.seed_init;
        cfg.train.init_seed = *g.seed_init;
    }
    if (g.pilot_length) cfg.pilot_length = *g.pilot_length;
    if (g.num_users) cfg.num_users = *g.num_users;
    if (g.num_antennas) cfg.num_antennas = *g.num_antennas;
    if (g.num_aps) cfg.num_aps = *g.num_aps;
    if (g.dataset_slots) cfg.dataset_slots = *g.dataset_slots;
    if (g.hidden_layers) cfg.hidden_layers = *g.hidden_layers;
    if (g.hidden_width) cfg.hidden_width = *g.hidden_width;
    if (g.max_epochs) cfg.train.max_epochs = *g.max_epochs;
    if (g.epsilon) cfg.epsilon = *g.epsilon;
    if (g.tau) cfg.tau = *g.tau;
    if (g.tau_step) cfg.tau_step = *g.tau_step;
    if (g.ap_policy) {
        if (*g.ap_policy == "dominant-random-user") {
            cfg.ap_policy = ApPolicy::dominant_random_user;
        } else if (*g.ap_policy == "uniform-random-ap") {
            cfg.ap_policy = ApPolicy::uniform_random_ap;
        } else if (*g.ap_policy == "all-aps") {
            cfg.ap_policy = ApPolicy::all_aps;
        } else {
            throw std::invalid_argument("unknown --policy " + *g.ap_policy);
        }
    }
    if (g.fading_mode) {
        if (*g.fading_mode == "per-slot") {
            cfg.fading_mode = FadingMode::per_slot;
        } else if (*g.fading_mode == "fixed") {
            cfg.fading_mode = FadingMode::fixed;
        } else {
            throw std::invalid_argument("unknown --fading " + *g.fading_mode);
        }
    }
    cfg.validate();
    return cfg;
}

fs::path out_path(const GlobalOptions& g, const std::string& name) {
    fs::create_directories(g.out_dir);
    return fs::path(g.out_dir) / name;
}

void dump_config(const GlobalOptions& g, const ExperimentConfig& cfg,
                 const std::string& stem) {
    std::ofstream out(out_path(g, stem + ".config.json"));
    out << config_to_json_text(cfg);
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(std::stoi(item));
    }
    if (out.empty()) {
        throw std::invalid_argument("empty list: " + text);
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(std::stod(item));
    }
    if (out.empty()) {
        throw std::invalid_argument("empty list: " + text);
    }
    return out;
}

std::string format_value(double v) {
    std::ostringstream ss;
    ss << v;
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"grant-free random access laboratory for cell-free massive MIMO"};
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--config", g.config_path, "flat JSON config file");
    app.add_option("--scenario", g.scenario,
                   "preset: scenario-1, scenario-2-like, custom");
    app.add_option("--out-dir", g.out_dir, "directory for artifacts");
    app.add_option("--seed-topology", g.seed_topology, "");
    app.add_option("--seed-channel", g.seed_channel, "");
    app.add_option("--seed-activity", g.seed_activity, "");
    app.add_option("--seed-noise", g.seed_noise, "");
    app.add_option("--seed-init", g.seed_init, "");
    app.add_option("--L", g.pilot_length, "pilot length override");
    app.add_option("--K", g.num_users, "user count override");
    app.add_option("--N", g.num_antennas, "antennas per AP override");
    app.add_option("--M", g.num_aps, "AP count override");
    app.add_option("--count", g.dataset_slots, "dataset slot count override");
    app.add_option("--Z", g.hidden_layers, "hidden layer count override");
    app.add_option("--V", g.hidden_width, "hidden width override");
    app.add_option("--epochs", g.max_epochs, "max training epochs override");
    app.add_option("--epsilon", g.epsilon, "activation probability override");
    app.add_option("--tau", g.tau, "hard-decision threshold override");
    app.add_option("--tau-step", g.tau_step, "threshold grid step override");
    app.add_option("--policy", g.ap_policy,
                   "dominant-random-user | uniform-random-ap | all-aps");
    app.add_option("--fading", g.fading_mode, "per-slot | fixed");

    // ------------------------------------------------------------ gen-topology
    auto* gen_topology = app.add_subcommand(
        "gen-topology", "place APs/users and emit topology.csv + beta.csv");
    gen_topology->callback([&]() {
        const ExperimentConfig cfg = resolve_config(g);
        const SystemRealization sys = realize_system(cfg);
        write_topology_csv(out_path(g, "topology.csv"), sys.topology);
        write_beta_csv(out_path(g, "beta.csv"), sys.beta);
        std::printf("wrote %s and %s\n", out_path(g, "topology.csv").c_str(),
                    out_path(g, "beta.csv").c_str());
    });

    // ------------------------------------------------------------- gen-dataset
    auto* gen_dataset =
        app.add_subcommand("gen-dataset", "simulate slots into a GFRA dataset file");
    std::string gen_out = "dataset.gfra";
    std::string gen_purpose = "train";
    gen_dataset->add_option("--out", gen_out, "output file name");
    gen_dataset->add_option("--purpose", gen_purpose,
                            "randomness namespace (train, eval, calib, ...)");
    gen_dataset->callback([&]() {
        const ExperimentConfig cfg = resolve_config(g);
        const SystemRealization sys = realize_system(cfg);
        const Dataset ds =
            make_dataset(cfg, sys, cfg.dataset_slots, cfg.ap_policy, gen_purpose);
        write_dataset(out_path(g, gen_out), ds);
        dump_config(g, cfg, "gen-dataset");
        std::printf("wrote %s (%zu samples)\n", out_path(g, gen_out).c_str(),
                    ds.samples.size());
    });

    // ---------------------------------------------------------- export-dataset
    auto* export_dataset =
        app.add_subcommand("export-dataset", "dump a dataset file as CSV");
    std::string export_in, export_out = "dataset.csv";
    export_dataset->add_option("--in", export_in, "dataset file")->required();
    export_dataset->add_option("--out", export_out, "CSV file name");
    export_dataset->callback([&]() {
        const Dataset ds = read_dataset(export_in);
        write_dataset_csv(out_path(g, export_out), ds);
        std::printf("wrote %s\n", out_path(g, export_out).c_str());
    });

    // ------------------------------------------------------------------- train
    auto* train_cmd =
        app.add_subcommand("train", "train the detector on a dataset file");
    std::string train_dataset;
    std::string model_out = "model.gfrm";
    std::string trace_out = "loss_trace.csv";
    train_cmd->add_option("--dataset", train_dataset, "training dataset")->required();
    train_cmd->add_option("--model-out", model_out, "model file name");
    train_cmd->add_option("--trace-out", trace_out, "loss trace CSV name");
    train_cmd->callback([&]() {
        const ExperimentConfig cfg = resolve_config(g);
        const Dataset ds = read_dataset(train_dataset);
        const TrainResult result = train_detector(cfg, ds);
        save_model(out_path(g, model_out), result.model);
        write_loss_trace_csv(out_path(g, trace_out), result.trace);
        dump_config(g, cfg, "train");
        std::printf("wrote %s and %s (best epoch %d, val loss %.6g)\n",
                    out_path(g, model_out).c_str(), out_path(g, trace_out).c_str(),
                    result.best_epoch, result.best_val_loss);
    });

    // ------------------------------------------------------------------ pareto
    auto* pareto_cmd = app.add_subcommand(
        "pareto", "architecture grid: parameters vs best loss, Pareto-filtered");
    std::string z_list = "2,3,4";
    std::string v_list = "64,128,160,256,320,512,640,1024,1280,2048";
    pareto_cmd->add_option("--Z-list", z_list, "comma-separated hidden layer counts");
    pareto_cmd->add_option("--V-list", v_list, "comma-separated hidden widths");
    pareto_cmd->callback([&]() {
        const ExperimentConfig cfg = resolve_config(g);
        const SystemRealization sys = realize_system(cfg);
        const Dataset ds =
            make_dataset(cfg, sys, cfg.dataset_slots, cfg.ap_policy, "train");
        const auto rows = run_pareto(cfg, ds, parse_int_list(z_list), parse_int_list(v_list));
        write_pareto_csv(out_path(g, "pareto.csv"), rows);
        std::vector<ParetoRow> front;
        for (const auto& r : rows) {
            if (r.efficient) {
                front.push_back(r);
            }
        }
        write_pareto_csv(out_path(g, "pareto_front.csv"), front);
        dump_config(g, cfg, "pareto");
        std::printf("wrote %s (%zu rows) and %s (%zu efficient)\n",
                    out_path(g, "pareto.csv").c_str(), rows.size(),
                    out_path(g, "pareto_front.csv").c_str(), front.size());
    });

    // ----------------------------------------------------------------- snr-cdf
    auto* snr_cmd = app.add_subcommand(
        "snr-cdf", "CDF of the dominant-AP SNR over topology realizations");
    int snr_realizations = 50;
    snr_cmd->add_option("--realizations", snr_realizations, "topology redraws");
    snr_cmd->callback([&]() {
        const ExperimentConfig cfg = resolve_config(g);
        const SnrCdfResult result = run_snr_cdf(cfg, snr_realizations);
        write_snr_cdf_csv(out_path(g, "snr_cdf.csv"), result);
        std::ofstream target(out_path(g, "snr_target.csv"));
        target.precision(17);
        target << "coverage,snr_target_db\n"
               << result.coverage << "," << result.target_db << "\n";
        std::printf("wrote %s; %.0f%% coverage target %.4f dB\n",
                    out_path(g, "snr_cdf.csv").c_str(), result.coverage * 100.0,
                    result.target_db);
    });

    // --------------------------------------------------------- threshold-sweep
    auto* thresh_cmd = app.add_subcommand(
        "threshold-sweep", "error probability vs decision threshold per epsilon");
    std::string thresh_model, thresh_dataset;
    std::string epsilons = "0.05,0.1,0.2";
    thresh_cmd->add_option("--model", thresh_model, "model file")->required();
    thresh_cmd->add_option("--dataset", thresh_dataset, "evaluation dataset")->required();
    thresh_cmd->add_option("--epsilons", epsilons, "comma-separated activation probabilities");
    thresh_cmd->callback([&]() {
        const ExperimentConfig cfg = resolve_config(g);
        const MlpModel model = load_model(thresh_model);
        const Dataset ds = read_dataset(thresh_dataset);
        const ScoreSet scores = score_dataset(model, ds);
        for (double eps : parse_double_list(epsilons)) {
            const ThresholdTable table = calibrate_threshold(scores, eps, cfg.tau_step);
            const std::string name = "threshold_eps" + format_value(eps) + ".csv";
            write_threshold_csv(out_path(g, name), table);
            std::printf("eps=%g: tau*=%.4f P_E(tau*)=%.6g -> %s\n", eps,
                        table.tau_star, table.p_e_star, out_path(g, name).c_str());
        }
    });

    // --------------------------------------------------------------------- roc
    auto* roc_cmd = app.add_subcommand(
        "roc", "ROC for a model/dataset, or sweeps over L, K, or cluster size T");
    std::string roc_model, roc_dataset;
    std::string sweep_l, sweep_k, sweep_t;
    int sweep_train_slots = 0;
    int sweep_eval_slots = 4000;
    roc_cmd->add_option("--model", roc_model, "model file (single ROC or --sweep-t)");
    roc_cmd->add_option("--dataset", roc_dataset, "evaluation dataset (single ROC)");
    roc_cmd->add_option("--sweep-l", sweep_l, "pilot lengths, e.g. 20,40,60");
    roc_cmd->add_option("--sweep-k", sweep_k, "user counts, e.g. 50,100,200");
    roc_cmd->add_option("--sweep-t", sweep_t, "cluster sizes, e.g. 1,2,3,4,5");
    roc_cmd->add_option("--train-slots", sweep_train_slots,
                        "training slots per sweep point (0 = dataset_slots)");
    roc_cmd->add_option("--eval-slots", sweep_eval_slots, "evaluation slots");
    roc_cmd->callback([&]() {
        const ExperimentConfig cfg = resolve_config(g);
        const int sweeps = (sweep_l.empty() ? 0 : 1) + (sweep_k.empty() ? 0 : 1) +
                           (sweep_t.empty() ? 0 : 1);
        if (sweeps > 1) {
            throw std::invalid_argument("choose at most one of --sweep-l/-k/-t");
        }
        if (!sweep_l.empty() || !sweep_k.empty()) {
            const SweepOptions opts{sweep_train_slots, sweep_eval_slots};
            const bool over_l = !sweep_l.empty();
            const auto points =
                over_l ? run_pilot_length_sweep(cfg, parse_int_list(sweep_l), opts)
                       : run_user_count_sweep(cfg, parse_int_list(sweep_k), opts);
            const std::string tag = over_l ? "l" : "k";
            for (const auto& p : points) {
                write_roc_csv(out_path(g, "roc_" + tag + format_value(p.value) + ".csv"),
                              p.curve);
                std::printf("%s=%g: AUC %.6f\n", over_l ? "L" : "K", p.value, p.auc);
            }
            write_sweep_csv(out_path(g, "sweep_" + tag + ".csv"),
                            over_l ? "pilot_length" : "num_users", points);
            return;
        }
        if (!sweep_t.empty()) {
            if (roc_model.empty()) {
                throw std::invalid_argument("--sweep-t needs --model (one shared model)");
            }
            const MlpModel model = load_model(roc_model);
            const SystemRealization sys = realize_system(cfg);
            const auto points = run_cluster_sweep(cfg, sys, model,
                                                  parse_int_list(sweep_t),
                                                  sweep_eval_slots);
            for (const auto& p : points) {
                write_roc_csv(out_path(g, "roc_t" + format_value(p.value) + ".csv"),
                              p.curve);
                std::printf("T=%g: AUC %.6f\n", p.value, p.auc);
            }
            write_sweep_csv(out_path(g, "sweep_t.csv"), "cluster_size", points);
            return;
        }
        if (roc_model.empty() || roc_dataset.empty()) {
            throw std::invalid_argument("single ROC needs --model and --dataset");
        }
        const MlpModel model = load_model(roc_model);
        const Dataset ds = read_dataset(roc_dataset);
        const ScoreSet scores = score_dataset(model, ds);
        const RocCurve curve = roc(scores, make_tau_grid(cfg.tau_step));
        write_roc_csv(out_path(g, "roc.csv"), curve);
        std::printf("AUC %.6f (exact %.6f) -> %s\n", curve.auc, roc_exact(scores).auc,
                    out_path(g, "roc.csv").c_str());
    });

    // ------------------------------------------------------------ perturb-eval
    auto* perturb_cmd = app.add_subcommand(
        "perturb-eval", "AUC under matched-noise input perturbation");
    std::string perturb_model, perturb_dataset;
    std::string thetas = "0,0.1,0.2,0.3,0.5";
    perturb_cmd->add_option("--model", perturb_model, "model file")->required();
    perturb_cmd->add_option("--dataset", perturb_dataset, "evaluation dataset")->required();
    perturb_cmd->add_option("--thetas", thetas, "comma-separated modulation factors");
    perturb_cmd->callback([&]() {
        const ExperimentConfig cfg = resolve_config(g);
        const MlpModel model = load_model(perturb_model);
        const Dataset ds = read_dataset(perturb_dataset);
        const auto points = run_perturb_eval(cfg, model, ds, parse_double_list(thetas));
        for (const auto& p : points) {
            write_roc_csv(out_path(g, "roc_theta" + format_value(p.value) + ".csv"),
                          p.curve);
            std::printf("theta=%g: AUC %.6f\n", p.value, p.auc);
        }
        write_sweep_csv(out_path(g, "perturb_auc.csv"), "theta", points);
    });

    // -------------------------------------------------------------- quant-eval
    auto* quant_cmd = app.add_subcommand(
        "quant-eval", "AUC per fixed-point input format (W_F)");
    std::string quant_model, quant_dataset;
    std::string formats = "6_2,8_4,10_6,12_8";
    quant_cmd->add_option("--model", quant_model, "model file")->required();
    quant_cmd->add_option("--dataset", quant_dataset, "evaluation dataset")->required();
    quant_cmd->add_option("--formats", formats, "comma-separated W_F formats");
    quant_cmd->callback([&]() {
        const MlpModel model = load_model(quant_model);
        const Dataset ds = read_dataset(quant_dataset);
        std::vector<FixedPointFormat> fmts;
        std::stringstream ss(formats);
        std::string item;
        while (std::getline(ss, item, ',')) {
            fmts.push_back(FixedPointFormat::parse(item));
        }
        const auto points = run_quant_eval(model, ds, fmts);
        for (const auto& p : points) {
            write_roc_csv(out_path(g, "roc_y" + p.label + ".csv"), p.curve);
            std::printf("Y_%s: AUC %.6f\n", p.label.c_str(), p.auc);
        }
        write_sweep_csv(out_path(g, "quant_auc.csv"), "format", points);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
