#include "gfra/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gfra/errors.hpp"
#include "io_util.hpp"

namespace gfra {

namespace {

constexpr char kMagic[4] = {'G', 'F', 'R', 'M'};
constexpr std::uint32_t kVersion = 1;

double stable_sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
    return z.unaryExpr([](double v) { return stable_sigmoid(v); });
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& z) {
    return z.cwiseMax(0.0);
}

/// Rounds every parameter through float32 so the on-disk form is exact.
void round_params_to_f32(MlpModel& model) {
    for (auto& w : model.weights) {
        w = w.unaryExpr([](double v) { return static_cast<double>(static_cast<float>(v)); });
    }
    for (auto& b : model.biases) {
        b = b.unaryExpr([](double v) { return static_cast<double>(static_cast<float>(v)); });
    }
}

} // namespace

void MlpArchitecture::validate() const {
    if (input_dim < 1 || output_dim < 1) {
        throw std::invalid_argument("MlpArchitecture: input/output dims must be >= 1");
    }
    if (hidden_layers < 1 || hidden_width < 1) {
        throw std::invalid_argument("MlpArchitecture: Z and V must be >= 1");
    }
}

long long parameter_count(const MlpArchitecture& arch) {
    arch.validate();
    const long long v = arch.hidden_width;
    const long long z = arch.hidden_layers;
    const long long in = arch.input_dim;
    const long long out = arch.output_dim;
    return (z - 1) * v * v + (in + out + z) * v + out;
}

std::vector<double> MlpModel::forward(std::span<const double> scaled_features) const {
    if (static_cast<int>(scaled_features.size()) != arch.input_dim) {
        throw std::invalid_argument("MlpModel::forward: feature length mismatch");
    }
    Eigen::MatrixXd x =
        Eigen::Map<const Eigen::VectorXd>(scaled_features.data(),
                                          static_cast<Eigen::Index>(scaled_features.size()));
    const Eigen::MatrixXd out = forward_batch(x);
    return {out.data(), out.data() + out.size()};
}

Eigen::MatrixXd MlpModel::forward_batch(const Eigen::MatrixXd& x) const {
    if (x.rows() != arch.input_dim) {
        throw std::invalid_argument("MlpModel::forward_batch: input dim mismatch");
    }
    Eigen::MatrixXd a = x;
    const std::size_t layers = weights.size();
    for (std::size_t t = 0; t < layers; ++t) {
        Eigen::MatrixXd z = weights[t] * a;
        z.colwise() += biases[t];
        a = (t + 1 == layers) ? sigmoid(z) : relu(z);
    }
    return a;
}

std::vector<double> MlpModel::predict(std::span<const double> raw_features) const {
    const auto scaled = apply_scaler(scaler, raw_features);
    return forward(scaled);
}

MlpModel init_model(const MlpArchitecture& arch, FeatureScaler scaler, SeededRng& rng) {
    arch.validate();
    if (static_cast<int>(scaler.mean.size()) != arch.input_dim ||
        static_cast<int>(scaler.stddev.size()) != arch.input_dim) {
        throw std::invalid_argument("init_model: scaler dimension mismatch");
    }
    MlpModel model;
    model.arch = arch;
    model.scaler = std::move(scaler);

    std::vector<int> dims;
    dims.push_back(arch.input_dim);
    for (int t = 0; t < arch.hidden_layers; ++t) {
        dims.push_back(arch.hidden_width);
    }
    dims.push_back(arch.output_dim);

    for (std::size_t t = 0; t + 1 < dims.size(); ++t) {
        const int fan_in = dims[t];
        const int fan_out = dims[t + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Eigen::MatrixXd w(fan_out, fan_in);
        for (Eigen::Index i = 0; i < w.rows(); ++i) {
            for (Eigen::Index j = 0; j < w.cols(); ++j) {
                w(i, j) = rng.uniform(-bound, bound);
            }
        }
        model.weights.push_back(std::move(w));
        model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    round_params_to_f32(model);
    return model;
}

Eigen::MatrixXd forward_train(const MlpModel& model, const Eigen::MatrixXd& x,
                              ForwardCache& cache) {
    const std::size_t layers = model.weights.size();
    cache.pre.assign(layers, {});
    cache.post.assign(layers + 1, {});
    cache.post[0] = x;
    for (std::size_t t = 0; t < layers; ++t) {
        Eigen::MatrixXd z = model.weights[t] * cache.post[t];
        z.colwise() += model.biases[t];
        cache.post[t + 1] = (t + 1 == layers) ? sigmoid(z) : relu(z);
        cache.pre[t] = std::move(z);
    }
    return cache.post[layers];
}

double bce_loss(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& labels,
                LossReduction reduction) {
    if (probs.rows() != labels.rows() || probs.cols() != labels.cols()) {
        throw std::invalid_argument("bce_loss: shape mismatch");
    }
    const auto p = probs.array().min(1.0 - kProbClip).max(kProbClip);
    const auto y = labels.array();
    const double total = -(y * p.log() + (1.0 - y) * (1.0 - p).log()).sum();
    if (reduction == LossReduction::mean && probs.cols() > 0) {
        return total / static_cast<double>(probs.cols());
    }
    return total;
}

Gradients backward(const MlpModel& model, const ForwardCache& cache,
                   const Eigen::MatrixXd& labels, LossReduction reduction) {
    const std::size_t layers = model.weights.size();
    if (cache.post.size() != layers + 1) {
        throw std::invalid_argument("backward: forward cache missing");
    }
    const Eigen::MatrixXd& probs = cache.post[layers];
    const double scale = reduction == LossReduction::mean
                             ? 1.0 / static_cast<double>(labels.cols())
                             : 1.0;

    Gradients grads;
    grads.weights.resize(layers);
    grads.biases.resize(layers);

    // d(loss)/d(z_out) = probs - labels where the clip is inactive.
    Eigen::MatrixXd delta = (probs - labels) * scale;
    delta = ((probs.array() < kProbClip) || (probs.array() > 1.0 - kProbClip))
                .select(0.0, delta);

    for (std::size_t t = layers; t-- > 0;) {
        grads.weights[t].noalias() = delta * cache.post[t].transpose();
        grads.biases[t] = delta.rowwise().sum();
        if (t > 0) {
            const Eigen::MatrixXd back = model.weights[t].transpose() * delta;
            delta = (cache.pre[t - 1].array() > 0.0).select(back, 0.0);
        }
    }
    return grads;
}

AdamState AdamState::zeros_like(const MlpModel& model) {
    AdamState st;
    for (const auto& w : model.weights) {
        st.m_weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
        st.v_weights.push_back(Eigen::MatrixXd::Zero(w.rows(), w.cols()));
    }
    for (const auto& b : model.biases) {
        st.m_biases.push_back(Eigen::VectorXd::Zero(b.size()));
        st.v_biases.push_back(Eigen::VectorXd::Zero(b.size()));
    }
    return st;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) && learning_rate != 0.0) {
        throw std::invalid_argument("TrainConfig: learning_rate must be >= 0");
    }
    if (batch_size < 1 || max_epochs < 1 || patience < 1) {
        throw std::invalid_argument("TrainConfig: batch_size, max_epochs, patience must be >= 1");
    }
    if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
        throw std::invalid_argument("TrainConfig: adam betas must lie in (0, 1)");
    }
    if (!(adam_epsilon > 0.0)) {
        throw std::invalid_argument("TrainConfig: adam_epsilon must be > 0");
    }
}

void adam_step(MlpModel& model, const Gradients& grads, AdamState& state,
               const TrainConfig& cfg) {
    state.step += 1;
    const double t = static_cast<double>(state.step);
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, t);

    auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
        m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * grad;
        v = (cfg.adam_beta2 * v.array() +
             (1.0 - cfg.adam_beta2) * grad.array().square())
                .matrix();
        param.array() -= cfg.learning_rate * (m.array() / bc1) /
                         ((v.array() / bc2).sqrt() + cfg.adam_epsilon);
    };

    for (std::size_t i = 0; i < model.weights.size(); ++i) {
        update(model.weights[i], grads.weights[i], state.m_weights[i], state.v_weights[i]);
        update(model.biases[i], grads.biases[i], state.m_biases[i], state.v_biases[i]);
    }
}

namespace {

/// Columns of the standardized feature matrix / label matrix for the
/// given sample indices.
void gather(const Dataset& ds, const FeatureScaler& scaler,
            const std::vector<std::size_t>& indices, Eigen::MatrixXd& x,
            Eigen::MatrixXd& y) {
    const auto dim = static_cast<Eigen::Index>(ds.header.feature_dim());
    const auto k = static_cast<Eigen::Index>(ds.header.num_users);
    x.resize(dim, static_cast<Eigen::Index>(indices.size()));
    y.resize(k, static_cast<Eigen::Index>(indices.size()));
    for (std::size_t c = 0; c < indices.size(); ++c) {
        const Sample& s = ds.samples[indices[c]];
        const auto scaled = apply_scaler(scaler, features_as_double(s));
        for (Eigen::Index j = 0; j < dim; ++j) {
            x(j, static_cast<Eigen::Index>(c)) = scaled[static_cast<std::size_t>(j)];
        }
        for (Eigen::Index j = 0; j < k; ++j) {
            y(j, static_cast<Eigen::Index>(c)) =
                static_cast<double>(s.labels[static_cast<std::size_t>(j)]);
        }
    }
}

} // namespace

TrainResult train(MlpModel model, const Dataset& ds, const SlotSplit& split,
                  const TrainConfig& cfg) {
    cfg.validate();
    model.arch.validate();
    if (static_cast<std::uint32_t>(model.arch.input_dim) !=
            static_cast<std::uint32_t>(ds.header.feature_dim()) ||
        static_cast<std::uint32_t>(model.arch.output_dim) != ds.header.num_users) {
        throw std::invalid_argument("train: dataset dimensions do not match architecture");
    }
    if (split.train_indices.empty() || split.val_indices.empty()) {
        throw std::invalid_argument("train: both splits must be non-empty");
    }

    Eigen::MatrixXd x_train, y_train, x_val, y_val;
    gather(ds, model.scaler, split.train_indices, x_train, y_train);
    gather(ds, model.scaler, split.val_indices, x_val, y_val);

    const auto n_train = static_cast<std::size_t>(x_train.cols());
    const auto batch = static_cast<std::size_t>(cfg.batch_size);

    AdamState state = AdamState::zeros_like(model);
    SeededRng shuffle_rng = SeededRng(cfg.init_seed).split("shuffle");

    TrainResult result;
    MlpModel best = model;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = 0;
    int stale_epochs = 0;

    std::vector<std::size_t> perm(n_train);
    std::iota(perm.begin(), perm.end(), std::size_t{0});

    Eigen::MatrixXd xb, yb;
    ForwardCache cache;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        // Fisher-Yates with a per-epoch sub-stream.
        SeededRng er = shuffle_rng.split("epoch", static_cast<std::uint64_t>(epoch));
        for (std::size_t i = n_train - 1; i > 0; --i) {
            std::swap(perm[i], perm[er.uniform_below(i + 1)]);
        }

        double epoch_loss_sum = 0.0;
        int batch_index = 0;
        for (std::size_t start = 0; start < n_train; start += batch, ++batch_index) {
            const auto count =
                static_cast<Eigen::Index>(std::min(batch, n_train - start));
            xb.resize(x_train.rows(), count);
            yb.resize(y_train.rows(), count);
            for (Eigen::Index c = 0; c < count; ++c) {
                const auto src = static_cast<Eigen::Index>(perm[start + static_cast<std::size_t>(c)]);
                xb.col(c) = x_train.col(src);
                yb.col(c) = y_train.col(src);
            }

            const Eigen::MatrixXd probs = forward_train(model, xb, cache);
            const double batch_sum = bce_loss(probs, yb, LossReduction::sum);
            // The clip bounds non-finite activations too, so probe the
            // raw outputs rather than only the clipped loss.
            if (!std::isfinite(batch_sum) || !probs.allFinite()) {
                throw divergence_error("train: non-finite loss at epoch " +
                                       std::to_string(epoch) + ", batch " +
                                       std::to_string(batch_index));
            }
            epoch_loss_sum += batch_sum;

            const Gradients grads = backward(model, cache, yb, cfg.reduction);
            adam_step(model, grads, state, cfg);
        }

        const double train_loss = epoch_loss_sum / static_cast<double>(n_train);
        const Eigen::MatrixXd val_probs = model.forward_batch(x_val);
        const double val_loss = bce_loss(val_probs, y_val, LossReduction::sum) /
                                static_cast<double>(x_val.cols());
        if (!std::isfinite(val_loss) || !val_probs.allFinite()) {
            throw divergence_error("train: non-finite validation loss at epoch " +
                                   std::to_string(epoch));
        }
        result.trace.push_back({epoch, train_loss, val_loss});

        if (best_val - val_loss >= cfg.min_improvement) {
            best_val = val_loss;
            best = model;
            best_epoch = epoch;
            stale_epochs = 0;
        } else {
            ++stale_epochs;
            if (stale_epochs >= cfg.patience) {
                break;
            }
        }
    }

    round_params_to_f32(best);
    result.model = std::move(best);
    result.best_epoch = best_epoch;
    result.best_val_loss = best_val;
    return result;
}

void save_model(const std::filesystem::path& path, const MlpModel& model) {
    model.arch.validate();
    detail::atomic_write(path, [&](std::ofstream& out) {
        detail::put_bytes(out, kMagic, 4);
        detail::put_u32(out, kVersion);
        detail::put_u32(out, static_cast<std::uint32_t>(model.arch.input_dim));
        detail::put_u32(out, static_cast<std::uint32_t>(model.arch.hidden_layers));
        detail::put_u32(out, static_cast<std::uint32_t>(model.arch.hidden_width));
        detail::put_u32(out, static_cast<std::uint32_t>(model.arch.output_dim));
        for (double m : model.scaler.mean) {
            detail::put_f64(out, m);
        }
        for (double s : model.scaler.stddev) {
            detail::put_f64(out, s);
        }
        for (std::size_t t = 0; t < model.weights.size(); ++t) {
            const auto& w = model.weights[t];
            detail::put_u32(out, static_cast<std::uint32_t>(w.rows()));
            detail::put_u32(out, static_cast<std::uint32_t>(w.cols()));
            for (Eigen::Index i = 0; i < w.rows(); ++i) {
                for (Eigen::Index j = 0; j < w.cols(); ++j) {
                    detail::put_f32(out, static_cast<float>(w(i, j)));
                }
            }
            const auto& b = model.biases[t];
            detail::put_u32(out, static_cast<std::uint32_t>(b.size()));
            for (Eigen::Index i = 0; i < b.size(); ++i) {
                detail::put_f32(out, static_cast<float>(b(i)));
            }
        }
    });
}

MlpModel load_model(const std::filesystem::path& path) {
    detail::BinaryReader in(path, "load_model");
    char magic[4];
    in.read_bytes(magic, 4);
    if (std::string_view(magic, 4) != std::string_view(kMagic, 4)) {
        throw format_error("load_model: bad magic at byte offset 0 (not a GFRM file)");
    }
    const std::uint32_t version = in.u32();
    if (version != kVersion) {
        throw format_error("load_model: unsupported version " + std::to_string(version));
    }
    MlpModel model;
    model.arch.input_dim = static_cast<int>(in.u32());
    model.arch.hidden_layers = static_cast<int>(in.u32());
    model.arch.hidden_width = static_cast<int>(in.u32());
    model.arch.output_dim = static_cast<int>(in.u32());
    model.arch.validate();

    model.scaler.mean.resize(static_cast<std::size_t>(model.arch.input_dim));
    model.scaler.stddev.resize(static_cast<std::size_t>(model.arch.input_dim));
    for (auto& m : model.scaler.mean) {
        m = in.f64();
    }
    for (auto& s : model.scaler.stddev) {
        s = in.f64();
    }

    const std::size_t layers = static_cast<std::size_t>(model.arch.hidden_layers) + 1;
    for (std::size_t t = 0; t < layers; ++t) {
        const auto rows = static_cast<Eigen::Index>(in.u32());
        const auto cols = static_cast<Eigen::Index>(in.u32());
        Eigen::MatrixXd w(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) {
                w(i, j) = static_cast<double>(in.f32());
            }
        }
        const auto blen = static_cast<Eigen::Index>(in.u32());
        if (blen != rows) {
            throw format_error("load_model: bias length mismatch in layer " +
                               std::to_string(t) + " at byte offset " +
                               std::to_string(in.offset()));
        }
        Eigen::VectorXd b(blen);
        for (Eigen::Index i = 0; i < blen; ++i) {
            b(i) = static_cast<double>(in.f32());
        }
        model.weights.push_back(std::move(w));
        model.biases.push_back(std::move(b));
    }
    if (!in.at_eof()) {
        throw format_error("load_model: trailing bytes after layer " +
                           std::to_string(layers - 1));
    }
    return model;
}

void write_loss_trace_csv(const std::filesystem::path& path,
                          const std::vector<EpochStats>& trace) {
    detail::atomic_write(path, [&](std::ofstream& out) {
        out.precision(std::numeric_limits<double>::max_digits10);
        out << "epoch,train_loss,val_loss\n";
        for (const auto& e : trace) {
            out << e.epoch << "," << e.train_loss << "," << e.val_loss << "\n";
        }
    });
}

} // namespace gfra
