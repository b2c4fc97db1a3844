#include "gfra/robustness.hpp"

#include <cmath>
#include <stdexcept>

namespace gfra {

void PerturbationConfig::validate() const {
    if (!(theta >= 0.0 && theta <= 1.0)) {
        throw std::invalid_argument("PerturbationConfig: theta must lie in [0, 1]");
    }
}

namespace {

struct SampleStats {
    double mean = 0.0;
    double stddev = 0.0;
};

SampleStats stats_of(std::span<const double> values) {
    SampleStats st;
    for (double v : values) {
        st.mean += v;
    }
    st.mean /= static_cast<double>(values.size());
    double acc = 0.0;
    for (double v : values) {
        const double d = v - st.mean;
        acc += d * d;
    }
    st.stddev = std::sqrt(acc / static_cast<double>(values.size()));
    return st;
}

} // namespace

std::vector<double> perturb(std::span<const double> values, double theta,
                            SeededRng& rng) {
    if (!(theta >= 0.0 && theta <= 1.0)) {
        throw std::invalid_argument("perturb: theta must lie in [0, 1]");
    }
    if (values.empty()) {
        throw std::invalid_argument("perturb: empty input");
    }
    if (theta == 0.0) {
        return {values.begin(), values.end()}; // identity, bitwise
    }
    if (values.size() < 2) {
        throw std::invalid_argument(
            "perturb: sample std undefined for a single-element collection");
    }
    const SampleStats st = stats_of(values);
    const double keep = std::sqrt(1.0 - theta * theta);
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = values[i] * keep + theta * rng.normal(st.mean, st.stddev);
    }
    return out;
}

ComplexMatrix perturb(const ComplexMatrix& values, double theta, SeededRng& rng) {
    std::vector<double> re(values.entries.size());
    std::vector<double> im(values.entries.size());
    for (std::size_t i = 0; i < values.entries.size(); ++i) {
        re[i] = values.entries[i].real();
        im[i] = values.entries[i].imag();
    }
    const auto re_p = perturb(re, theta, rng);
    const auto im_p = perturb(im, theta, rng);
    ComplexMatrix out(values.rows, values.cols);
    for (std::size_t i = 0; i < out.entries.size(); ++i) {
        out.entries[i] = {re_p[i], im_p[i]};
    }
    return out;
}

std::vector<double> perturb_features(std::span<const double> features, double theta,
                                     SeededRng& rng) {
    if (features.size() % 2 != 0) {
        throw std::invalid_argument("perturb_features: feature length must be even");
    }
    const std::size_t half = features.size() / 2;
    const auto re = perturb(features.subspan(0, half), theta, rng);
    const auto im = perturb(features.subspan(half), theta, rng);
    std::vector<double> out;
    out.reserve(features.size());
    out.insert(out.end(), re.begin(), re.end());
    out.insert(out.end(), im.begin(), im.end());
    return out;
}

void FixedPointFormat::validate() const {
    if (!(fractional_bits >= 1 && fractional_bits < word_length && word_length <= 64)) {
        throw std::invalid_argument("FixedPointFormat: need 1 <= F < W <= 64");
    }
}

FixedPointFormat FixedPointFormat::parse(const std::string& text) {
    const auto sep = text.find('_');
    if (sep == std::string::npos || sep == 0 || sep + 1 >= text.size()) {
        throw std::invalid_argument("FixedPointFormat: expected \"W_F\", got \"" + text +
                                    "\"");
    }
    FixedPointFormat fmt;
    try {
        fmt.word_length = std::stoi(text.substr(0, sep));
        fmt.fractional_bits = std::stoi(text.substr(sep + 1));
    } catch (const std::exception&) {
        throw std::invalid_argument("FixedPointFormat: expected \"W_F\", got \"" + text +
                                    "\"");
    }
    fmt.validate();
    return fmt;
}

std::string FixedPointFormat::to_string() const {
    return std::to_string(word_length) + "_" + std::to_string(fractional_bits);
}

double quantize(double x, const FixedPointFormat& fmt) {
    fmt.validate();
    const double scale = std::ldexp(1.0, fmt.fractional_bits);
    const double max_step = std::ldexp(1.0, fmt.word_length - 1) - 1.0;
    const double min_step = -std::ldexp(1.0, fmt.word_length - 1);
    // nearbyint honors the default FE_TONEAREST mode: ties go to even.
    double step = std::nearbyint(x * scale);
    step = std::min(std::max(step, min_step), max_step);
    return step / scale;
}

std::vector<double> quantize_features(std::span<const double> features,
                                      const FixedPointFormat& fmt, AgcMode agc) {
    fmt.validate();
    double gain = 1.0;
    if (agc == AgcMode::per_vector) {
        double max_abs = 0.0;
        for (double v : features) {
            max_abs = std::max(max_abs, std::abs(v));
        }
        if (max_abs > 0.0 && std::isfinite(max_abs)) {
            const double full_scale =
                (std::ldexp(1.0, fmt.word_length - 1) - 1.0) /
                std::ldexp(1.0, fmt.fractional_bits);
            // Largest power of two keeping the peak inside full scale.
            gain = std::ldexp(1.0, static_cast<int>(
                                       std::floor(std::log2(full_scale / max_abs))));
        }
    }
    std::vector<double> out(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        out[i] = quantize(features[i] * gain, fmt) / gain;
    }
    return out;
}

} // namespace gfra
