/**
 * Input corruption models for stress-testing the detector.
 *
 * Perturbation blends each collection with Gaussian noise matched to
 * its own sample mean/std:  x' = x sqrt(1 - theta^2) + theta n.
 *
 * Quantization maps reals onto a signed fixed-point lattice with W
 * total bits (F fractional), round-to-nearest-even, saturating at the
 * integer range. The feature-level helper models the receiver ADC: a
 * power-of-two gain first scales the vector to full range (automatic
 * gain control), the lattice is applied, and the gain is undone.
 */
#ifndef GFRA_ROBUSTNESS_HPP
#define GFRA_ROBUSTNESS_HPP

#include <span>
#include <string>
#include <vector>

#include "gfra/complex_matrix.hpp"
#include "gfra/rng.hpp"

namespace gfra {

enum class PerturbationTarget { received_signal, large_scale_map };

struct PerturbationConfig {
    double theta = 0.0; ///< 0 = untouched input, 1 = pure matched noise
    PerturbationTarget target = PerturbationTarget::received_signal;

    void validate() const;
};

/// Perturbs one collection using its own sample statistics; theta = 0
/// returns the input bitwise. Requires >= 2 elements (the sample std
/// is undefined otherwise).
std::vector<double> perturb(std::span<const double> values, double theta,
                            SeededRng& rng);

/// Real and imaginary parts are perturbed independently, each with its
/// own matched statistics.
ComplexMatrix perturb(const ComplexMatrix& values, double theta, SeededRng& rng);

/// Feature-vector variant: the [Re block | Im block] halves are the two
/// collections.
std::vector<double> perturb_features(std::span<const double> features, double theta,
                                     SeededRng& rng);

struct FixedPointFormat {
    int word_length = 0;     ///< W, sign bit included
    int fractional_bits = 0; ///< F

    void validate() const; ///< requires 1 <= F < W <= 64

    /// Parses the "W_F" spelling used in flags and CSV headers, e.g. "8_4".
    static FixedPointFormat parse(const std::string& text);
    std::string to_string() const;
};

/// Round-to-nearest-even at resolution 2^-F, saturating to
/// [-2^(W-1), 2^(W-1)-1] integer steps.
double quantize(double x, const FixedPointFormat& fmt);

enum class AgcMode {
    none,       ///< quantize raw values as-is
    per_vector, ///< power-of-two gain to full scale, per collection
};

std::vector<double> quantize_features(std::span<const double> features,
                                      const FixedPointFormat& fmt,
                                      AgcMode agc = AgcMode::per_vector);

} // namespace gfra

#endif
