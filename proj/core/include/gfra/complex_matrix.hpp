#ifndef GFRA_COMPLEX_MATRIX_HPP
#define GFRA_COMPLEX_MATRIX_HPP

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gfra {

/// Dense complex matrix, row-major. Dimensions are fixed at
/// construction; entries.size() == rows*cols always holds.
struct ComplexMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::complex<double>> entries;

    ComplexMatrix() = default;

    ComplexMatrix(std::size_t r, std::size_t c)
        : rows(r), cols(c), entries(r * c) {
        if (r == 0 || c == 0) {
            throw std::invalid_argument("ComplexMatrix: dimensions must be positive");
        }
    }

    ComplexMatrix(std::size_t r, std::size_t c, std::vector<std::complex<double>> data)
        : rows(r), cols(c), entries(std::move(data)) {
        if (r == 0 || c == 0) {
            throw std::invalid_argument("ComplexMatrix: dimensions must be positive");
        }
        if (entries.size() != rows * cols) {
            throw std::invalid_argument("ComplexMatrix: entry count does not match rows*cols");
        }
    }

    std::complex<double>& operator()(std::size_t r, std::size_t c) {
        return entries[r * cols + c];
    }
    const std::complex<double>& operator()(std::size_t r, std::size_t c) const {
        return entries[r * cols + c];
    }

    double frobenius_norm_sq() const {
        double acc = 0.0;
        for (const auto& z : entries) {
            acc += std::norm(z);
        }
        return acc;
    }

    bool operator==(const ComplexMatrix&) const = default;
};

} // namespace gfra

#endif
