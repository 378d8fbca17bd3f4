#pragma once

// Shared utilities for the test suite: small independent oracles (direct DFT
// summation, dense operator application) and random data generation. These
// deliberately avoid the library's FFT/operator code paths so tests compare
// two independent implementations.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "specsense/rng.hpp"

namespace test_helpers {

using Cx = std::complex<double>;

/// Unitary DFT by direct O(n^2) summation: X_k = n^{-1/2} sum_j x_j w^{jk},
/// w = exp(-2*pi*i/n).
inline std::vector<Cx> dft_direct(const std::vector<Cx>& x) {
    const std::size_t n = x.size();
    std::vector<Cx> out(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        Cx acc(0.0, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>(j) *
                                 static_cast<double>(k) / static_cast<double>(n);
            acc += x[j] * Cx(std::cos(angle), std::sin(angle));
        }
        out[k] = acc * scale;
    }
    return out;
}

/// Unitary inverse DFT by direct summation.
inline std::vector<Cx> idft_direct(const std::vector<Cx>& x) {
    const std::size_t n = x.size();
    std::vector<Cx> out(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        Cx acc(0.0, 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) *
                                 static_cast<double>(k) / static_cast<double>(n);
            acc += x[j] * Cx(std::cos(angle), std::sin(angle));
        }
        out[k] = acc * scale;
    }
    return out;
}

inline std::vector<Cx> random_complex(std::size_t n, std::uint64_t seed) {
    specsense::Rng rng(seed);
    std::vector<Cx> x(n);
    for (auto& v : x) v = rng.complex_gauss();
    return x;
}

inline double norm2(const std::vector<Cx>& x) {
    double acc = 0.0;
    for (const auto& v : x) acc += std::norm(v);
    return std::sqrt(acc);
}

inline double norm1(const std::vector<Cx>& x) {
    double acc = 0.0;
    for (const auto& v : x) acc += std::abs(v);
    return acc;
}

inline std::vector<Cx> subtract(const std::vector<Cx>& a, const std::vector<Cx>& b) {
    std::vector<Cx> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

/// Maximum elementwise absolute difference.
inline double max_diff(const std::vector<Cx>& a, const std::vector<Cx>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

inline double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

/// Apply a dense matrix to a vector (independent oracle for operator tests).
inline std::vector<Cx> matvec(const Eigen::MatrixXcd& mat, const std::vector<Cx>& x) {
    Eigen::VectorXcd v(static_cast<Eigen::Index>(x.size()));
    for (std::size_t i = 0; i < x.size(); ++i) v(static_cast<Eigen::Index>(i)) = x[i];
    Eigen::VectorXcd y = mat * v;
    std::vector<Cx> out(static_cast<std::size_t>(y.size()));
    for (Eigen::Index i = 0; i < y.size(); ++i) out[static_cast<std::size_t>(i)] = y(i);
    return out;
}

}  // namespace test_helpers
