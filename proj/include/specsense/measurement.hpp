#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "specsense/errors.hpp"
#include "specsense/fft.hpp"
#include "specsense/rng.hpp"

namespace specsense {

/// Per-block compressive measurement operator.
///
/// Phi x = retain `retained_rows` of the unitary DFT of the permuted block:
/// Phi = R F P with P the permutation, F the unitary DFT, R the row
/// restriction. The composed coefficient-domain operator is A = Phi Psi with
/// Psi the unitary inverse-DFT basis (x = Psi nu), i.e. A = R F P F^H.
/// No rescaling is applied, so ‖Phi x‖₂ ≤ ‖x‖₂ and ‖A‖₂ ≤ 1 always, with
/// equality of norms at m = n where both maps are unitary.
struct MeasurementOp {
    std::size_t n = 0;  ///< block length
    std::size_t m = 0;  ///< measurements kept, 1 <= m <= n
    std::vector<std::uint32_t> permutation;    ///< bijection on {0..n-1}
    std::vector<std::uint32_t> retained_rows;  ///< sorted m-subset of {0..n-1}
    std::uint64_t seed = 0;                    ///< master seed it was drawn from
    std::uint64_t block_index = 0;             ///< position in the block stream
};

/// Requested compression ratio r -> measurement count m = round(r*n),
/// clamped to [1, n].
inline std::size_t measurements_for_ratio(std::size_t n, double ratio) {
    if (!(ratio > 0.0) || ratio > 1.0)
        throw InvalidInputError("measurements_for_ratio: ratio must lie in (0, 1]");
    const double raw = std::round(ratio * static_cast<double>(n));
    const double clamped = std::max(1.0, std::min(static_cast<double>(n), raw));
    return static_cast<std::size_t>(clamped);
}

/// Draw the operator for one block. Deterministic in (master_seed,
/// block_index); distinct block indices give independent-looking draws, and
/// the stream for one block never depends on how many other blocks exist.
inline MeasurementOp build_op(std::size_t n, std::size_t m, std::uint64_t master_seed,
                              std::uint64_t block_index) {
    if (m == 0 || m > n)
        throw InvalidInputError("build_op: need 1 <= m <= n, got m=" + std::to_string(m) +
                                ", n=" + std::to_string(n));
    Rng rng(derive_seed(master_seed, "operator", block_index));
    MeasurementOp op;
    op.n = n;
    op.m = m;
    op.permutation = rng.permutation(n);
    op.retained_rows = rng.sample_sorted(n, m);
    op.seed = master_seed;
    op.block_index = block_index;
    return op;
}

/// y = Phi x: permute, unitary DFT, keep the retained rows. Samples in,
/// measurements out.
inline std::vector<std::complex<double>> apply_phi(const MeasurementOp& op,
                                                   const std::vector<std::complex<double>>& x) {
    if (x.size() != op.n) throw InvalidInputError("apply_phi: input length does not match n");
    std::vector<std::complex<double>> permuted(op.n);
    for (std::size_t j = 0; j < op.n; ++j) permuted[j] = x[op.permutation[j]];
    std::vector<std::complex<double>> coeffs(op.n);
    fft_forward(permuted.data(), coeffs.data(), op.n);
    std::vector<std::complex<double>> y(op.m);
    for (std::size_t i = 0; i < op.m; ++i) y[i] = coeffs[op.retained_rows[i]];
    return y;
}

/// y = A nu with A = Phi Psi: synthesize the time block x = Psi nu by a
/// unitary inverse DFT, then measure it. Frequency coefficients in,
/// measurements out.
inline std::vector<std::complex<double>> apply_A(const MeasurementOp& op,
                                                 const std::vector<std::complex<double>>& nu) {
    if (nu.size() != op.n) throw InvalidInputError("apply_A: input length does not match n");
    std::vector<std::complex<double>> x(op.n);
    fft_inverse(nu.data(), x.data(), op.n);
    return apply_phi(op, x);
}

/// nu_hat = A^H y, the exact conjugate-transpose of apply_A: scatter the m
/// measurements back to their retained rows, inverse DFT, undo the
/// permutation, forward DFT.
inline std::vector<std::complex<double>> apply_A_adjoint(
    const MeasurementOp& op, const std::vector<std::complex<double>>& y) {
    if (y.size() != op.m) throw InvalidInputError("apply_A_adjoint: input length does not match m");
    std::vector<std::complex<double>> full(op.n, std::complex<double>(0.0, 0.0));
    for (std::size_t i = 0; i < op.m; ++i) full[op.retained_rows[i]] = y[i];
    std::vector<std::complex<double>> t(op.n);
    fft_inverse(full.data(), t.data(), op.n);
    std::vector<std::complex<double>> unpermuted(op.n);
    for (std::size_t j = 0; j < op.n; ++j) unpermuted[op.permutation[j]] = t[j];
    std::vector<std::complex<double>> out(op.n);
    fft_forward(unpermuted.data(), out.data(), op.n);
    return out;
}

namespace measurement_detail {
constexpr std::size_t kMaterializeLimit = 64;
constexpr std::size_t kBruteForceLimit = 24;
}  // namespace measurement_detail

/// Materialize A column-by-column (apply_A on the canonical basis). Intended
/// for test oracles and the exhaustive RIP estimator only; refuses large n.
inline Eigen::MatrixXcd materialize_A(const MeasurementOp& op) {
    if (op.n > measurement_detail::kMaterializeLimit)
        throw BruteForceBoundError("materialize_A: n > 64 is not meant to be materialized");
    Eigen::MatrixXcd A(static_cast<Eigen::Index>(op.m), static_cast<Eigen::Index>(op.n));
    std::vector<std::complex<double>> basis(op.n, std::complex<double>(0.0, 0.0));
    for (std::size_t j = 0; j < op.n; ++j) {
        basis[j] = 1.0;
        const auto column = apply_A(op, basis);
        basis[j] = 0.0;
        for (std::size_t i = 0; i < op.m; ++i) A(static_cast<Eigen::Index>(i),
                                                 static_cast<Eigen::Index>(j)) = column[i];
    }
    return A;
}

/// Materialize Phi the same way (apply_phi on the canonical basis).
inline Eigen::MatrixXcd materialize_phi(const MeasurementOp& op) {
    if (op.n > measurement_detail::kMaterializeLimit)
        throw BruteForceBoundError("materialize_phi: n > 64 is not meant to be materialized");
    Eigen::MatrixXcd phi(static_cast<Eigen::Index>(op.m), static_cast<Eigen::Index>(op.n));
    std::vector<std::complex<double>> basis(op.n, std::complex<double>(0.0, 0.0));
    for (std::size_t j = 0; j < op.n; ++j) {
        basis[j] = 1.0;
        const auto column = apply_phi(op, basis);
        basis[j] = 0.0;
        for (std::size_t i = 0; i < op.m; ++i) phi(static_cast<Eigen::Index>(i),
                                                   static_cast<Eigen::Index>(j)) = column[i];
    }
    return phi;
}

/// Exact restricted-isometry constant of one operator realization at order K:
/// the max over all C(n, K) column supports T of
/// max(|sigma_max(A_T)^2 - 1|, |1 - sigma_min(A_T)^2|), computed from the
/// eigenvalues of the K x K Gram matrix A_T^H A_T. Exhaustive in the supports,
/// so n is hard-capped.
inline double estimate_rip_delta(const MeasurementOp& op, std::size_t K) {
    if (op.n > measurement_detail::kBruteForceLimit)
        throw BruteForceBoundError("estimate_rip_delta: brute force bound exceeded (n must be <= " +
                                   std::to_string(measurement_detail::kBruteForceLimit) + ")");
    if (K == 0 || K > op.m)
        throw InvalidInputError("estimate_rip_delta: need 1 <= K <= m");
    const Eigen::MatrixXcd A = materialize_A(op);
    const Eigen::MatrixXcd gram_full = A.adjoint() * A;

    std::vector<std::size_t> support(K);
    for (std::size_t i = 0; i < K; ++i) support[i] = i;
    Eigen::MatrixXcd gram(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
    double delta = 0.0;
    while (true) {
        for (std::size_t a = 0; a < K; ++a)
            for (std::size_t b = 0; b < K; ++b)
                gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    gram_full(static_cast<Eigen::Index>(support[a]),
                              static_cast<Eigen::Index>(support[b]));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram,
                                                               Eigen::EigenvaluesOnly);
        const double lo = solver.eigenvalues().minCoeff();
        const double hi = solver.eigenvalues().maxCoeff();
        delta = std::max(delta, std::max(std::abs(hi - 1.0), std::abs(1.0 - lo)));

        // Advance to the next K-combination of {0..n-1}.
        std::size_t i = K;
        while (i > 0 && support[i - 1] == op.n - K + (i - 1)) --i;
        if (i == 0) break;
        ++support[i - 1];
        for (std::size_t j = i; j < K; ++j) support[j] = support[j - 1] + 1;
    }
    return delta;
}

/// Ensemble variant: the max realization constant over a set of operators.
inline double estimate_rip_delta(const std::vector<MeasurementOp>& ops, std::size_t K) {
    if (ops.empty()) throw InvalidInputError("estimate_rip_delta: empty operator set");
    double delta = 0.0;
    for (const auto& op : ops) delta = std::max(delta, estimate_rip_delta(op, K));
    return delta;
}

}  // namespace specsense
