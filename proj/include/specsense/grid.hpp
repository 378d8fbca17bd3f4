#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "specsense/errors.hpp"
#include "specsense/fft.hpp"

namespace specsense {

/// Block/channel/slot geometry of the analysis lattice.
///
/// A stream of N·L samples is cut into L non-overlapping blocks of N samples.
/// Each block's N frequency bins are grouped into B = N/beta channels of beta
/// consecutive bins; each run of gamma consecutive blocks forms one time slot,
/// giving G = L/gamma slots.
struct GridConfig {
    std::size_t block_len = 1024;        ///< N: samples per block
    std::size_t freqs_per_channel = 8;   ///< beta: must divide N
    std::size_t blocks_per_slot = 64;    ///< gamma: must divide L
    std::size_t num_blocks = 640;        ///< L

    std::size_t num_channels() const { return block_len / freqs_per_channel; }  ///< B
    std::size_t num_slots() const { return num_blocks / blocks_per_slot; }      ///< G

    void validate() const {
        if (block_len == 0 || freqs_per_channel == 0 || blocks_per_slot == 0 || num_blocks == 0)
            throw InvalidInputError("GridConfig: all dimensions must be positive");
        if (block_len % freqs_per_channel != 0)
            throw InvalidInputError("GridConfig: freqs_per_channel must divide block_len");
        if (num_blocks % blocks_per_slot != 0)
            throw InvalidInputError("GridConfig: blocks_per_slot must divide num_blocks");
    }
};

/// N x L matrix of per-bin power, column-major (column l = block l).
struct Spectrogram {
    std::size_t num_bins = 0;    ///< N rows
    std::size_t num_blocks = 0;  ///< L columns
    std::vector<double> values;  ///< size N*L, column-major

    double& at(std::size_t bin, std::size_t block) { return values[block * num_bins + bin]; }
    double at(std::size_t bin, std::size_t block) const { return values[block * num_bins + bin]; }
};

/// B x G matrix of per-(channel, slot) power, column-major (column g = slot g).
struct PowerGrid {
    std::size_t num_channels = 0;  ///< B rows
    std::size_t num_slots = 0;     ///< G columns
    std::vector<double> values;    ///< size B*G, column-major

    double& at(std::size_t channel, std::size_t slot) {
        return values[slot * num_channels + channel];
    }
    double at(std::size_t channel, std::size_t slot) const {
        return values[slot * num_channels + channel];
    }
};

/// Boolean occupancy decisions for every (channel, slot) cell plus the
/// threshold they were derived with.
struct OccupancyMap {
    std::size_t num_channels = 0;
    std::size_t num_slots = 0;
    std::vector<bool> flags;  ///< size B*G, column-major
    double threshold_used = 0.0;

    bool at(std::size_t channel, std::size_t slot) const {
        return flags[slot * num_channels + channel];
    }
    void set(std::size_t channel, std::size_t slot, bool value) {
        flags[slot * num_channels + channel] = value;
    }
};

/// Per-block unitary-DFT power spectrogram of a length-N·L sample stream.
/// Rectangular non-overlapping blocks, no windowing. Throws if the stream
/// length is not exactly N·L (trailing partial blocks are rejected rather
/// than zero-padded so the total sample count stays exact).
inline Spectrogram stft(const std::vector<std::complex<double>>& x, const GridConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.block_len;
    const std::size_t l_count = cfg.num_blocks;
    if (x.size() != n * l_count)
        throw InvalidInputError("stft: sample count " + std::to_string(x.size()) +
                                " is not block_len * num_blocks = " + std::to_string(n * l_count));
    Spectrogram spec;
    spec.num_bins = n;
    spec.num_blocks = l_count;
    spec.values.resize(n * l_count);
    std::vector<std::complex<double>> coeffs(n);
    for (std::size_t l = 0; l < l_count; ++l) {
        fft_forward(x.data() + l * n, coeffs.data(), n);
        for (std::size_t k = 0; k < n; ++k) spec.values[l * n + k] = std::norm(coeffs[k]);
    }
    return spec;
}

/// Sum spectrogram power over each channel's beta bins and each slot's gamma
/// blocks.
///
/// Summation order is pinned: for cell (b, g), blocks are visited in
/// ascending order and the beta bins of the channel are accumulated into a
/// per-block subtotal before being added to the cell. Other power-grid
/// producers in this library follow the same order so that algebraically
/// identical pipelines produce bit-identical grids.
inline PowerGrid grid_power(const Spectrogram& spec, const GridConfig& cfg) {
    cfg.validate();
    if (spec.num_bins != cfg.block_len || spec.num_blocks != cfg.num_blocks)
        throw InvalidInputError("grid_power: spectrogram dimensions do not match the grid config");
    const std::size_t beta = cfg.freqs_per_channel;
    const std::size_t gamma = cfg.blocks_per_slot;
    const std::size_t b_count = cfg.num_channels();
    const std::size_t g_count = cfg.num_slots();
    PowerGrid grid;
    grid.num_channels = b_count;
    grid.num_slots = g_count;
    grid.values.assign(b_count * g_count, 0.0);
    for (std::size_t g = 0; g < g_count; ++g) {
        for (std::size_t b = 0; b < b_count; ++b) {
            double cell = 0.0;
            for (std::size_t j = 0; j < gamma; ++j) {
                const std::size_t l = g * gamma + j;
                double block_sum = 0.0;
                for (std::size_t f = 0; f < beta; ++f)
                    block_sum += spec.values[l * cfg.block_len + b * beta + f];
                cell += block_sum;
            }
            grid.values[g * b_count + b] = cell;
        }
    }
    return grid;
}

/// Flag every cell whose power is >= theta.
inline OccupancyMap threshold_occupancy(const PowerGrid& grid, double theta) {
    if (!(theta >= 0.0)) throw InvalidInputError("threshold_occupancy: theta must be >= 0");
    OccupancyMap map;
    map.num_channels = grid.num_channels;
    map.num_slots = grid.num_slots;
    map.threshold_used = theta;
    map.flags.resize(grid.values.size());
    for (std::size_t i = 0; i < grid.values.size(); ++i) map.flags[i] = grid.values[i] >= theta;
    return map;
}

/// q-quantile of the flattened grid values with linear interpolation between
/// order statistics: position q*(count-1) in the sorted values.
inline double quantile_threshold(const PowerGrid& grid, double q) {
    if (grid.values.empty()) throw InvalidInputError("quantile_threshold: empty grid");
    if (!(q >= 0.0 && q <= 1.0))
        throw InvalidInputError("quantile_threshold: q must lie in [0, 1]");
    std::vector<double> sorted = grid.values;
    std::sort(sorted.begin(), sorted.end());
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace specsense
