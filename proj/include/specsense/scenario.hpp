#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "specsense/errors.hpp"
#include "specsense/format.hpp"
#include "specsense/grid.hpp"
#include "specsense/rng.hpp"

namespace specsense {

/// Complex baseband sample stream with acquisition metadata.
struct IqRecording {
    std::vector<std::complex<double>> samples;
    double sample_rate_hz = 1.0;
    double center_freq_hz = 0.0;
    std::optional<std::uint64_t> seed;
};

enum class Waveform { kTone, kRandomQpskLike, kFilteredNoise };

inline std::string waveform_name(Waveform w) {
    switch (w) {
        case Waveform::kTone: return "tone";
        case Waveform::kRandomQpskLike: return "random_qpsk_like";
        case Waveform::kFilteredNoise: return "filtered_noise";
    }
    throw InvalidInputError("waveform_name: unknown waveform");
}

inline Waveform waveform_from_name(const std::string& name) {
    if (name == "tone") return Waveform::kTone;
    if (name == "random_qpsk_like") return Waveform::kRandomQpskLike;
    if (name == "filtered_noise") return Waveform::kFilteredNoise;
    throw InvalidInputError("unknown waveform name: " + name);
}

/// One synthetic emitter: occupies one channel over an inclusive slot range.
/// power_db is the per-sample average power during its slots, in dB relative
/// to unit (0 dB) noise power.
struct InterfererSpec {
    std::size_t channel = 0;
    std::size_t slot_start = 0;
    std::size_t slot_end = 0;
    double power_db = 0.0;
    Waveform waveform = Waveform::kTone;
    double tone_offset = 0.5;  ///< position within the channel, [0,1); tone only

    void validate(const GridConfig& grid) const {
        if (channel >= grid.num_channels())
            throw InvalidInputError("InterfererSpec: channel index out of range");
        if (slot_start > slot_end)
            throw InvalidInputError("InterfererSpec: slot_start must be <= slot_end");
        if (slot_end >= grid.num_slots())
            throw InvalidInputError("InterfererSpec: slot_end out of range");
        if (!(tone_offset >= 0.0 && tone_offset < 1.0))
            throw InvalidInputError("InterfererSpec: tone_offset must lie in [0, 1)");
        if (!std::isfinite(power_db))
            throw InvalidInputError("InterfererSpec: power_db must be finite");
    }
};

/// A complete synthetic scene: geometry, emitters, noise level, master seed.
/// noise_power_db of nullopt means noise is off.
struct Scenario {
    GridConfig grid;
    std::vector<InterfererSpec> interferers;
    std::optional<double> noise_power_db = 0.0;
    std::uint64_t seed = 0;

    void validate() const {
        grid.validate();
        for (const auto& spec : interferers) spec.validate(grid);
        if (noise_power_db && !std::isfinite(*noise_power_db))
            throw InvalidInputError("Scenario: noise_power_db must be finite");
    }
};

namespace scenario_detail {

/// Round a complex double to 32-bit float precision. Generated samples are
/// quantized at the source so that writing them to the 32-bit IQ file format
/// and reading them back is bit-exact, and every pipeline sees exactly the
/// samples a file-based run would see.
inline std::complex<double> quantize_f32(std::complex<double> z) {
    return {static_cast<double>(static_cast<float>(z.real())),
            static_cast<double>(static_cast<float>(z.imag()))};
}

inline double sinc(double x) {
    if (x == 0.0) return 1.0;
    const double px = std::numbers::pi * x;
    return std::sin(px) / px;
}

}  // namespace scenario_detail

/// Generate one interferer's contribution alone (zeros outside its slots),
/// unquantized. Exposed so callers can verify that a full scene is the
/// sample-wise sum of its components generated with the same sub-seeds.
inline std::vector<std::complex<double>> generate_interferer(const GridConfig& grid,
                                                             const InterfererSpec& spec,
                                                             std::uint64_t sub_seed) {
    grid.validate();
    spec.validate(grid);
    const std::size_t n = grid.block_len;
    const std::size_t beta = grid.freqs_per_channel;
    const std::size_t gamma = grid.blocks_per_slot;
    const std::size_t total = n * grid.num_blocks;
    const std::size_t span_begin = spec.slot_start * gamma * n;          // first sample
    const std::size_t span_len = (spec.slot_end - spec.slot_start + 1) * gamma * n;
    const double power = std::pow(10.0, spec.power_db / 10.0);

    std::vector<std::complex<double>> x(total, std::complex<double>(0.0, 0.0));
    Rng rng(sub_seed);

    switch (spec.waveform) {
        case Waveform::kTone: {
            // On-bin complex exponential: lands exactly on one DFT bin of
            // every block, so its in-channel energy confinement is exact.
            const std::size_t bin =
                spec.channel * beta +
                static_cast<std::size_t>(spec.tone_offset * static_cast<double>(beta));
            const double amp = std::sqrt(power);
            const double w = 2.0 * std::numbers::pi * static_cast<double>(bin) /
                             static_cast<double>(n);
            for (std::size_t s = 0; s < span_len; ++s) {
                const double phase = w * static_cast<double>(span_begin + s);
                x[span_begin + s] = {amp * std::cos(phase), amp * std::sin(phase)};
            }
            break;
        }
        case Waveform::kRandomQpskLike: {
            // Random QPSK symbols at the channel's own Nyquist rate (N/beta
            // samples per symbol), shaped by a Hann-windowed sinc pulse
            // spanning four symbols, mixed to the channel's center frequency.
            // The pulse is wider than one symbol, so a controlled fraction of
            // energy (< 10%) leaks outside the channel - this waveform is
            // approximately sparse, not exactly sparse.
            const std::size_t t_sym = n / beta;
            const std::size_t span_symbols = 4;
            const std::size_t half = span_symbols * t_sym / 2;
            std::vector<double> pulse(2 * half + 1);
            for (std::size_t i = 0; i < pulse.size(); ++i) {
                const double t = static_cast<double>(i) - static_cast<double>(half);
                const double hann =
                    0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(i) /
                                          static_cast<double>(half)));
                pulse[i] = scenario_detail::sinc(t / static_cast<double>(t_sym)) * hann;
            }
            std::vector<std::complex<double>> base(span_len, std::complex<double>(0.0, 0.0));
            const std::size_t nsym = (span_len + 2 * half + t_sym - 1) / t_sym;
            for (std::size_t k = 0; k < nsym; ++k) {
                const double angle = std::numbers::pi / 4.0 +
                                     std::numbers::pi / 2.0 * static_cast<double>(rng.below(4));
                const std::complex<double> sym{std::cos(angle), std::sin(angle)};
                // Symbol k's pulse peaks at sample k*t_sym - half of the span.
                const std::ptrdiff_t center =
                    static_cast<std::ptrdiff_t>(k * t_sym) - static_cast<std::ptrdiff_t>(half);
                const std::ptrdiff_t lo =
                    std::max<std::ptrdiff_t>(0, center - static_cast<std::ptrdiff_t>(half));
                const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(
                    static_cast<std::ptrdiff_t>(span_len) - 1,
                    center + static_cast<std::ptrdiff_t>(half));
                for (std::ptrdiff_t s = lo; s <= hi; ++s)
                    base[static_cast<std::size_t>(s)] +=
                        sym * pulse[static_cast<std::size_t>(s - center + static_cast<std::ptrdiff_t>(half))];
            }
            // Mix to the channel center (half-bin offset for even beta) with
            // phase continuous in absolute sample time.
            const double fc = static_cast<double>(spec.channel * beta) +
                              static_cast<double>(beta) / 2.0 - 0.5;
            const double w = 2.0 * std::numbers::pi * fc / static_cast<double>(n);
            double energy = 0.0;
            for (std::size_t s = 0; s < span_len; ++s) {
                const double phase = w * static_cast<double>(span_begin + s);
                base[s] *= std::complex<double>(std::cos(phase), std::sin(phase));
                energy += std::norm(base[s]);
            }
            const double mean_power = energy / static_cast<double>(span_len);
            const double scale = mean_power > 0.0 ? std::sqrt(power / mean_power) : 0.0;
            for (std::size_t s = 0; s < span_len; ++s) x[span_begin + s] = base[s] * scale;
            break;
        }
        case Waveform::kFilteredNoise: {
            // White Gaussian noise band-limited to the channel by frequency-
            // domain masking, drawn independently per block. Confinement to
            // the channel bins is exact.
            const double coeff_amp = std::sqrt(power * static_cast<double>(n) /
                                               static_cast<double>(beta));
            std::vector<std::complex<double>> coeffs(n);
            std::vector<std::complex<double>> block(n);
            const std::size_t first_block = spec.slot_start * gamma;
            const std::size_t last_block = (spec.slot_end + 1) * gamma;
            for (std::size_t l = first_block; l < last_block; ++l) {
                std::fill(coeffs.begin(), coeffs.end(), std::complex<double>(0.0, 0.0));
                for (std::size_t f = 0; f < beta; ++f)
                    coeffs[spec.channel * beta + f] = coeff_amp * rng.complex_gauss();
                fft_inverse(coeffs.data(), block.data(), n);
                for (std::size_t s = 0; s < n; ++s) x[l * n + s] = block[s];
            }
            break;
        }
    }
    return x;
}

/// Generate the noise floor alone (all samples), unquantized.
inline std::vector<std::complex<double>> generate_noise(const GridConfig& grid,
                                                        double noise_power_db,
                                                        std::uint64_t sub_seed) {
    grid.validate();
    const std::size_t total = grid.block_len * grid.num_blocks;
    const double amp = std::sqrt(std::pow(10.0, noise_power_db / 10.0));
    Rng rng(sub_seed);
    std::vector<std::complex<double>> x(total);
    for (std::size_t s = 0; s < total; ++s) x[s] = amp * rng.complex_gauss();
    return x;
}

/// Synthesize the full scene and its exact ground truth.
///
/// The sample stream is the sum of every interferer (sub-seeded by its list
/// position) plus the noise floor (its own sub-seed), quantized to 32-bit
/// float precision. The occupancy map marks exactly the (channel, slot) cells
/// covered by interferer spans. Deterministic given the scenario.
inline std::pair<IqRecording, OccupancyMap> generate(const Scenario& sc) {
    sc.validate();
    const std::size_t total = sc.grid.block_len * sc.grid.num_blocks;
    std::vector<std::complex<double>> sum(total, std::complex<double>(0.0, 0.0));
    for (std::size_t i = 0; i < sc.interferers.size(); ++i) {
        const auto part = generate_interferer(sc.grid, sc.interferers[i],
                                              derive_seed(sc.seed, "interferer", i));
        for (std::size_t s = 0; s < total; ++s) sum[s] += part[s];
    }
    if (sc.noise_power_db) {
        const auto noise = generate_noise(sc.grid, *sc.noise_power_db,
                                          derive_seed(sc.seed, "noise", 0));
        for (std::size_t s = 0; s < total; ++s) sum[s] += noise[s];
    }
    IqRecording rec;
    rec.samples.resize(total);
    for (std::size_t s = 0; s < total; ++s)
        rec.samples[s] = scenario_detail::quantize_f32(sum[s]);
    rec.sample_rate_hz = 1.0;  // normalized sample clock
    rec.center_freq_hz = 0.0;
    rec.seed = sc.seed;

    OccupancyMap truth;
    truth.num_channels = sc.grid.num_channels();
    truth.num_slots = sc.grid.num_slots();
    truth.flags.assign(truth.num_channels * truth.num_slots, false);
    truth.threshold_used = 0.0;
    for (const auto& spec : sc.interferers)
        for (std::size_t g = spec.slot_start; g <= spec.slot_end; ++g)
            truth.set(spec.channel, g, true);
    return {std::move(rec), std::move(truth)};
}

/// Write samples as interleaved little-endian 32-bit floats (I then Q, no
/// header) plus a UTF-8 key=value metadata sidecar.
inline void save_iq(const IqRecording& rec, const std::string& iq_path,
                    const std::string& metadata_path) {
    std::ofstream iq(iq_path, std::ios::binary | std::ios::trunc);
    if (!iq) throw IoError("save_iq: cannot open " + iq_path + " for writing");
    std::vector<float> buffer(rec.samples.size() * 2);
    for (std::size_t i = 0; i < rec.samples.size(); ++i) {
        buffer[2 * i] = static_cast<float>(rec.samples[i].real());
        buffer[2 * i + 1] = static_cast<float>(rec.samples[i].imag());
    }
    iq.write(reinterpret_cast<const char*>(buffer.data()),
             static_cast<std::streamsize>(buffer.size() * sizeof(float)));
    if (!iq) throw IoError("save_iq: write failed for " + iq_path);
    iq.close();

    std::ofstream meta(metadata_path, std::ios::trunc);
    if (!meta) throw IoError("save_iq: cannot open " + metadata_path + " for writing");
    meta << "sample_rate_hz=" << format_double(rec.sample_rate_hz) << "\n";
    meta << "center_freq_hz=" << format_double(rec.center_freq_hz) << "\n";
    meta << "num_samples=" << rec.samples.size() << "\n";
    if (rec.seed) meta << "seed=" << *rec.seed << "\n";
    if (!meta) throw IoError("save_iq: write failed for " + metadata_path);
}

/// Read an IQ file and its metadata sidecar back. Raises distinct errors for
/// an empty recording, a truncated sample, non-finite values, and unparsable
/// metadata.
inline IqRecording load_iq(const std::string& iq_path, const std::string& metadata_path) {
    std::ifstream iq(iq_path, std::ios::binary | std::ios::ate);
    if (!iq) throw IoError("load_iq: cannot open " + iq_path);
    const std::streamsize size = iq.tellg();
    if (size == 0) throw EmptyRecordingError("load_iq: empty recording: " + iq_path);
    if (size % static_cast<std::streamsize>(2 * sizeof(float)) != 0)
        throw TruncatedSampleError("load_iq: " + iq_path + " has " + std::to_string(size) +
                                   " bytes, not a multiple of one 8-byte complex sample");
    iq.seekg(0);
    std::vector<float> buffer(static_cast<std::size_t>(size) / sizeof(float));
    iq.read(reinterpret_cast<char*>(buffer.data()), size);
    if (!iq) throw IoError("load_iq: read failed for " + iq_path);

    IqRecording rec;
    rec.samples.resize(buffer.size() / 2);
    for (std::size_t i = 0; i < rec.samples.size(); ++i) {
        const float re = buffer[2 * i];
        const float im = buffer[2 * i + 1];
        if (!std::isfinite(re) || !std::isfinite(im))
            throw NonFiniteSampleError("load_iq: non-finite sample at index " + std::to_string(i));
        rec.samples[i] = {static_cast<double>(re), static_cast<double>(im)};
    }

    std::ifstream meta(metadata_path);
    if (!meta) throw IoError("load_iq: cannot open metadata " + metadata_path);
    bool saw_rate = false, saw_center = false, saw_count = false;
    std::uint64_t declared_count = 0;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(meta, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw MetadataParseError("load_iq: metadata line " + std::to_string(line_no) +
                                     " has no '=': " + line);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        try {
            std::size_t used = 0;
            if (key == "sample_rate_hz") {
                rec.sample_rate_hz = std::stod(value, &used);
                saw_rate = true;
            } else if (key == "center_freq_hz") {
                rec.center_freq_hz = std::stod(value, &used);
                saw_center = true;
            } else if (key == "num_samples") {
                declared_count = std::stoull(value, &used);
                saw_count = true;
            } else if (key == "seed") {
                rec.seed = std::stoull(value, &used);
            } else {
                throw MetadataParseError("load_iq: unknown metadata key: " + key);
            }
            if (used != value.size())
                throw MetadataParseError("load_iq: trailing junk in value for " + key);
        } catch (const MetadataParseError&) {
            throw;
        } catch (const std::exception&) {
            throw MetadataParseError("load_iq: cannot parse value for key " + key + ": " + value);
        }
    }
    if (!saw_rate || !saw_center || !saw_count)
        throw MetadataParseError(
            "load_iq: metadata must declare sample_rate_hz, center_freq_hz, num_samples");
    if (declared_count != rec.samples.size())
        throw MetadataParseError("load_iq: metadata declares " + std::to_string(declared_count) +
                                 " samples but the file holds " +
                                 std::to_string(rec.samples.size()));
    if (!(rec.sample_rate_hz > 0.0))
        throw MetadataParseError("load_iq: sample_rate_hz must be positive");
    return rec;
}

}  // namespace specsense
