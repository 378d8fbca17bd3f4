#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "specsense/grid.hpp"
#include "specsense/scenario.hpp"
#include "helpers.hpp"

using namespace specsense;
using test_helpers::Cx;

namespace {

// Fraction of the stream's spectral energy that falls inside a channel's bins.
double channel_energy_fraction(const std::vector<Cx>& x, const GridConfig& grid,
                               std::size_t channel) {
    const Spectrogram spec = stft(x, grid);
    double in_channel = 0.0;
    double total = 0.0;
    for (std::size_t l = 0; l < spec.num_blocks; ++l) {
        for (std::size_t k = 0; k < spec.num_bins; ++k) {
            const double p = spec.at(k, l);
            total += p;
            if (k / grid.freqs_per_channel == channel) in_channel += p;
        }
    }
    REQUIRE(total > 0.0);
    return in_channel / total;
}

double total_energy(const std::vector<Cx>& x) {
    double acc = 0.0;
    for (const auto& v : x) acc += std::norm(v);
    return acc;
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("specsense_test_" + std::to_string(std::rand()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("interferer specs are validated against the grid") {
    GridConfig grid{.block_len = 64, .freqs_per_channel = 8, .blocks_per_slot = 2,
                    .num_blocks = 4};

    InterfererSpec bad_channel{.channel = 8, .slot_start = 0, .slot_end = 0};
    CHECK_THROWS_AS(bad_channel.validate(grid), InvalidInputError);

    InterfererSpec bad_slots{.channel = 0, .slot_start = 1, .slot_end = 0};
    CHECK_THROWS_AS(bad_slots.validate(grid), InvalidInputError);

    InterfererSpec slot_range{.channel = 0, .slot_start = 0, .slot_end = 2};
    CHECK_THROWS_AS(slot_range.validate(grid), InvalidInputError);

    InterfererSpec bad_offset{.channel = 0, .slot_start = 0, .slot_end = 1, .power_db = 0.0,
                              .waveform = Waveform::kTone, .tone_offset = 1.0};
    CHECK_THROWS_AS(bad_offset.validate(grid), InvalidInputError);
}

TEST_CASE("tone lands exactly on its in-channel bin") {
    GridConfig grid{.block_len = 64, .freqs_per_channel = 8, .blocks_per_slot = 1,
                    .num_blocks = 1};
    InterfererSpec spec{.channel = 3, .slot_start = 0, .slot_end = 0, .power_db = 0.0,
                        .waveform = Waveform::kTone, .tone_offset = 0.25};
    const auto x = generate_interferer(grid, spec, 7);
    const Spectrogram s = stft(x, grid);
    // offset 0.25 of an 8-bin channel starting at bin 24 -> bin 26
    for (std::size_t k = 0; k < 64; ++k) {
        if (k == 26)
            CHECK(s.at(k, 0) > 1.0);
        else
            CHECK(s.at(k, 0) < 1e-18);
    }
}

TEST_CASE("tone interferer keeps at least 99 percent of its energy in channel") {
    GridConfig grid{.block_len = 1024, .freqs_per_channel = 8, .blocks_per_slot = 4,
                    .num_blocks = 4};
    InterfererSpec spec{.channel = 10, .slot_start = 0, .slot_end = 0, .power_db = -6.0,
                        .waveform = Waveform::kTone, .tone_offset = 0.6};
    const auto x = generate_interferer(grid, spec, 42);
    CHECK(channel_energy_fraction(x, grid, spec.channel) >= 0.99);

    // Per-sample average power over the active span matches the spec.
    const double power = std::pow(10.0, spec.power_db / 10.0);
    const double span_samples = 4.0 * 1024.0;
    CHECK(total_energy(x) == Catch::Approx(power * span_samples).epsilon(1e-9));
}

TEST_CASE("random QPSK-like interferer is approximately channel-confined") {
    // Full-slot span (64 blocks): short spans are dominated by pulse edge
    // effects and their confinement varies too much to pin down.
    GridConfig grid{.block_len = 1024, .freqs_per_channel = 8, .blocks_per_slot = 64,
                    .num_blocks = 64};
    InterfererSpec spec{.channel = 60, .slot_start = 0, .slot_end = 0, .power_db = -9.0,
                        .waveform = Waveform::kRandomQpskLike};
    const auto x = generate_interferer(grid, spec, 5);

    const double fraction = channel_energy_fraction(x, grid, spec.channel);
    CHECK(fraction >= 0.85);   // confinement contract
    CHECK(fraction <= 0.995);  // deliberately approximate: leakage must exist

    const double power = std::pow(10.0, spec.power_db / 10.0);
    const double span_samples = 64.0 * 1024.0;
    CHECK(total_energy(x) == Catch::Approx(power * span_samples).epsilon(1e-9));
}

TEST_CASE("filtered-noise interferer is exactly channel-confined") {
    GridConfig grid{.block_len = 256, .freqs_per_channel = 8, .blocks_per_slot = 4,
                    .num_blocks = 8};
    InterfererSpec spec{.channel = 20, .slot_start = 1, .slot_end = 1, .power_db = -3.0,
                        .waveform = Waveform::kFilteredNoise};
    const auto x = generate_interferer(grid, spec, 11);
    CHECK(channel_energy_fraction(x, grid, spec.channel) >= 1.0 - 1e-12);

    // Zero outside the active slot span.
    for (std::size_t s = 0; s < 4 * 256; ++s) CHECK(std::norm(x[s]) == 0.0);
    for (std::size_t s = 2 * 4 * 256; s < x.size(); ++s) CHECK(std::norm(x[s]) == 0.0);
}

TEST_CASE("noise floor has the requested average power") {
    GridConfig grid{.block_len = 1024, .freqs_per_channel = 8, .blocks_per_slot = 8,
                    .num_blocks = 64};
    const auto x = generate_noise(grid, 0.0, 99);  // 65536 samples at 0 dB
    const double mean_power = total_energy(x) / static_cast<double>(x.size());
    CHECK(mean_power == Catch::Approx(1.0).margin(0.03));

    const auto x_quiet = generate_noise(grid, -10.0, 99);
    const double quiet_power = total_energy(x_quiet) / static_cast<double>(x_quiet.size());
    CHECK(quiet_power == Catch::Approx(0.1).margin(0.003));
}

TEST_CASE("a scene is the sample-wise sum of its separately generated parts") {
    GridConfig grid{.block_len = 128, .freqs_per_channel = 8, .blocks_per_slot = 2,
                    .num_blocks = 4};
    Scenario sc;
    sc.grid = grid;
    sc.noise_power_db = -3.0;
    sc.seed = 1234;
    sc.interferers = {
        {.channel = 2, .slot_start = 0, .slot_end = 1, .power_db = 0.0,
         .waveform = Waveform::kTone, .tone_offset = 0.5},
        {.channel = 9, .slot_start = 1, .slot_end = 1, .power_db = -6.0,
         .waveform = Waveform::kFilteredNoise},
    };
    const auto [rec, truth] = generate(sc);

    std::vector<Cx> manual(rec.samples.size(), Cx(0.0, 0.0));
    for (std::size_t i = 0; i < sc.interferers.size(); ++i) {
        const auto part =
            generate_interferer(grid, sc.interferers[i], derive_seed(sc.seed, "interferer", i));
        for (std::size_t s = 0; s < manual.size(); ++s) manual[s] += part[s];
    }
    const auto noise = generate_noise(grid, *sc.noise_power_db, derive_seed(sc.seed, "noise", 0));
    for (std::size_t s = 0; s < manual.size(); ++s) manual[s] += noise[s];

    for (std::size_t s = 0; s < manual.size(); ++s) {
        // volatile forces the narrowing to really round; at -O3 the host
        // compiler otherwise deletes a plain double->float->double cast pair
        // in this translation unit, leaving the unrounded double behind.
        volatile float re32 = static_cast<float>(manual[s].real());
        volatile float im32 = static_cast<float>(manual[s].imag());
        const Cx quantized{static_cast<double>(re32), static_cast<double>(im32)};
        REQUIRE(rec.samples[s] == quantized);  // bit-exact compositionality
    }
}

TEST_CASE("generation is deterministic in the seed") {
    Scenario sc;
    sc.grid = {.block_len = 128, .freqs_per_channel = 8, .blocks_per_slot = 2, .num_blocks = 4};
    sc.noise_power_db = 0.0;
    sc.seed = 77;
    sc.interferers = {{.channel = 4, .slot_start = 0, .slot_end = 1, .power_db = -3.0,
                       .waveform = Waveform::kRandomQpskLike}};

    const auto [rec_a, truth_a] = generate(sc);
    const auto [rec_b, truth_b] = generate(sc);
    REQUIRE(rec_a.samples == rec_b.samples);
    REQUIRE(truth_a.flags == truth_b.flags);

    Scenario other = sc;
    other.seed = 78;
    const auto [rec_c, truth_c] = generate(other);
    CHECK(rec_a.samples != rec_c.samples);
}

TEST_CASE("ground truth marks exactly the spanned cells") {
    Scenario sc;
    sc.grid = {.block_len = 64, .freqs_per_channel = 8, .blocks_per_slot = 1, .num_blocks = 5};
    sc.noise_power_db = 0.0;
    sc.seed = 3;
    sc.interferers = {
        {.channel = 1, .slot_start = 1, .slot_end = 3, .power_db = 0.0,
         .waveform = Waveform::kTone},
        {.channel = 6, .slot_start = 4, .slot_end = 4, .power_db = 0.0,
         .waveform = Waveform::kFilteredNoise},
    };
    const auto [rec, truth] = generate(sc);
    REQUIRE(truth.num_channels == 8);
    REQUIRE(truth.num_slots == 5);
    std::size_t occupied = 0;
    for (std::size_t b = 0; b < 8; ++b)
        for (std::size_t g = 0; g < 5; ++g)
            if (truth.at(b, g)) ++occupied;
    CHECK(occupied == 4);
    CHECK(truth.at(1, 1));
    CHECK(truth.at(1, 2));
    CHECK(truth.at(1, 3));
    CHECK(truth.at(6, 4));
    CHECK_FALSE(truth.at(1, 0));
    CHECK_FALSE(truth.at(1, 4));
    CHECK_FALSE(truth.at(6, 3));
}

TEST_CASE("generator truth equals thresholding the Nyquist power grid") {
    // With exactly channel-confined waveforms and the noise floor off, any
    // threshold between zero and the weakest occupied cell reproduces the
    // generator's truth exactly.
    Scenario sc;
    sc.grid = {.block_len = 256, .freqs_per_channel = 8, .blocks_per_slot = 4, .num_blocks = 12};
    sc.noise_power_db.reset();
    sc.seed = 21;
    sc.interferers = {
        {.channel = 3, .slot_start = 0, .slot_end = 1, .power_db = -6.0,
         .waveform = Waveform::kTone, .tone_offset = 0.3},
        {.channel = 17, .slot_start = 2, .slot_end = 2, .power_db = -12.0,
         .waveform = Waveform::kFilteredNoise},
        {.channel = 30, .slot_start = 0, .slot_end = 2, .power_db = -9.0,
         .waveform = Waveform::kFilteredNoise},
    };
    const auto [rec, truth] = generate(sc);
    const PowerGrid grid = grid_power(stft(rec.samples, sc.grid), sc.grid);

    double weakest_occupied = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < truth.num_channels; ++b)
        for (std::size_t g = 0; g < truth.num_slots; ++g)
            if (truth.at(b, g)) weakest_occupied = std::min(weakest_occupied, grid.at(b, g));
    REQUIRE(weakest_occupied > 0.0);

    const OccupancyMap derived = threshold_occupancy(grid, weakest_occupied * 0.5);
    REQUIRE(derived.flags == truth.flags);
}

TEST_CASE("IQ round trip through the 32-bit file format is bit-exact") {
    Scenario sc;
    sc.grid = {.block_len = 128, .freqs_per_channel = 8, .blocks_per_slot = 2, .num_blocks = 4};
    sc.noise_power_db = 0.0;
    sc.seed = 5150;
    sc.interferers = {{.channel = 7, .slot_start = 0, .slot_end = 1, .power_db = -3.0,
                       .waveform = Waveform::kRandomQpskLike}};
    const auto [rec, truth] = generate(sc);

    TempDir tmp;
    const std::string iq_path = (tmp.path / "rt.iq").string();
    const std::string meta_path = (tmp.path / "rt.meta").string();
    save_iq(rec, iq_path, meta_path);
    const IqRecording loaded = load_iq(iq_path, meta_path);

    REQUIRE(loaded.samples.size() == rec.samples.size());
    for (std::size_t i = 0; i < rec.samples.size(); ++i)
        REQUIRE(loaded.samples[i] == rec.samples[i]);  // exact, not approximate
    CHECK(loaded.sample_rate_hz == rec.sample_rate_hz);
    CHECK(loaded.center_freq_hz == rec.center_freq_hz);
    REQUIRE(loaded.seed.has_value());
    CHECK(*loaded.seed == sc.seed);
}

TEST_CASE("IQ loader reports distinct failures") {
    TempDir tmp;
    const auto write_file = [&](const std::string& name, const std::string& bytes) {
        std::ofstream out(tmp.path / name, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        return (tmp.path / name).string();
    };
    const std::string good_meta = write_file(
        "good.meta", "sample_rate_hz=1\ncenter_freq_hz=0\nnum_samples=1\n");

    SECTION("missing file") {
        CHECK_THROWS_AS(load_iq((tmp.path / "absent.iq").string(), good_meta), IoError);
    }
    SECTION("empty recording") {
        const std::string path = write_file("empty.iq", "");
        CHECK_THROWS_AS(load_iq(path, good_meta), EmptyRecordingError);
    }
    SECTION("truncated sample") {
        const std::string path = write_file("trunc.iq", std::string(6, '\0'));
        CHECK_THROWS_AS(load_iq(path, good_meta), TruncatedSampleError);
    }
    SECTION("non-finite sample") {
        float values[2] = {std::numeric_limits<float>::infinity(), 0.0f};
        std::string bytes(reinterpret_cast<const char*>(values), sizeof(values));
        const std::string path = write_file("inf.iq", bytes);
        CHECK_THROWS_AS(load_iq(path, good_meta), NonFiniteSampleError);
    }
    SECTION("metadata failures") {
        float values[2] = {1.0f, -1.0f};
        std::string bytes(reinterpret_cast<const char*>(values), sizeof(values));
        const std::string iq = write_file("ok.iq", bytes);

        const std::string no_eq = write_file("a.meta", "sample_rate_hz 1\n");
        CHECK_THROWS_AS(load_iq(iq, no_eq), MetadataParseError);

        const std::string unknown = write_file(
            "b.meta", "sample_rate_hz=1\ncenter_freq_hz=0\nnum_samples=1\ncolor=blue\n");
        CHECK_THROWS_AS(load_iq(iq, unknown), MetadataParseError);

        const std::string missing = write_file("c.meta", "sample_rate_hz=1\n");
        CHECK_THROWS_AS(load_iq(iq, missing), MetadataParseError);

        const std::string wrong_count = write_file(
            "d.meta", "sample_rate_hz=1\ncenter_freq_hz=0\nnum_samples=2\n");
        CHECK_THROWS_AS(load_iq(iq, wrong_count), MetadataParseError);

        const std::string bad_value = write_file(
            "e.meta", "sample_rate_hz=fast\ncenter_freq_hz=0\nnum_samples=1\n");
        CHECK_THROWS_AS(load_iq(iq, bad_value), MetadataParseError);
    }
}
