#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "specsense/detection.hpp"
#include "specsense/errors.hpp"
#include "specsense/format.hpp"
#include "specsense/grid.hpp"
#include "specsense/measurement.hpp"
#include "specsense/metrics.hpp"
#include "specsense/recovery.hpp"
#include "specsense/rng.hpp"
#include "specsense/scenario.hpp"

namespace specsense {

/// How ground truth is established for scoring.
struct TruthMode {
    enum class Kind { kGenerator, kThresholdExplicit, kThresholdQuantile };
    Kind kind = Kind::kGenerator;
    double theta = 0.0;     ///< explicit threshold on the Nyquist power grid
    double quantile = 0.9;  ///< quantile of the Nyquist power grid values
};

/// External IQ input paths (alternative to a synthetic scenario).
struct IqInput {
    std::string samples_path;
    std::string metadata_path;
};

/// Full description of one experiment run.
struct ExperimentConfig {
    GridConfig grid;
    std::optional<Scenario> scenario;  ///< exactly one of scenario/iq is set
    std::optional<IqInput> iq;
    std::vector<double> ratios;
    std::vector<MethodKind> methods;
    TruthMode truth_mode;
    double target_tpr = 0.9;
    BpdnConfig bpdn;
    std::uint64_t seed = 0;
    std::string output_dir = "out";

    void validate() const {
        grid.validate();
        if (scenario.has_value() == iq.has_value())
            throw InvalidInputError(
                "ExperimentConfig: exactly one of 'scenario' or 'iq' must be given");
        if (scenario) scenario->validate();
        if (ratios.empty()) throw InvalidInputError("ExperimentConfig: ratios must be non-empty");
        for (double r : ratios)
            if (!(r > 0.0) || r > 1.0)
                throw InvalidInputError("ExperimentConfig: every ratio must lie in (0, 1]");
        if (methods.empty())
            throw InvalidInputError("ExperimentConfig: at least one method is required");
        if (!(target_tpr > 0.0 && target_tpr <= 1.0))
            throw InvalidInputError("ExperimentConfig: target_tpr must lie in (0, 1]");
        bpdn.validate();
        if (iq && truth_mode.kind == TruthMode::Kind::kGenerator)
            throw InvalidInputError(
                "ExperimentConfig: generator truth requires a synthetic scenario; "
                "use threshold truth for ingested IQ");
        if (iq && bpdn.epsilon_mode == BpdnConfig::EpsilonMode::kNoiseScaled)
            throw InvalidInputError(
                "ExperimentConfig: noise-scaled epsilon requires a synthetic scenario "
                "(noise level unknown for ingested IQ); set an explicit epsilon");
    }
};

/// Summary scores of one (method, ratio) run.
struct DetectionReport {
    MethodKind method = MethodKind::kTranspose;
    double ratio = 1.0;
    double wasted_fraction = 0.0;
    double auc = 0.0;
    double mean_block_time_s = 0.0;
    double median_block_time_s = 0.0;
    std::uint64_t seed = 0;
    DetectionCounts counts;  ///< at the target-tpr operating point
    double theta_prime = 0.0;
};

/// Everything produced for one (method, ratio) pair.
struct MethodRunRecord {
    MethodKind method = MethodKind::kTranspose;
    double ratio = 1.0;
    RocCurve curve;
    DetectionReport report;
    PowerGrid estimate;
    std::vector<double> block_time_s;
    std::vector<SolverBlockInfo> solver_info;
};

/// In-memory result of a sweep, mirrored exactly by the CSV outputs.
struct SweepResult {
    std::vector<MethodRunRecord> records;  ///< method-major, ratio-minor, config order
    OccupancyMap truth;
    PowerGrid nyquist_grid;  ///< Nyquist-rate power grid of the analyzed samples
};

namespace experiment_detail {

inline nlohmann::json require_key(const nlohmann::json& obj, const std::string& key,
                                  const std::string& context) {
    if (!obj.contains(key))
        throw InvalidInputError("config: missing key '" + key + "' in " + context);
    return obj.at(key);
}

}  // namespace experiment_detail

/// Parse an experiment config from JSON text. Keys are documented in the
/// README; unknown keys are rejected so typos cannot silently change a run.
inline ExperimentConfig parse_config(const std::string& json_text) {
    using nlohmann::json;
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw InvalidInputError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!root.is_object()) throw InvalidInputError("config: top level must be an object");

    static const std::vector<std::string> known_top = {
        "grid", "scenario", "iq", "ratios", "methods", "truth_mode",
        "target_tpr", "bpdn", "seed", "output_dir"};
    for (const auto& [key, value] : root.items()) {
        (void)value;
        bool known = false;
        for (const auto& k : known_top) known = known || k == key;
        if (!known) throw InvalidInputError("config: unknown key '" + key + "'");
    }

    ExperimentConfig cfg;
    try {
        const json grid = experiment_detail::require_key(root, "grid", "top level");
        cfg.grid.block_len = experiment_detail::require_key(grid, "block_len", "grid").get<std::size_t>();
        cfg.grid.freqs_per_channel =
            experiment_detail::require_key(grid, "freqs_per_channel", "grid").get<std::size_t>();
        cfg.grid.blocks_per_slot =
            experiment_detail::require_key(grid, "blocks_per_slot", "grid").get<std::size_t>();
        cfg.grid.num_blocks =
            experiment_detail::require_key(grid, "num_blocks", "grid").get<std::size_t>();

        if (root.contains("seed")) cfg.seed = root.at("seed").get<std::uint64_t>();

        if (root.contains("scenario")) {
            const json sc_json = root.at("scenario");
            Scenario sc;
            sc.grid = cfg.grid;
            sc.seed = cfg.seed;
            const json noise = experiment_detail::require_key(sc_json, "noise_power_db", "scenario");
            if (noise.is_string()) {
                if (noise.get<std::string>() != "off")
                    throw InvalidInputError(
                        "config: scenario.noise_power_db must be a number or \"off\"");
                sc.noise_power_db.reset();
            } else {
                sc.noise_power_db = noise.get<double>();
            }
            for (const json& spec_json :
                 experiment_detail::require_key(sc_json, "interferers", "scenario")) {
                InterfererSpec spec;
                spec.channel =
                    experiment_detail::require_key(spec_json, "channel", "interferer").get<std::size_t>();
                spec.slot_start = experiment_detail::require_key(spec_json, "slot_start", "interferer")
                                      .get<std::size_t>();
                spec.slot_end =
                    experiment_detail::require_key(spec_json, "slot_end", "interferer").get<std::size_t>();
                spec.power_db =
                    experiment_detail::require_key(spec_json, "power_db", "interferer").get<double>();
                spec.waveform = waveform_from_name(
                    experiment_detail::require_key(spec_json, "waveform", "interferer")
                        .get<std::string>());
                if (spec_json.contains("tone_offset"))
                    spec.tone_offset = spec_json.at("tone_offset").get<double>();
                sc.interferers.push_back(spec);
            }
            cfg.scenario = std::move(sc);
        }
        if (root.contains("iq")) {
            const json iq_json = root.at("iq");
            IqInput input;
            input.samples_path =
                experiment_detail::require_key(iq_json, "samples", "iq").get<std::string>();
            input.metadata_path =
                experiment_detail::require_key(iq_json, "metadata", "iq").get<std::string>();
            cfg.iq = std::move(input);
        }

        for (const json& r : experiment_detail::require_key(root, "ratios", "top level"))
            cfg.ratios.push_back(r.get<double>());
        for (const json& m : experiment_detail::require_key(root, "methods", "top level"))
            cfg.methods.push_back(method_from_name(m.get<std::string>()));

        if (root.contains("truth_mode")) {
            const json tm = root.at("truth_mode");
            const std::string mode =
                experiment_detail::require_key(tm, "mode", "truth_mode").get<std::string>();
            if (mode == "generator") {
                cfg.truth_mode.kind = TruthMode::Kind::kGenerator;
            } else if (mode == "threshold") {
                if (tm.contains("theta")) {
                    cfg.truth_mode.kind = TruthMode::Kind::kThresholdExplicit;
                    cfg.truth_mode.theta = tm.at("theta").get<double>();
                } else if (tm.contains("quantile")) {
                    cfg.truth_mode.kind = TruthMode::Kind::kThresholdQuantile;
                    cfg.truth_mode.quantile = tm.at("quantile").get<double>();
                } else {
                    throw InvalidInputError(
                        "config: threshold truth_mode needs 'theta' or 'quantile'");
                }
            } else {
                throw InvalidInputError("config: truth_mode.mode must be generator or threshold");
            }
        }

        if (root.contains("target_tpr")) cfg.target_tpr = root.at("target_tpr").get<double>();

        if (root.contains("bpdn")) {
            const json bp = root.at("bpdn");
            if (bp.contains("epsilon_mode")) {
                const std::string mode = bp.at("epsilon_mode").get<std::string>();
                if (mode == "explicit")
                    cfg.bpdn.epsilon_mode = BpdnConfig::EpsilonMode::kExplicit;
                else if (mode == "noise_scaled")
                    cfg.bpdn.epsilon_mode = BpdnConfig::EpsilonMode::kNoiseScaled;
                else
                    throw InvalidInputError(
                        "config: bpdn.epsilon_mode must be explicit or noise_scaled");
            }
            if (bp.contains("epsilon")) cfg.bpdn.epsilon = bp.at("epsilon").get<double>();
            if (bp.contains("noise_factor"))
                cfg.bpdn.noise_factor = bp.at("noise_factor").get<double>();
            if (bp.contains("max_outer_iters"))
                cfg.bpdn.max_outer_iters = bp.at("max_outer_iters").get<int>();
            if (bp.contains("max_inner_iters"))
                cfg.bpdn.max_inner_iters = bp.at("max_inner_iters").get<int>();
            if (bp.contains("rel_tol")) cfg.bpdn.rel_tol = bp.at("rel_tol").get<double>();
            if (bp.contains("feasibility_slack"))
                cfg.bpdn.feasibility_slack = bp.at("feasibility_slack").get<double>();
        }

        if (root.contains("output_dir")) cfg.output_dir = root.at("output_dir").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInputError(std::string("config: ") + e.what());
    }

    // The documented environment override for the output location.
    if (const char* env = std::getenv("OUTPUT_DIR"); env && *env) cfg.output_dir = env;

    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("config: cannot open " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

/// Serialize the fully resolved config back to JSON (the manifest core).
inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    using nlohmann::json;
    json root;
    root["grid"] = {{"block_len", cfg.grid.block_len},
                    {"freqs_per_channel", cfg.grid.freqs_per_channel},
                    {"blocks_per_slot", cfg.grid.blocks_per_slot},
                    {"num_blocks", cfg.grid.num_blocks}};
    if (cfg.scenario) {
        json interferers = json::array();
        for (const auto& spec : cfg.scenario->interferers) {
            json j = {{"channel", spec.channel},
                      {"slot_start", spec.slot_start},
                      {"slot_end", spec.slot_end},
                      {"power_db", spec.power_db},
                      {"waveform", waveform_name(spec.waveform)}};
            if (spec.waveform == Waveform::kTone) j["tone_offset"] = spec.tone_offset;
            interferers.push_back(j);
        }
        json sc = {{"interferers", interferers}, {"seed", cfg.scenario->seed}};
        if (cfg.scenario->noise_power_db)
            sc["noise_power_db"] = *cfg.scenario->noise_power_db;
        else
            sc["noise_power_db"] = "off";
        root["scenario"] = sc;
    }
    if (cfg.iq)
        root["iq"] = {{"samples", cfg.iq->samples_path}, {"metadata", cfg.iq->metadata_path}};
    root["ratios"] = cfg.ratios;
    json methods = nlohmann::json::array();
    for (const auto m : cfg.methods) methods.push_back(method_name(m));
    root["methods"] = methods;
    switch (cfg.truth_mode.kind) {
        case TruthMode::Kind::kGenerator:
            root["truth_mode"] = {{"mode", "generator"}};
            break;
        case TruthMode::Kind::kThresholdExplicit:
            root["truth_mode"] = {{"mode", "threshold"}, {"theta", cfg.truth_mode.theta}};
            break;
        case TruthMode::Kind::kThresholdQuantile:
            root["truth_mode"] = {{"mode", "threshold"}, {"quantile", cfg.truth_mode.quantile}};
            break;
    }
    root["target_tpr"] = cfg.target_tpr;
    root["bpdn"] = {
        {"epsilon_mode",
         cfg.bpdn.epsilon_mode == BpdnConfig::EpsilonMode::kExplicit ? "explicit" : "noise_scaled"},
        {"epsilon", cfg.bpdn.epsilon},
        {"noise_factor", cfg.bpdn.noise_factor},
        {"max_outer_iters", cfg.bpdn.max_outer_iters},
        {"max_inner_iters", cfg.bpdn.max_inner_iters},
        {"rel_tol", cfg.bpdn.rel_tol},
        {"feasibility_slack", cfg.bpdn.feasibility_slack}};
    root["seed"] = cfg.seed;
    root["output_dir"] = cfg.output_dir;
    return root;
}

/// Run the full sweep in memory: resolve the input samples and ground truth,
/// then for every configured ratio measure each block with its own seeded
/// operator and score every configured method against the truth.
///
/// All randomness derives from (seed, ratio index, block index), so results
/// do not depend on evaluation order. Solver non-convergence on a block is
/// recorded in that record's solver_info, never thrown.
inline SweepResult run_sweep(const ExperimentConfig& cfg) {
    cfg.validate();

    // Resolve samples and noise scale.
    std::vector<std::complex<double>> samples;
    OccupancyMap generator_truth;
    double sigma = 0.0;
    if (cfg.scenario) {
        Scenario sc = *cfg.scenario;
        sc.seed = cfg.seed;
        auto [rec, truth] = generate(sc);
        samples = std::move(rec.samples);
        generator_truth = std::move(truth);
        if (sc.noise_power_db) sigma = std::sqrt(std::pow(10.0, *sc.noise_power_db / 10.0));
    } else {
        IqRecording rec = load_iq(cfg.iq->samples_path, cfg.iq->metadata_path);
        if (rec.samples.size() != cfg.grid.block_len * cfg.grid.num_blocks)
            throw InvalidInputError(
                "run_sweep: recording length does not match grid (need block_len*num_blocks = " +
                std::to_string(cfg.grid.block_len * cfg.grid.num_blocks) + " samples, got " +
                std::to_string(rec.samples.size()) + ")");
        samples = std::move(rec.samples);
    }

    SweepResult result;
    result.nyquist_grid = grid_power(stft(samples, cfg.grid), cfg.grid);

    // Ground truth.
    switch (cfg.truth_mode.kind) {
        case TruthMode::Kind::kGenerator:
            result.truth = std::move(generator_truth);
            break;
        case TruthMode::Kind::kThresholdExplicit:
            result.truth = threshold_occupancy(result.nyquist_grid, cfg.truth_mode.theta);
            break;
        case TruthMode::Kind::kThresholdQuantile:
            result.truth = threshold_occupancy(
                result.nyquist_grid,
                quantile_threshold(result.nyquist_grid, cfg.truth_mode.quantile));
            break;
    }

    // Method-major, ratio-minor, in config order.
    for (const MethodKind method : cfg.methods) {
        for (std::size_t ri = 0; ri < cfg.ratios.size(); ++ri) {
            const double ratio = cfg.ratios[ri];
            const std::size_t m = measurements_for_ratio(cfg.grid.block_len, ratio);
            const std::uint64_t ratio_seed = derive_seed(cfg.seed, "ratio", ri);
            std::vector<MeasurementOp> ops;
            ops.reserve(cfg.grid.num_blocks);
            for (std::size_t l = 0; l < cfg.grid.num_blocks; ++l)
                ops.push_back(build_op(cfg.grid.block_len, m, ratio_seed, l));
            const Measurements meas = measure_blocks(samples, ops);

            MethodEstimate est =
                estimate_power_grid(method, meas, ops, cfg.grid, cfg.bpdn, sigma);

            MethodRunRecord record;
            record.method = method;
            record.ratio = ratio;
            record.curve = roc(result.truth, est.grid);
            record.report.method = method;
            record.report.ratio = ratio;
            record.report.seed = cfg.seed;
            record.report.wasted_fraction = wasted_fraction_at(record.curve, cfg.target_tpr);
            record.report.auc = auc(record.curve);
            record.report.counts = counts_at_target(result.truth, est.grid, record.curve,
                                                    cfg.target_tpr, &record.report.theta_prime);
            record.report.mean_block_time_s = mean(est.block_time_s);
            record.report.median_block_time_s = median(est.block_time_s);
            record.estimate = std::move(est.grid);
            record.block_time_s = std::move(est.block_time_s);
            record.solver_info = std::move(est.solver_info);
            result.records.push_back(std::move(record));
        }
    }
    return result;
}

/// Serialize a sweep's outputs: roc.csv, summary.csv, timing.csv, solver.csv,
/// and manifest.json in the output directory. Numeric CSV fields round-trip
/// losslessly. timing.csv holds measured wall times and is the only output
/// that varies between identical runs; everything else is byte-identical for
/// a fixed (config, seed).
inline void write_sweep_outputs(const ExperimentConfig& cfg, const SweepResult& result) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    const fs::path dir(cfg.output_dir);

    const auto open = [](const fs::path& path) {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw IoError("cannot open " + path.string() + " for writing");
        return out;
    };

    {
        std::ofstream out = open(dir / "roc.csv");
        out << "method,ratio,threshold,tpr,fpr\n";
        for (const auto& record : result.records)
            for (const auto& point : record.curve.points)
                out << method_name(record.method) << ',' << format_double(record.ratio) << ','
                    << format_double(point.threshold) << ',' << format_double(point.tpr) << ','
                    << format_double(point.fpr) << '\n';
        if (!out) throw IoError("write failed for roc.csv");
    }
    {
        std::ofstream out = open(dir / "summary.csv");
        out << "method,ratio,wasted_fraction,auc,tp,fp,tn,fn,theta_prime\n";
        for (const auto& record : result.records) {
            const auto& rep = record.report;
            out << method_name(record.method) << ',' << format_double(record.ratio) << ','
                << format_double(rep.wasted_fraction) << ',' << format_double(rep.auc) << ','
                << rep.counts.true_positives << ',' << rep.counts.false_positives << ','
                << rep.counts.true_negatives << ',' << rep.counts.false_negatives << ','
                << format_double(rep.theta_prime) << '\n';
        }
        if (!out) throw IoError("write failed for summary.csv");
    }
    {
        std::ofstream out = open(dir / "timing.csv");
        out << "method,ratio,block_index,wall_time_s\n";
        for (const auto& record : result.records)
            for (std::size_t l = 0; l < record.block_time_s.size(); ++l)
                out << method_name(record.method) << ',' << format_double(record.ratio) << ','
                    << l << ',' << format_double(record.block_time_s[l]) << '\n';
        if (!out) throw IoError("write failed for timing.csv");
    }
    {
        std::ofstream out = open(dir / "solver.csv");
        out << "method,ratio,block_index,iterations,residual_norm,l1_norm,converged\n";
        for (const auto& record : result.records)
            for (const auto& info : record.solver_info)
                out << method_name(record.method) << ',' << format_double(record.ratio) << ','
                    << info.block_index << ',' << info.iterations << ','
                    << format_double(info.residual_norm) << ',' << format_double(info.l1_norm)
                    << ',' << (info.converged ? 1 : 0) << '\n';
        if (!out) throw IoError("write failed for solver.csv");
    }
    {
        nlohmann::json manifest = config_to_json(cfg);
        manifest["notes"] = nlohmann::json::array(
            {"block count num_blocks=" + std::to_string(cfg.grid.num_blocks) +
             " is a desk-scale reduction; capture-scale studies use far larger streams"});
        std::ofstream out = open(dir / "manifest.json");
        out << manifest.dump(2) << '\n';
        if (!out) throw IoError("write failed for manifest.json");
    }
}

/// Convenience wrapper: run and write.
inline SweepResult run_and_write(const ExperimentConfig& cfg) {
    SweepResult result = run_sweep(cfg);
    write_sweep_outputs(cfg, result);
    return result;
}

}  // namespace specsense
