// Command-line front end for the spectrum-sensing toolkit.
//
// Subcommands:
//   generate   scenario -> IQ recording + metadata + ground-truth CSV
//   sense      one (ratio, method): print the estimated power grid as CSV
//   sweep      full ratio x method sweep -> roc/summary/timing/solver CSVs
//   rip-check  small-n restricted-isometry table for the sensing operator
//   bench      per-block wall-time comparison of the methods at one ratio
//
// Exit codes: 0 success, 1 runtime failure (I/O, malformed data files),
// 2 usage or configuration errors.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specsense/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::vector<double> ratios;
    std::vector<std::string> methods;
};

// Load the config file and fold in command-line overrides
// (--seed, --out, --ratios, --method).
specsense::ExperimentConfig resolve_config(const CommonArgs& args) {
    specsense::ExperimentConfig cfg = specsense::load_config(args.config_path);
    if (args.seed) {
        cfg.seed = *args.seed;
        if (cfg.scenario) cfg.scenario->seed = *args.seed;
    }
    if (args.out) cfg.output_dir = *args.out;
    if (!args.ratios.empty()) cfg.ratios = args.ratios;
    if (!args.methods.empty()) {
        cfg.methods.clear();
        for (const auto& name : args.methods)
            cfg.methods.push_back(specsense::method_from_name(name));
    }
    cfg.validate();
    return cfg;
}

void add_common_flags(CLI::App* cmd, CommonArgs& args, bool ratios_and_method) {
    cmd->add_option("--config", args.config_path, "Path to the JSON config file")
        ->required();
    cmd->add_option("--seed", args.seed, "Override the config seed");
    cmd->add_option("--out", args.out,
                    "Output directory (overrides config and the OUTPUT_DIR variable)");
    if (ratios_and_method) {
        cmd->add_option("--ratios", args.ratios,
                        "Override compression ratios (comma separated)")
            ->delimiter(',');
        cmd->add_option("--method", args.methods,
                        "Override methods (repeatable: l1_full, transpose, channel_test)");
    }
}

int cmd_generate(const CommonArgs& args) {
    specsense::ExperimentConfig cfg = resolve_config(args);
    if (!cfg.scenario) {
        std::cerr << "generate: config must describe a synthetic scenario\n";
        return kExitUsage;
    }
    auto [recording, truth] = specsense::generate(*cfg.scenario);

    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    const fs::path dir(cfg.output_dir);
    specsense::save_iq(recording, (dir / "recording.iq").string(),
                       (dir / "recording.meta").string());

    std::ofstream truth_csv(dir / "truth.csv", std::ios::trunc);
    if (!truth_csv) throw specsense::IoError("generate: cannot write truth.csv");
    truth_csv << "channel,slot,occupied\n";
    for (std::size_t b = 0; b < truth.num_channels; ++b)
        for (std::size_t g = 0; g < truth.num_slots; ++g)
            truth_csv << b << ',' << g << ',' << (truth.at(b, g) ? 1 : 0) << '\n';
    if (!truth_csv) throw specsense::IoError("generate: write failed for truth.csv");

    nlohmann::json manifest = specsense::config_to_json(cfg);
    std::ofstream manifest_out(dir / "manifest.json", std::ios::trunc);
    if (!manifest_out) throw specsense::IoError("generate: cannot write manifest.json");
    manifest_out << manifest.dump(2) << '\n';

    std::cerr << "wrote " << (dir / "recording.iq").string() << " ("
              << recording.samples.size() << " samples), recording.meta, truth.csv\n";
    return kExitOk;
}

int cmd_sense(const CommonArgs& args) {
    specsense::ExperimentConfig cfg = resolve_config(args);
    if (cfg.ratios.size() != 1 || cfg.methods.size() != 1) {
        std::cerr << "sense: exactly one ratio and one method are required "
                     "(use --ratios and --method)\n";
        return kExitUsage;
    }
    specsense::SweepResult result = specsense::run_sweep(cfg);
    const specsense::MethodRunRecord& record = result.records.front();

    std::cout << "channel,slot,power\n";
    for (std::size_t b = 0; b < record.estimate.num_channels; ++b)
        for (std::size_t g = 0; g < record.estimate.num_slots; ++g)
            std::cout << b << ',' << g << ','
                      << specsense::format_double(record.estimate.at(b, g)) << '\n';

    std::cerr << "method=" << specsense::method_name(record.method)
              << " ratio=" << specsense::format_double(record.ratio)
              << " auc=" << specsense::format_double(record.report.auc)
              << " wasted_fraction=" << specsense::format_double(record.report.wasted_fraction)
              << '\n';
    return kExitOk;
}

int cmd_sweep(const CommonArgs& args) {
    specsense::ExperimentConfig cfg = resolve_config(args);
    specsense::SweepResult result = specsense::run_and_write(cfg);

    std::size_t unconverged = 0;
    for (const auto& record : result.records)
        for (const auto& info : record.solver_info)
            if (!info.converged) ++unconverged;
    std::cerr << "wrote roc.csv, summary.csv, timing.csv, solver.csv, manifest.json to "
              << cfg.output_dir << '\n';
    if (unconverged > 0)
        std::cerr << "note: solver hit its iteration cap on " << unconverged
                  << " block(s); see solver.csv\n";
    return kExitOk;
}

int cmd_rip_check(std::size_t n, std::size_t m, std::size_t kmax, std::size_t trials,
                  std::uint64_t seed) {
    std::cout << "k,delta_hat\n";
    for (std::size_t k = 1; k <= kmax; ++k) {
        std::vector<specsense::MeasurementOp> ops;
        ops.reserve(trials);
        for (std::size_t t = 0; t < trials; ++t)
            ops.push_back(specsense::build_op(n, m, seed, t));
        const double delta = specsense::estimate_rip_delta(ops, k);
        std::cout << k << ',' << specsense::format_double(delta) << '\n';
    }
    return kExitOk;
}

int cmd_bench(const CommonArgs& args) {
    CommonArgs serial = args;
    specsense::ExperimentConfig cfg = resolve_config(serial);
    if (cfg.ratios.size() != 1) {
        std::cerr << "bench: exactly one ratio is required (use --ratios)\n";
        return kExitUsage;
    }
    specsense::SweepResult result = specsense::run_sweep(cfg);
    std::cout << "method,ratio,median_block_time_s,mean_block_time_s\n";
    for (const auto& record : result.records)
        std::cout << specsense::method_name(record.method) << ','
                  << specsense::format_double(record.ratio) << ','
                  << specsense::format_double(record.report.median_block_time_s) << ','
                  << specsense::format_double(record.report.mean_block_time_s) << '\n';
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compressive spectrum sensing toolkit"};
    app.require_subcommand(1);

    CommonArgs generate_args;
    CLI::App* generate_cmd =
        app.add_subcommand("generate", "Synthesize a scenario into an IQ recording");
    add_common_flags(generate_cmd, generate_args, /*ratios_and_method=*/false);

    CommonArgs sense_args;
    CLI::App* sense_cmd =
        app.add_subcommand("sense", "Estimate the power grid at one ratio with one method");
    add_common_flags(sense_cmd, sense_args, /*ratios_and_method=*/true);

    CommonArgs sweep_args;
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "Run the full ratio x method sweep and write CSV reports");
    add_common_flags(sweep_cmd, sweep_args, /*ratios_and_method=*/true);

    std::size_t rip_n = 16, rip_m = 8, rip_kmax = 3, rip_trials = 20;
    std::uint64_t rip_seed = 0;
    CLI::App* rip_cmd = app.add_subcommand(
        "rip-check", "Tabulate restricted-isometry constants for small operators");
    rip_cmd->add_option("--n", rip_n, "Block length (brute force, keep small)");
    rip_cmd->add_option("--m", rip_m, "Measurements per block");
    rip_cmd->add_option("--kmax", rip_kmax, "Largest sparsity level to tabulate");
    rip_cmd->add_option("--trials", rip_trials, "Operator draws per sparsity level");
    rip_cmd->add_option("--seed", rip_seed, "Seed for the operator draws");

    CommonArgs bench_args;
    CLI::App* bench_cmd =
        app.add_subcommand("bench", "Compare per-block wall time of the methods at one ratio");
    add_common_flags(bench_cmd, bench_args, /*ratios_and_method=*/true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (generate_cmd->parsed()) return cmd_generate(generate_args);
        if (sense_cmd->parsed()) return cmd_sense(sense_args);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_args);
        if (rip_cmd->parsed()) return cmd_rip_check(rip_n, rip_m, rip_kmax, rip_trials, rip_seed);
        if (bench_cmd->parsed()) return cmd_bench(bench_args);
        std::cerr << "no subcommand given\n";
        return kExitUsage;
    } catch (const specsense::InvalidInputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const specsense::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
