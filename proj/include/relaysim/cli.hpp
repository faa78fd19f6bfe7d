#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relaysim/harness.hpp"

namespace relaysim {

/// Stable command exit codes: success, runtime failure, configuration error.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

/// Axes of a batch experiment. Every combination of algorithm x horizon x
/// communication range x seed becomes one cell simulated from `base` with
/// those four fields replaced.
struct SweepSpec {
    std::vector<Algorithm> algorithms;
    std::vector<int> horizons;         // planner horizon_steps per cell
    std::vector<double> comm_ranges;   // [m]
    std::vector<std::uint64_t> seeds;  // scenario seeds
    RunConfig base;                    // template for every cell
};

/// Parse a sweep specification from JSON text. Schema (all keys required,
/// unknown keys rejected): algorithms (non-empty array of algorithm names),
/// horizons (non-empty array of positive integers), comm_ranges_m (non-empty
/// array of positive numbers), seeds (non-empty array of non-negative
/// integers), base_config (either an inline run-configuration object or a
/// path string resolved relative to `base_dir`). Throws ConfigError.
SweepSpec sweep_spec_from_json(const std::string& text, const std::string& base_dir);

/// Read and parse a sweep specification file; relative base_config paths
/// resolve against the file's directory. Throws ConfigError.
SweepSpec load_sweep_spec(const std::string& path);

/// Command-line overrides applied to a loaded run configuration before
/// simulating. The algorithm is kept as its spelled name so diagnostics can
/// point at the flag that carried it.
struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> algorithm;
};

/// Simulate one configuration file and write trace.csv plus metrics.json
/// into output_dir (created if absent). Returns kExitSuccess, kExitConfig
/// for invalid configuration, or kExitRuntime for execution failures.
int cmd_run(const std::string& config_path, const std::string& output_dir,
            const CliOverrides& overrides = {});

/// Run every cell of a sweep specification on up to `jobs` worker threads.
/// Writes cells/<algorithm>_h<horizon>_r<range>_s<seed>.json per cell plus
/// aggregate.csv and aggregate.json keyed (algorithm, horizon, comm_range)
/// with mean/quartile connectivity minutes and relative connectivity across
/// seeds. Output bytes are independent of `jobs`. Failed cells are reported
/// on stderr and excluded from their aggregate row; any cell failure turns
/// the exit status to kExitRuntime.
int cmd_sweep(const std::string& sweep_path, const std::string& output_dir, int jobs);

/// Estimation-fidelity study over `runs` Monte Carlo noise draws of the
/// configured scenario; writes per-step ensemble RMSE curves to rmse.csv in
/// output_dir. Exit codes as cmd_run.
int cmd_rmse(const std::string& config_path, int runs, const std::string& output_dir,
             int jobs, const CliOverrides& overrides = {});

/// Full command-line front end (subcommands run, sweep, rmse). Returns the
/// process exit status; never throws.
int run_cli(int argc, const char* const* argv);

} // namespace relaysim
