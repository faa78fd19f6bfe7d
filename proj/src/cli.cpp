#include "relaysim/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace relaysim {

namespace {

using nlohmann::json;

constexpr int kAggregateSchemaVersion = 1;

/// One structured log line on stderr; data streams stay clean for files.
void log_line(const char* level, const char* step, const std::string& message) {
    std::string escaped;
    escaped.reserve(message.size());
    for (char c : message) {
        if (c == '"' || c == '\\') {
            escaped += '\\';
        }
        escaped += c;
    }
    std::cerr << "level=" << level << " step=" << step << " msg=\"" << escaped << "\"\n";
}

void log_info(const char* step, const std::string& message) { log_line("info", step, message); }
void log_error(const char* step, const std::string& message) { log_line("error", step, message); }

std::string format_number(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.9g", value);
    return buffer;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary);
    file.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!file) {
        throw std::runtime_error("cannot write file: " + path.string());
    }
}

std::string joined(const std::string& context, const std::string& key) {
    return context.empty() ? key : context + "." + key;
}

const json& require_key(const json& obj, const std::string& context, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        throw ConfigError(joined(context, key), "missing required field");
    }
    return *it;
}

void reject_unknown_keys(const json& obj, const std::string& context,
                         std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ConfigError(joined(context, item.key()), "unknown field");
        }
    }
}

const json& non_empty_array(const json& root, const char* key) {
    const json& node = require_key(root, "", key);
    if (!node.is_array() || node.empty()) {
        throw ConfigError(key, "must be a non-empty array");
    }
    return node;
}

/// Replace seed and algorithm from command-line flags, validating the
/// algorithm name against the flag (not the config file) in diagnostics.
void apply_overrides(RunConfig& config, const CliOverrides& overrides) {
    if (overrides.seed) {
        config.scenario.seed = *overrides.seed;
    }
    if (overrides.algorithm) {
        try {
            config.planner.algorithm = algorithm_from_string(*overrides.algorithm);
        } catch (const ConfigError&) {
            throw ConfigError("algorithm_override", "unknown algorithm: " + *overrides.algorithm);
        }
    }
}

/// Simulate one fully-specified configuration and score it in the
/// algorithm's conventional topology mode.
std::pair<SimulationTrace, RunMetrics> simulate(const RunConfig& config) {
    const Scenario scenario = materialize(config.scenario);
    RunOptions options;
    options.plan_at_refresh_only = config.plan_at_refresh_only;
    SimulationTrace trace = run(scenario, config.planner, config.noise, options);
    RunMetrics metrics = score(trace, scoring_mode(config.planner.algorithm));
    return {std::move(trace), metrics};
}

struct SweepCell {
    Algorithm algorithm = Algorithm::hybrid;
    int horizon = 1;
    double comm_range = 0.0;
    std::uint64_t seed = 0;
};

std::string cell_name(const SweepCell& cell) {
    return algorithm_to_string(cell.algorithm) + "_h" + std::to_string(cell.horizon) + "_r" +
           format_number(cell.comm_range) + "_s" + std::to_string(cell.seed);
}

/// Aggregate row statistics; NaN marks a key whose every cell failed.
struct AggregateRow {
    double mean = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
};

AggregateRow aggregate_stats(const std::vector<double>& values) {
    AggregateRow row;
    if (values.empty()) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        row.mean = row.q1 = row.median = row.q3 = nan;
        return row;
    }
    double total = 0.0;
    for (double v : values) {
        total += v;
    }
    row.mean = total / static_cast<double>(values.size());
    row.q1 = quantile(values, 0.25);
    row.median = quantile(values, 0.5);
    row.q3 = quantile(values, 0.75);
    return row;
}

} // namespace

SweepSpec sweep_spec_from_json(const std::string& text, const std::string& base_dir) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("sweep", std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_object()) {
        throw ConfigError("sweep", "top level must be an object");
    }
    reject_unknown_keys(root, "",
                        {"algorithms", "horizons", "comm_ranges_m", "seeds", "base_config"});

    SweepSpec spec;
    for (const json& entry : non_empty_array(root, "algorithms")) {
        if (!entry.is_string()) {
            throw ConfigError("algorithms", "entries must be algorithm name strings");
        }
        const std::string name = entry.get<std::string>();
        try {
            spec.algorithms.push_back(algorithm_from_string(name));
        } catch (const ConfigError&) {
            throw ConfigError("algorithms", "unknown algorithm: " + name);
        }
    }
    for (const json& entry : non_empty_array(root, "horizons")) {
        if (!entry.is_number_integer() || entry.get<long long>() < 1) {
            throw ConfigError("horizons", "entries must be positive integers");
        }
        spec.horizons.push_back(entry.get<int>());
    }
    for (const json& entry : non_empty_array(root, "comm_ranges_m")) {
        if (!entry.is_number() || entry.get<double>() <= 0.0) {
            throw ConfigError("comm_ranges_m", "entries must be positive numbers");
        }
        spec.comm_ranges.push_back(entry.get<double>());
    }
    for (const json& entry : non_empty_array(root, "seeds")) {
        if (!entry.is_number_unsigned()) {
            throw ConfigError("seeds", "entries must be non-negative integers");
        }
        spec.seeds.push_back(entry.get<std::uint64_t>());
    }

    const json& base = require_key(root, "", "base_config");
    if (base.is_string()) {
        std::filesystem::path path(base.get<std::string>());
        if (path.is_relative() && !base_dir.empty()) {
            path = std::filesystem::path(base_dir) / path;
        }
        spec.base = load_run_config(path.string());
    } else if (base.is_object()) {
        spec.base = run_config_from_json(base.dump());
    } else {
        throw ConfigError("base_config",
                          "must be a configuration file path or an inline configuration object");
    }
    return spec;
}

SweepSpec load_sweep_spec(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw ConfigError("sweep", "cannot read file: " + path);
    }
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return sweep_spec_from_json(buffer.str(),
                                std::filesystem::path(path).parent_path().string());
}

int cmd_run(const std::string& config_path, const std::string& output_dir,
            const CliOverrides& overrides) {
    try {
        RunConfig config = load_run_config(config_path);
        apply_overrides(config, overrides);
        log_info("run", "loaded configuration from " + config_path);
        const auto [trace, metrics] = simulate(config);
        const TopologyMode mode = scoring_mode(config.planner.algorithm);
        const std::filesystem::path dir(output_dir);
        std::filesystem::create_directories(dir);
        write_file(dir / "trace.csv", trace_to_csv(trace));
        write_file(dir / "metrics.json", metrics_to_json(metrics, mode));
        log_info("run", "wrote trace.csv and metrics.json (" +
                            std::to_string(trace.records.size()) + " records) to " + output_dir);
        return kExitSuccess;
    } catch (const ConfigError& e) {
        log_error("run", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        log_error("run", e.what());
        return kExitRuntime;
    }
}

int cmd_sweep(const std::string& sweep_path, const std::string& output_dir, int jobs) {
    SweepSpec spec;
    try {
        if (jobs < 1) {
            throw ConfigError("jobs", "must be at least 1");
        }
        spec = load_sweep_spec(sweep_path);
    } catch (const ConfigError& e) {
        log_error("sweep", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        log_error("sweep", e.what());
        return kExitRuntime;
    }

    std::vector<SweepCell> cells;
    for (Algorithm algorithm : spec.algorithms) {
        for (int horizon : spec.horizons) {
            for (double comm_range : spec.comm_ranges) {
                for (std::uint64_t seed : spec.seeds) {
                    cells.push_back(SweepCell{algorithm, horizon, comm_range, seed});
                }
            }
        }
    }
    log_info("sweep", "running " + std::to_string(cells.size()) + " cells on " +
                          std::to_string(jobs) + " worker(s)");

    std::vector<RunMetrics> results(cells.size());
    std::vector<std::string> errors(cells.size());
    run_indexed(static_cast<int>(cells.size()), jobs, [&](int i) {
        const SweepCell& cell = cells[static_cast<std::size_t>(i)];
        try {
            RunConfig config = spec.base;
            config.planner.algorithm = cell.algorithm;
            config.planner.horizon_steps = cell.horizon;
            config.scenario.comm_range = cell.comm_range;
            config.planner.comm_range = cell.comm_range;
            config.scenario.seed = cell.seed;
            results[static_cast<std::size_t>(i)] = simulate(config).second;
        } catch (const std::exception& e) {
            errors[static_cast<std::size_t>(i)] = e.what();
        }
    });

    try {
        const std::filesystem::path dir(output_dir);
        std::filesystem::create_directories(dir / "cells");
        std::size_t failed = 0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const std::string name = cell_name(cells[i]);
            if (!errors[i].empty()) {
                ++failed;
                log_error("cell", name + ": " + errors[i]);
                continue;
            }
            const TopologyMode mode = scoring_mode(cells[i].algorithm);
            write_file(dir / "cells" / (name + ".json"), metrics_to_json(results[i], mode));
        }

        std::string csv =
            "algorithm,mode,horizon_steps,comm_range_m,runs,"
            "duration_min_mean,duration_min_q1,duration_min_median,duration_min_q3,"
            "relative_mean,relative_q1,relative_median,relative_q3\n";
        json rows = json::array();
        std::size_t index = 0;
        for (Algorithm algorithm : spec.algorithms) {
            for (int horizon : spec.horizons) {
                for (double comm_range : spec.comm_ranges) {
                    std::vector<double> durations;
                    std::vector<double> relatives;
                    for (std::size_t s = 0; s < spec.seeds.size(); ++s, ++index) {
                        if (errors[index].empty()) {
                            durations.push_back(results[index].connectivity_duration);
                            relatives.push_back(results[index].relative_connectivity);
                        }
                    }
                    const AggregateRow duration = aggregate_stats(durations);
                    const AggregateRow relative = aggregate_stats(relatives);
                    const std::string mode =
                        topology_mode_to_string(scoring_mode(algorithm));
                    csv += algorithm_to_string(algorithm) + ',' + mode + ',' +
                           std::to_string(horizon) + ',' + format_number(comm_range) + ',' +
                           std::to_string(durations.size()) + ',' +
                           format_number(duration.mean) + ',' + format_number(duration.q1) +
                           ',' + format_number(duration.median) + ',' +
                           format_number(duration.q3) + ',' + format_number(relative.mean) +
                           ',' + format_number(relative.q1) + ',' +
                           format_number(relative.median) + ',' + format_number(relative.q3) +
                           '\n';
                    json row;
                    row["algorithm"] = algorithm_to_string(algorithm);
                    row["mode"] = mode;
                    row["horizon_steps"] = horizon;
                    row["comm_range_m"] = comm_range;
                    row["runs"] = durations.size();
                    row["duration_min"] = {{"mean", duration.mean},
                                           {"q1", duration.q1},
                                           {"median", duration.median},
                                           {"q3", duration.q3}};
                    row["relative_connectivity"] = {{"mean", relative.mean},
                                                    {"q1", relative.q1},
                                                    {"median", relative.median},
                                                    {"q3", relative.q3}};
                    rows.push_back(std::move(row));
                }
            }
        }
        json aggregate;
        aggregate["schema_version"] = kAggregateSchemaVersion;
        aggregate["rows"] = std::move(rows);
        write_file(dir / "aggregate.csv", csv);
        write_file(dir / "aggregate.json", aggregate.dump(2) + "\n");

        if (failed > 0) {
            log_error("sweep", std::to_string(failed) + " of " + std::to_string(cells.size()) +
                                   " cells failed");
            return kExitRuntime;
        }
        log_info("sweep", "wrote " + std::to_string(cells.size()) +
                              " cell files plus aggregate.csv and aggregate.json to " +
                              output_dir);
        return kExitSuccess;
    } catch (const std::exception& e) {
        log_error("sweep", e.what());
        return kExitRuntime;
    }
}

int cmd_rmse(const std::string& config_path, int runs, const std::string& output_dir, int jobs,
             const CliOverrides& overrides) {
    try {
        RunConfig config = load_run_config(config_path);
        apply_overrides(config, overrides);
        log_info("rmse", "loaded configuration from " + config_path);
        const RmseCurves curves = rmse_study(config, runs, jobs);
        const std::filesystem::path dir(output_dir);
        std::filesystem::create_directories(dir);
        write_file(dir / "rmse.csv", rmse_curves_to_csv(curves));
        log_info("rmse", "wrote rmse.csv (" + std::to_string(curves.time_s.size()) +
                             " steps over " + std::to_string(runs) + " runs) to " + output_dir);
        return kExitSuccess;
    } catch (const ConfigError& e) {
        log_error("rmse", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        log_error("rmse", e.what());
        return kExitRuntime;
    }
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"deterministic relay-UAV trajectory planning simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string algorithm_override;
    std::uint64_t seed_override = 0;
    int jobs = 1;
    int runs = 100;

    CLI::App* run_cmd =
        app.add_subcommand("run", "simulate one configuration; write trace.csv + metrics.json");
    run_cmd->add_option("--config", config_path, "run configuration JSON file")->required();
    run_cmd->add_option("--out", out_dir, "output directory")->required();
    CLI::Option* run_seed =
        run_cmd->add_option("--seed-override", seed_override, "replace the scenario seed");
    CLI::Option* run_alg = run_cmd->add_option("--algorithm-override", algorithm_override,
                                               "replace the planner algorithm");

    CLI::App* sweep_cmd = app.add_subcommand(
        "sweep", "run every cell of a sweep specification; write per-cell and aggregate tables");
    sweep_cmd->add_option("--config", config_path, "sweep specification JSON file")->required();
    sweep_cmd->add_option("--out", out_dir, "output directory")->required();
    sweep_cmd->add_option("--jobs", jobs, "worker thread count")->check(CLI::PositiveNumber);

    CLI::App* rmse_cmd = app.add_subcommand(
        "rmse", "Monte Carlo estimation-fidelity study; write per-step RMSE curves");
    rmse_cmd->add_option("--config", config_path, "run configuration JSON file")->required();
    rmse_cmd->add_option("--out", out_dir, "output directory")->required();
    rmse_cmd->add_option("--runs", runs, "Monte Carlo run count")->check(CLI::PositiveNumber);
    rmse_cmd->add_option("--jobs", jobs, "worker thread count")->check(CLI::PositiveNumber);
    CLI::Option* rmse_seed =
        rmse_cmd->add_option("--seed-override", seed_override, "replace the scenario seed");
    CLI::Option* rmse_alg = rmse_cmd->add_option("--algorithm-override", algorithm_override,
                                                 "replace the planner algorithm");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitSuccess : kExitConfig;
    }

    CliOverrides overrides;
    if (run_cmd->parsed()) {
        if (run_seed->count() > 0) {
            overrides.seed = seed_override;
        }
        if (run_alg->count() > 0) {
            overrides.algorithm = algorithm_override;
        }
        return cmd_run(config_path, out_dir, overrides);
    }
    if (sweep_cmd->parsed()) {
        return cmd_sweep(config_path, out_dir, jobs);
    }
    if (rmse_cmd->parsed()) {
        if (rmse_seed->count() > 0) {
            overrides.seed = seed_override;
        }
        if (rmse_alg->count() > 0) {
            overrides.algorithm = algorithm_override;
        }
        return cmd_rmse(config_path, runs, out_dir, jobs, overrides);
    }
    return kExitConfig;
}

} // namespace relaysim
