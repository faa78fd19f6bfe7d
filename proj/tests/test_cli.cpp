#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "relaysim/cli.hpp"

using namespace relaysim;

namespace {

namespace fs = std::filesystem;

/// Fresh scratch directory under the system temp root for one test case.
fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("relaysim_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& path) {
    std::ifstream file(path, std::ios::binary);
    REQUIRE(file.good());
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return buffer.str();
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary);
    file << content;
    REQUIRE(file.good());
}

/// Short, cheap run configuration: the reference fleet trimmed to two
/// simulated minutes with the centroid-chasing baseline.
RunConfig short_config() {
    RunConfig config = reference_run_config();
    config.scenario.sim_duration = 120.0;
    config.scenario.seed = 11;
    config.planner.algorithm = Algorithm::center_of_mass;
    return config;
}

RunMetrics direct_metrics(const RunConfig& config) {
    const Scenario scenario = materialize(config.scenario);
    RunOptions options;
    options.plan_at_refresh_only = config.plan_at_refresh_only;
    const SimulationTrace trace = run(scenario, config.planner, config.noise, options);
    return score(trace, scoring_mode(config.planner.algorithm));
}

int cli(std::vector<const char*> argv) {
    argv.insert(argv.begin(), "relay_cli");
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

} // namespace

TEST_CASE("run command writes the simulated trace and metrics") {
    const fs::path dir = scratch_dir("run");
    const RunConfig config = short_config();
    write_text(dir / "config.json", run_config_to_json(config));

    const int status = cmd_run((dir / "config.json").string(), (dir / "out").string());
    CHECK(status == kExitSuccess);
    REQUIRE(fs::exists(dir / "out" / "trace.csv"));
    REQUIRE(fs::exists(dir / "out" / "metrics.json"));

    const Scenario scenario = materialize(config.scenario);
    const SimulationTrace trace = run(scenario, config.planner, config.noise);
    const TopologyMode mode = scoring_mode(config.planner.algorithm);
    CHECK(read_file(dir / "out" / "trace.csv") == trace_to_csv(trace));
    CHECK(read_file(dir / "out" / "metrics.json") == metrics_to_json(score(trace, mode), mode));

    SUBCASE("a second invocation reproduces the bytes") {
        REQUIRE(cmd_run((dir / "config.json").string(), (dir / "again").string()) ==
                kExitSuccess);
        CHECK(read_file(dir / "again" / "trace.csv") == read_file(dir / "out" / "trace.csv"));
        CHECK(read_file(dir / "again" / "metrics.json") ==
              read_file(dir / "out" / "metrics.json"));
    }
}

TEST_CASE("run command maps configuration problems to the config exit code") {
    const fs::path dir = scratch_dir("run_errors");

    SUBCASE("missing file") {
        CHECK(cmd_run((dir / "absent.json").string(), (dir / "out").string()) == kExitConfig);
        CHECK(!fs::exists(dir / "out" / "trace.csv"));
    }

    SUBCASE("unknown field") {
        nlohmann::json doc = nlohmann::json::parse(run_config_to_json(short_config()));
        doc["surprise"] = 1;
        write_text(dir / "config.json", doc.dump(2) + "\n");
        CHECK(cmd_run((dir / "config.json").string(), (dir / "out").string()) == kExitConfig);
    }

    SUBCASE("empty planner speed set") {
        nlohmann::json doc = nlohmann::json::parse(run_config_to_json(short_config()));
        doc["planner"]["speed_set_mps"] = nlohmann::json::array();
        write_text(dir / "config.json", doc.dump(2) + "\n");
        CHECK(cmd_run((dir / "config.json").string(), (dir / "out").string()) == kExitConfig);
    }
}

TEST_CASE("run command applies seed and algorithm overrides") {
    const fs::path dir = scratch_dir("run_overrides");
    write_text(dir / "config.json", run_config_to_json(short_config()));

    CliOverrides overrides;
    overrides.seed = 99;
    overrides.algorithm = "midpoint";
    REQUIRE(cmd_run((dir / "config.json").string(), (dir / "out").string(), overrides) ==
            kExitSuccess);

    RunConfig expected = short_config();
    expected.scenario.seed = 99;
    expected.planner.algorithm = Algorithm::midpoint;
    const Scenario scenario = materialize(expected.scenario);
    const SimulationTrace trace = run(scenario, expected.planner, expected.noise);
    CHECK(read_file(dir / "out" / "trace.csv") == trace_to_csv(trace));

    SUBCASE("unknown algorithm override is a config error") {
        CliOverrides bad;
        bad.algorithm = "teleport";
        CHECK(cmd_run((dir / "config.json").string(), (dir / "bad").string(), bad) ==
              kExitConfig);
    }
}

TEST_CASE("sweep command writes per-cell metrics and a deterministic aggregate") {
    const fs::path dir = scratch_dir("sweep");
    nlohmann::json spec;
    spec["algorithms"] = {"center_of_mass", "single_hop"};
    spec["horizons"] = {1};
    spec["comm_ranges_m"] = {100000.0};
    spec["seeds"] = {1, 2, 3};
    spec["base_config"] = nlohmann::json::parse(run_config_to_json(short_config()));
    write_text(dir / "sweep.json", spec.dump(2) + "\n");

    REQUIRE(cmd_sweep((dir / "sweep.json").string(), (dir / "out").string(), 1) ==
            kExitSuccess);

    SUBCASE("per-cell files carry the directly computed metrics") {
        int cell_files = 0;
        for (const auto& entry : fs::directory_iterator(dir / "out" / "cells")) {
            (void)entry;
            ++cell_files;
        }
        CHECK(cell_files == 6);
        RunConfig cell = short_config();
        cell.planner.algorithm = Algorithm::single_hop;
        cell.scenario.seed = 2;
        const TopologyMode mode = scoring_mode(cell.planner.algorithm);
        CHECK(read_file(dir / "out" / "cells" / "single_hop_h1_r100000_s2.json") ==
              metrics_to_json(direct_metrics(cell), mode));
    }

    SUBCASE("aggregate statistics match the per-seed metrics") {
        const nlohmann::json aggregate =
            nlohmann::json::parse(read_file(dir / "out" / "aggregate.json"));
        CHECK(aggregate.at("schema_version") == 1);
        REQUIRE(aggregate.at("rows").size() == 2);
        const nlohmann::json& row = aggregate.at("rows").at(0);
        CHECK(row.at("algorithm") == "center_of_mass");
        CHECK(row.at("mode") == "single_hop");
        CHECK(row.at("horizon_steps") == 1);
        CHECK(row.at("comm_range_m") == 100000.0);
        CHECK(row.at("runs") == 3);
        std::vector<double> durations;
        std::vector<double> relatives;
        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
            RunConfig cell = short_config();
            cell.scenario.seed = seed;
            const RunMetrics metrics = direct_metrics(cell);
            durations.push_back(metrics.connectivity_duration);
            relatives.push_back(metrics.relative_connectivity);
        }
        CHECK(row.at("duration_min").at("median") == quantile(durations, 0.5));
        CHECK(row.at("duration_min").at("q1") == quantile(durations, 0.25));
        CHECK(row.at("duration_min").at("q3") == quantile(durations, 0.75));
        CHECK(row.at("relative_connectivity").at("median") == quantile(relatives, 0.5));
        const std::string csv = read_file(dir / "out" / "aggregate.csv");
        CHECK(csv.rfind("algorithm,mode,horizon_steps,comm_range_m,runs,", 0) == 0);
        CHECK(csv.find("\ncenter_of_mass,single_hop,1,100000,3,") != std::string::npos);
        CHECK(csv.find("\nsingle_hop,single_hop,1,100000,3,") != std::string::npos);
    }

    SUBCASE("worker count changes nothing about the output bytes") {
        REQUIRE(cmd_sweep((dir / "sweep.json").string(), (dir / "out3").string(), 3) ==
                kExitSuccess);
        CHECK(read_file(dir / "out3" / "aggregate.csv") ==
              read_file(dir / "out" / "aggregate.csv"));
        CHECK(read_file(dir / "out3" / "aggregate.json") ==
              read_file(dir / "out" / "aggregate.json"));
        CHECK(read_file(dir / "out3" / "cells" / "center_of_mass_h1_r100000_s3.json") ==
              read_file(dir / "out" / "cells" / "center_of_mass_h1_r100000_s3.json"));
    }
}

TEST_CASE("sweep command rejects malformed specifications") {
    const fs::path dir = scratch_dir("sweep_errors");
    nlohmann::json spec;
    spec["algorithms"] = {"center_of_mass"};
    spec["horizons"] = {1};
    spec["comm_ranges_m"] = {100000.0};
    spec["seeds"] = {1};
    spec["base_config"] = nlohmann::json::parse(run_config_to_json(short_config()));

    SUBCASE("missing file") {
        CHECK(cmd_sweep((dir / "absent.json").string(), (dir / "out").string(), 1) ==
              kExitConfig);
    }

    SUBCASE("unknown key") {
        spec["extra"] = true;
        write_text(dir / "sweep.json", spec.dump(2) + "\n");
        CHECK(cmd_sweep((dir / "sweep.json").string(), (dir / "out").string(), 1) ==
              kExitConfig);
    }

    SUBCASE("empty algorithm list") {
        spec["algorithms"] = nlohmann::json::array();
        write_text(dir / "sweep.json", spec.dump(2) + "\n");
        CHECK(cmd_sweep((dir / "sweep.json").string(), (dir / "out").string(), 1) ==
              kExitConfig);
    }

    SUBCASE("non-positive horizon") {
        spec["horizons"] = {0};
        write_text(dir / "sweep.json", spec.dump(2) + "\n");
        CHECK(cmd_sweep((dir / "sweep.json").string(), (dir / "out").string(), 1) ==
              kExitConfig);
    }

    SUBCASE("dangling base configuration path") {
        spec["base_config"] = "nowhere.json";
        write_text(dir / "sweep.json", spec.dump(2) + "\n");
        CHECK(cmd_sweep((dir / "sweep.json").string(), (dir / "out").string(), 1) ==
              kExitConfig);
    }

    SUBCASE("relative base configuration path resolves against the spec file") {
        write_text(dir / "base.json", run_config_to_json(short_config()));
        spec["base_config"] = "base.json";
        write_text(dir / "sweep.json", spec.dump(2) + "\n");
        const SweepSpec loaded = load_sweep_spec((dir / "sweep.json").string());
        CHECK(loaded.base.scenario.sim_duration == 120.0);
        CHECK(loaded.algorithms.size() == 1);
        CHECK(loaded.seeds.size() == 1);
    }

    SUBCASE("non-positive worker count") {
        write_text(dir / "sweep.json", spec.dump(2) + "\n");
        CHECK(cmd_sweep((dir / "sweep.json").string(), (dir / "out").string(), 0) ==
              kExitConfig);
    }
}

TEST_CASE("sweep command keeps going past failing cells") {
    const fs::path dir = scratch_dir("sweep_partial");
    nlohmann::json spec;
    spec["algorithms"] = {"center_of_mass"};
    // A horizon of 600 explodes the candidate enumeration budget, so those
    // cells fail at planning time while the one-step cells succeed.
    spec["horizons"] = {1, 600};
    spec["comm_ranges_m"] = {100000.0};
    spec["seeds"] = {1, 2};
    spec["base_config"] = nlohmann::json::parse(run_config_to_json(short_config()));
    write_text(dir / "sweep.json", spec.dump(2) + "\n");

    CHECK(cmd_sweep((dir / "sweep.json").string(), (dir / "out").string(), 1) == kExitRuntime);
    CHECK(fs::exists(dir / "out" / "cells" / "center_of_mass_h1_r100000_s1.json"));
    CHECK(fs::exists(dir / "out" / "cells" / "center_of_mass_h1_r100000_s2.json"));
    CHECK(!fs::exists(dir / "out" / "cells" / "center_of_mass_h600_r100000_s1.json"));

    const nlohmann::json aggregate =
        nlohmann::json::parse(read_file(dir / "out" / "aggregate.json"));
    REQUIRE(aggregate.at("rows").size() == 2);
    CHECK(aggregate.at("rows").at(0).at("runs") == 2);
    CHECK(aggregate.at("rows").at(1).at("runs") == 0);
    CHECK(aggregate.at("rows").at(1).at("duration_min").at("median").is_null());
}

TEST_CASE("rmse command writes ensemble error curves") {
    const fs::path dir = scratch_dir("rmse");
    RunConfig config = short_config();
    config.noise.sigma_acc = 0.0;
    config.noise.sigma_gps = 0.0;
    config.noise.sigma_vel = 0.0;
    write_text(dir / "config.json", run_config_to_json(config));

    REQUIRE(cmd_rmse((dir / "config.json").string(), 3, (dir / "out").string(), 1) ==
            kExitSuccess);
    const std::string csv = read_file(dir / "out" / "rmse.csv");
    CHECK(csv.rfind("time_s,rmse_position_m,rmse_velocity_mps\n", 0) == 0);
    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    int rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        const std::size_t first = line.find(',');
        const std::size_t second = line.find(',', first + 1);
        CHECK(std::stod(line.substr(first + 1, second - first - 1)) < 1e-6);
        CHECK(std::stod(line.substr(second + 1)) < 1e-6);
    }
    CHECK(rows == 60);

    SUBCASE("non-positive run count is a config error") {
        CHECK(cmd_rmse((dir / "config.json").string(), 0, (dir / "out").string(), 1) ==
              kExitConfig);
    }
}

TEST_CASE("command line front end maps flags to the exit-code contract") {
    const fs::path dir = scratch_dir("front_end");
    write_text(dir / "config.json", run_config_to_json(short_config()));
    const std::string config = (dir / "config.json").string();
    const std::string out = (dir / "out").string();

    SUBCASE("run subcommand succeeds end to end") {
        CHECK(cli({"run", "--config", config.c_str(), "--out", out.c_str()}) == kExitSuccess);
        CHECK(fs::exists(dir / "out" / "trace.csv"));
        CHECK(fs::exists(dir / "out" / "metrics.json"));
    }

    SUBCASE("rmse subcommand honors runs and jobs flags") {
        CHECK(cli({"rmse", "--config", config.c_str(), "--out", out.c_str(), "--runs", "2",
                   "--jobs", "2"}) == kExitSuccess);
        CHECK(fs::exists(dir / "out" / "rmse.csv"));
    }

    SUBCASE("overrides flow through the run subcommand") {
        CHECK(cli({"run", "--config", config.c_str(), "--out", out.c_str(),
                   "--seed-override", "99", "--algorithm-override", "midpoint"}) ==
              kExitSuccess);
        RunConfig expected = short_config();
        expected.scenario.seed = 99;
        expected.planner.algorithm = Algorithm::midpoint;
        const Scenario scenario = materialize(expected.scenario);
        const SimulationTrace trace = run(scenario, expected.planner, expected.noise);
        CHECK(read_file(dir / "out" / "trace.csv") == trace_to_csv(trace));
    }

    SUBCASE("flag misuse is a configuration error") {
        CHECK(cli({}) == kExitConfig);
        CHECK(cli({"run"}) == kExitConfig);
        CHECK(cli({"warp", "--config", config.c_str()}) == kExitConfig);
        CHECK(cli({"rmse", "--config", config.c_str(), "--out", out.c_str(), "--runs",
                   "0"}) == kExitConfig);
        CHECK(cli({"run", "--config", config.c_str(), "--out", out.c_str(),
                   "--algorithm-override", "teleport"}) == kExitConfig);
    }

    SUBCASE("help requests exit cleanly") {
        CHECK(cli({"--help"}) == kExitSuccess);
    }
}
