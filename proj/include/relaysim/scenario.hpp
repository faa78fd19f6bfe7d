#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "relaysim/errors.hpp"
#include "relaysim/estimator.hpp"
#include "relaysim/mobility.hpp"
#include "relaysim/planner.hpp"

namespace relaysim {

/// Tracker speed regime. The first three map to single-speed sets; `mixed`
/// carries the full reference set and assigns a different nominal speed to
/// each drone.
enum class SpeedClass { slow, normal, fast, mixed };

/// Speed set [m/s] for a class: slow = {25}, normal = {30}, fast = {35},
/// mixed = {25, 30, 35}.
std::vector<double> speed_set_for(SpeedClass speed_class);

/// Declarative description of a simulation scenario. Everything random about
/// the scenario derives from `seed`, so a config value-compares equal iff the
/// materialized scenario is identical.
struct ScenarioConfig {
    int n_trackers = 3;
    std::vector<Eigen::Vector2d> initial_positions; // [m], one per tracker
    SpeedClass speed_class = SpeedClass::mixed;
    double sim_duration = 10260.0;          // [s]
    double step_dt = 2.0;                   // [s]
    double estimate_period = 30.0;          // [s], integer multiple of step_dt
    double comm_range = 100000.0;           // [m]
    std::uint64_t seed = 1;
    double maneuver_period_nominal = 300.0; // [s]
};

/// A materialized scenario: concrete tracker trajectories covering
/// [0, sim_duration] plus the relay's initial state.
struct Scenario {
    ScenarioConfig config;
    std::vector<TrackerPlan> tracker_plans; // one per tracker
    RelayState relay_initial;
};

/// Reference configuration: three trackers at [0,0], [500,500], [1000,0] m,
/// 171-minute run at a 2 s step with estimates every 30 s, 100 km
/// communication range, mixed speed class, maneuvers roughly every 5 minutes.
ScenarioConfig reference_preset();

/// Validate a config and generate the concrete scenario. Tracker plans are
/// piecewise-constant-velocity: maneuver times are jittered uniformly within
/// +/-10% of the nominal period, each maneuver turns the current heading by
/// an increment uniform in +/-60 degrees and resamples the speed from the
/// class set. Deterministic: two calls with the same config are
/// bit-identical. Throws ConfigError naming the offending field.
Scenario materialize(const ScenarioConfig& config);

/// Full description of one simulation run: the scenario plus planner and
/// measurement-noise settings.
struct RunConfig {
    ScenarioConfig scenario;
    /// Ready for plan(): step_dt, comm_range, uncertainty_gain and the
    /// control sets are already filled in from the parsed file.
    PlannerConfig planner;
    /// Heading-change set as authored in the config file [deg]; planner
    /// .delta_set holds the derived radians. Kept so serialization
    /// round-trips byte-exactly.
    std::vector<double> delta_set_deg{-30.0, 0.0, 30.0};
    /// Measurement/process noise; dt mirrors scenario.step_dt.
    FilterConfig noise;
    /// When true, the relay re-plans only at estimate refresh epochs and
    /// holds course (current speed, zero heading change) in between.
    bool plan_at_refresh_only = false;
};

/// RunConfig with the reference preset scenario and default planner/noise
/// settings.
RunConfig reference_run_config();

/// Parse a strict-JSON run configuration. Every documented field is
/// required except the optional "noise" object and
/// "planner.plan_at_refresh_only"; unknown fields anywhere are hard errors.
/// Throws ConfigError with the offending field name.
RunConfig run_config_from_json(const std::string& text);

/// Serialize a RunConfig to JSON text (keys sorted, 2-space indent,
/// trailing newline). Parsing the output reproduces the input exactly.
std::string run_config_to_json(const RunConfig& config);

/// Read and parse a run configuration file. Throws ConfigError when the
/// file cannot be read or fails to parse.
RunConfig load_run_config(const std::string& path);

/// Algorithm enum <-> config-file spelling ("single_hop", "nearest_point",
/// "midpoint", "hybrid", "center_of_mass"). Throws ConfigError on an
/// unknown name.
Algorithm algorithm_from_string(const std::string& name);
std::string algorithm_to_string(Algorithm algorithm);

/// SpeedClass enum <-> config-file spelling. Throws ConfigError on an
/// unknown name.
SpeedClass speed_class_from_string(const std::string& name);
std::string speed_class_to_string(SpeedClass speed_class);

} // namespace relaysim
