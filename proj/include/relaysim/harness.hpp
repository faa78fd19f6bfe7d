#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "relaysim/connectivity.hpp"
#include "relaysim/errors.hpp"
#include "relaysim/estimator.hpp"
#include "relaysim/mobility.hpp"
#include "relaysim/planner.hpp"
#include "relaysim/scenario.hpp"

namespace relaysim {

/// Everything recorded about one simulation step. All quantities refer to
/// the step's start instant: the relay pose is the one the planner saw, and
/// `control` is the command applied over the following step_dt seconds.
struct StepRecord {
    double time = 0.0;                        // [s]
    std::vector<KinematicState> true_states;  // per tracker, constant altitude
    std::vector<TrackerEstimate> estimates;   // planner-facing planar estimates
    std::vector<double> uncertainty_radii;    // [m], grows since last refresh
    RelayState relay;                         // relay pose at the step start
    ControlInput control;                     // control applied over the step
    bool connected_single_hop = false;        // ground truth, star topology
    bool connected_multi_hop = false;         // ground truth, any connected graph
    bool feasible_single_hop = false;         // some placement could connect (star)
    bool feasible_multi_hop = false;          // some placement could connect (mesh)
    double objective = 0.0;                   // objective of the active plan
};

/// Full per-step record of one simulation run.
struct SimulationTrace {
    double step_dt = 0.0;    // [s]
    double comm_range = 0.0; // [m]
    std::vector<StepRecord> records;
};

/// Optional knobs for run() beyond the scenario/planner/noise configs.
struct RunOptions {
    /// Re-plan only at estimate refresh epochs; between refreshes the relay
    /// consumes the remaining planned controls, then holds its speed with
    /// zero heading change.
    bool plan_at_refresh_only = false;
    /// Base seed for the measurement-noise streams. Defaults to the scenario
    /// seed; Monte Carlo studies that share one truth across runs set a
    /// per-run value here.
    std::optional<std::uint64_t> noise_seed = std::nullopt;
};

/// Simulate one run: advance the trackers along their plans, synthesize
/// noisy measurements at every estimate epoch (Gaussian per axis on x and y;
/// altitude is exact), filter between epochs by prediction, re-plan the
/// relay each step (receding horizon: only the first control of the chosen
/// sequence is flown), and record per-step ground-truth connectivity and
/// feasibility. The filter's prediction step is the scenario step_dt; the
/// noise config's dt field is ignored. Deterministic for fixed inputs.
/// Planner configuration errors are rethrown with the step index attached.
SimulationTrace run(const Scenario& scenario, const PlannerConfig& planner_config,
                    const FilterConfig& noise_config, const RunOptions& options = {});

/// Aggregate metrics of one run under one topology mode.
struct RunMetrics {
    double connectivity_duration = 0.0; // [min] steps connected x step_dt
    double max_lifetime = 0.0;          // [min] steps feasible x step_dt
    double relative_connectivity = 0.0; // duration / lifetime, in [0, 1]
    double rmse_position = 0.0;         // [m] whole-run planar estimate RMSE
    double rmse_velocity = 0.0;         // [m/s]
};

/// Score a trace in the given topology mode. relative_connectivity is 1 when
/// nothing was ever feasible (vacuously perfect).
RunMetrics score(const SimulationTrace& trace, TopologyMode mode);

/// Scoring mode conventionally paired with each algorithm: star-topology
/// planners (single_hop, center_of_mass) score in single_hop mode, the
/// multi-hop family (nearest_point, midpoint, hybrid) in multi_hop mode.
TopologyMode scoring_mode(Algorithm algorithm);

/// Config-file spelling of a topology mode ("single_hop" / "multi_hop").
std::string topology_mode_to_string(TopologyMode mode);

/// Render a trace as CSV: a fixed header row, one row per step, floats with
/// 9 significant digits, booleans as 0/1. Column order: time_s; per tracker
/// i: true_px_i, true_py_i, true_vx_i, true_vy_i, est_px_i, est_py_i,
/// est_vx_i, est_vy_i, radius_i; then relay_px, relay_py, relay_heading_rad,
/// relay_speed, control_speed, control_delta_rad, connected_single_hop,
/// connected_multi_hop, feasible_single_hop, feasible_multi_hop, objective.
std::string trace_to_csv(const SimulationTrace& trace);

/// Render metrics as a schema-versioned JSON document (sorted keys, 2-space
/// indent, trailing newline).
std::string metrics_to_json(const RunMetrics& metrics, TopologyMode mode);

/// Distribution of RunMetrics over seed-indexed Monte Carlo runs. Field-wise
/// statistics; quartiles use linear interpolation between order statistics.
struct MonteCarloStats {
    int runs = 0;
    std::vector<RunMetrics> per_run; // indexed by run number
    RunMetrics mean;
    RunMetrics median;
    RunMetrics q1;
    RunMetrics q3;
};

/// Monte Carlo over `runs` independent scenarios: run i replaces the
/// scenario seed with a seed derived from (config seed, i), simulates, and
/// scores in the algorithm's conventional mode. Runs execute on up to `jobs`
/// worker threads; results are reduced in run order, so the output is
/// bit-identical for every jobs value. Throws ConfigError for runs < 1 or
/// jobs < 1.
MonteCarloStats monte_carlo(const RunConfig& config, int runs, int jobs = 1);

/// Render Monte Carlo statistics as a schema-versioned JSON document.
std::string monte_carlo_to_json(const MonteCarloStats& stats, TopologyMode mode);

/// Per-step ensemble RMSE curves across Monte Carlo runs.
struct RmseCurves {
    std::vector<double> time_s;
    std::vector<double> rmse_position;  // [m]
    std::vector<double> rmse_velocity;  // [m/s]
};

/// Estimation-fidelity study: all runs share the scenario (same truth); run
/// i draws its measurement noise from the stream derived from (scenario
/// seed, i). The curve at step k is the RMSE over all runs and trackers at
/// that step. Deterministic and bit-identical for every jobs value.
RmseCurves rmse_study(const RunConfig& config, int runs, int jobs = 1);

/// Render RMSE curves as CSV (time_s, rmse_position_m, rmse_velocity_mps).
std::string rmse_curves_to_csv(const RmseCurves& curves);

/// Execute body(0), ..., body(count-1) on up to `jobs` worker threads.
/// Callers write results into index-addressed slots, so scheduling order
/// never influences the output. The first exception thrown by any body is
/// rethrown after all workers finish; jobs <= 1 runs inline.
void run_indexed(int count, int jobs, const std::function<void(int)>& body);

/// Quantile of `values` at probability p in [0, 1], using linear
/// interpolation between order statistics. Throws std::invalid_argument for
/// an empty input.
double quantile(std::vector<double> values, double p);

} // namespace relaysim
