#include "relaysim/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <utility>

#include "relaysim/feasibility.hpp"
#include "relaysim/rng.hpp"

namespace relaysim {

namespace {

using nlohmann::json;

/// Stream ids for per-tracker measurement noise; far above any tracker-plan
/// stream id so the two families never collide for one base seed.
constexpr std::uint64_t kNoiseStreamBase = 0x100000ULL;
constexpr int kSchemaVersion = 1;

int steps_per_period(double period, double step_dt, const char* field) {
    const double ratio = period / step_dt;
    const long long k = std::llround(ratio);
    if (k < 1 || std::abs(ratio - static_cast<double>(k)) > 1e-9 * std::max(1.0, ratio)) {
        throw ConfigError(field, "must be a positive integer multiple of step_dt");
    }
    return static_cast<int>(k);
}

long long step_count(double sim_duration, double step_dt) {
    return static_cast<long long>(sim_duration / step_dt + 1e-9);
}

void append_number(std::string& out, double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof buffer, "%.9g", value);
    out += buffer;
}

RunMetrics metrics_quantile(const std::vector<RunMetrics>& runs, double p) {
    const auto field = [&](double RunMetrics::*member) {
        std::vector<double> values;
        values.reserve(runs.size());
        for (const RunMetrics& m : runs) {
            values.push_back(m.*member);
        }
        return quantile(std::move(values), p);
    };
    RunMetrics out;
    out.connectivity_duration = field(&RunMetrics::connectivity_duration);
    out.max_lifetime = field(&RunMetrics::max_lifetime);
    out.relative_connectivity = field(&RunMetrics::relative_connectivity);
    out.rmse_position = field(&RunMetrics::rmse_position);
    out.rmse_velocity = field(&RunMetrics::rmse_velocity);
    return out;
}

json metrics_fields(const RunMetrics& metrics) {
    json j;
    j["connectivity_duration_min"] = metrics.connectivity_duration;
    j["max_lifetime_min"] = metrics.max_lifetime;
    j["relative_connectivity"] = metrics.relative_connectivity;
    j["rmse_position_m"] = metrics.rmse_position;
    j["rmse_velocity_mps"] = metrics.rmse_velocity;
    return j;
}

} // namespace

SimulationTrace run(const Scenario& scenario, const PlannerConfig& planner_config,
                    const FilterConfig& noise_config, const RunOptions& options) {
    const ScenarioConfig& cfg = scenario.config;
    if (cfg.n_trackers < 1 ||
        scenario.tracker_plans.size() != static_cast<std::size_t>(cfg.n_trackers)) {
        throw std::invalid_argument("run: tracker plan count does not match n_trackers");
    }
    if (!(cfg.step_dt > 0.0) || !(cfg.sim_duration > 0.0) || !(cfg.comm_range > 0.0)) {
        throw std::invalid_argument("run: scenario durations and range must be positive");
    }
    const int n = cfg.n_trackers;
    const int refresh_steps = steps_per_period(cfg.estimate_period, cfg.step_dt,
                                               "estimate_period");
    const long long total_steps = step_count(cfg.sim_duration, cfg.step_dt);

    FilterConfig filter_cfg = noise_config;
    filter_cfg.dt = cfg.step_dt;

    const std::uint64_t noise_base = options.noise_seed.value_or(cfg.seed);
    std::vector<Rng> noise;
    noise.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        noise.emplace_back(
            Rng::derive_seed(noise_base, kNoiseStreamBase + static_cast<std::uint64_t>(i)));
    }

    std::vector<FilterState> filters(static_cast<std::size_t>(n));
    SimulationTrace trace;
    trace.step_dt = cfg.step_dt;
    trace.comm_range = cfg.comm_range;
    trace.records.reserve(static_cast<std::size_t>(total_steps));

    RelayState relay = scenario.relay_initial;
    ControlSequence pending;
    double last_objective = 0.0;
    double held_speed = relay.speed;
    std::vector<Eigen::Vector2d> positions(static_cast<std::size_t>(n));

    for (long long k = 0; k < total_steps; ++k) {
        const double t = static_cast<double>(k) * cfg.step_dt;
        StepRecord rec;
        rec.time = t;
        rec.true_states.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            rec.true_states[static_cast<std::size_t>(i)] =
                tracker_position(scenario.tracker_plans[static_cast<std::size_t>(i)], t);
        }

        const bool refresh = (k % refresh_steps) == 0;
        if (refresh) {
            for (int i = 0; i < n; ++i) {
                const KinematicState& truth = rec.true_states[static_cast<std::size_t>(i)];
                Rng& stream = noise[static_cast<std::size_t>(i)];
                Measurement z;
                z.z.segment<3>(0) = truth.position;
                z.z(0) += filter_cfg.sigma_gps * stream.normal();
                z.z(1) += filter_cfg.sigma_gps * stream.normal();
                z.z.segment<3>(3) = truth.velocity;
                z.z(3) += filter_cfg.sigma_vel * stream.normal();
                z.z(4) += filter_cfg.sigma_vel * stream.normal();
                FilterState& filter = filters[static_cast<std::size_t>(i)];
                filter = (k == 0) ? filter_init(z, filter_cfg) : update(filter, z, filter_cfg);
            }
        }

        const double tau = static_cast<double>(k % refresh_steps) * cfg.step_dt;
        rec.estimates.resize(static_cast<std::size_t>(n));
        rec.uncertainty_radii.resize(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            TrackerEstimate& est = rec.estimates[static_cast<std::size_t>(i)];
            const FilterState& filter = filters[static_cast<std::size_t>(i)];
            est.position = filter.estimate.position.head<2>();
            est.velocity = filter.estimate.velocity.head<2>();
            est.tau = tau;
            rec.uncertainty_radii[static_cast<std::size_t>(i)] = uncertainty_radius(
                planner_config.uncertainty_gain, est.velocity.norm(), tau);
        }

        if (!options.plan_at_refresh_only || refresh) {
            try {
                PlanDecision decision = plan(rec.estimates, relay, planner_config);
                pending.assign(decision.controls.begin(), decision.controls.end());
                last_objective = decision.objective;
            } catch (const ConfigError& e) {
                throw ConfigError(e.field,
                                  "planner failed at step " + std::to_string(k) + ": " +
                                      std::string(e.what()));
            }
        }
        ControlInput u{held_speed, 0.0};
        if (!pending.empty()) {
            u = pending.front();
            pending.erase(pending.begin());
            held_speed = u.speed;
        }

        rec.relay = relay;
        rec.control = u;
        for (int i = 0; i < n; ++i) {
            positions[static_cast<std::size_t>(i)] =
                rec.true_states[static_cast<std::size_t>(i)].position.head<2>();
        }
        rec.connected_single_hop = ground_truth_connected(positions, relay.position,
                                                          cfg.comm_range,
                                                          TopologyMode::single_hop);
        rec.connected_multi_hop = ground_truth_connected(positions, relay.position,
                                                         cfg.comm_range,
                                                         TopologyMode::multi_hop);
        const FeasibilityVerdict verdict = multi_hop_feasible(positions, cfg.comm_range);
        rec.feasible_single_hop = verdict.single_hop_feasible;
        rec.feasible_multi_hop = verdict.multi_hop_feasible;
        rec.objective = last_objective;
        trace.records.push_back(std::move(rec));

        relay = step_relay(relay, u, cfg.step_dt, planner_config.limits);
        for (int i = 0; i < n; ++i) {
            FilterState& filter = filters[static_cast<std::size_t>(i)];
            filter = predict(filter, Eigen::Vector3d::Zero(), filter_cfg);
        }
    }
    return trace;
}

RunMetrics score(const SimulationTrace& trace, TopologyMode mode) {
    if (trace.records.empty()) {
        throw std::invalid_argument("score: trace has no records");
    }
    long long connected = 0;
    long long feasible = 0;
    double position_sq = 0.0;
    double velocity_sq = 0.0;
    long long samples = 0;
    for (const StepRecord& rec : trace.records) {
        const bool c = mode == TopologyMode::single_hop ? rec.connected_single_hop
                                                        : rec.connected_multi_hop;
        const bool f = mode == TopologyMode::single_hop ? rec.feasible_single_hop
                                                        : rec.feasible_multi_hop;
        connected += c ? 1 : 0;
        feasible += f ? 1 : 0;
        for (std::size_t i = 0; i < rec.estimates.size(); ++i) {
            const Eigen::Vector2d true_pos = rec.true_states[i].position.head<2>();
            const Eigen::Vector2d true_vel = rec.true_states[i].velocity.head<2>();
            position_sq += (rec.estimates[i].position - true_pos).squaredNorm();
            velocity_sq += (rec.estimates[i].velocity - true_vel).squaredNorm();
            ++samples;
        }
    }
    RunMetrics metrics;
    metrics.connectivity_duration =
        static_cast<double>(connected) * trace.step_dt / 60.0;
    metrics.max_lifetime = static_cast<double>(feasible) * trace.step_dt / 60.0;
    metrics.relative_connectivity =
        feasible > 0 ? static_cast<double>(connected) / static_cast<double>(feasible) : 1.0;
    metrics.rmse_position = std::sqrt(position_sq / static_cast<double>(samples));
    metrics.rmse_velocity = std::sqrt(velocity_sq / static_cast<double>(samples));
    return metrics;
}

TopologyMode scoring_mode(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::single_hop:
        case Algorithm::center_of_mass: return TopologyMode::single_hop;
        case Algorithm::nearest_point:
        case Algorithm::midpoint:
        case Algorithm::hybrid: return TopologyMode::multi_hop;
    }
    throw std::invalid_argument("scoring_mode: unknown algorithm");
}

std::string topology_mode_to_string(TopologyMode mode) {
    return mode == TopologyMode::single_hop ? "single_hop" : "multi_hop";
}

std::string trace_to_csv(const SimulationTrace& trace) {
    std::string out;
    out.reserve(trace.records.size() * 256 + 512);
    const std::size_t n = trace.records.empty() ? 0 : trace.records.front().estimates.size();
    out += "time_s";
    for (std::size_t i = 0; i < n; ++i) {
        const std::string id = std::to_string(i);
        for (const char* stem : {"true_px_", "true_py_", "true_vx_", "true_vy_", "est_px_",
                                 "est_py_", "est_vx_", "est_vy_", "radius_"}) {
            out += ',';
            out += stem;
            out += id;
        }
    }
    out += ",relay_px,relay_py,relay_heading_rad,relay_speed,control_speed,control_delta_rad,"
           "connected_single_hop,connected_multi_hop,feasible_single_hop,feasible_multi_hop,"
           "objective\n";
    for (const StepRecord& rec : trace.records) {
        append_number(out, rec.time);
        for (std::size_t i = 0; i < n; ++i) {
            const double fields[9] = {rec.true_states[i].position.x(),
                                      rec.true_states[i].position.y(),
                                      rec.true_states[i].velocity.x(),
                                      rec.true_states[i].velocity.y(),
                                      rec.estimates[i].position.x(),
                                      rec.estimates[i].position.y(),
                                      rec.estimates[i].velocity.x(),
                                      rec.estimates[i].velocity.y(),
                                      rec.uncertainty_radii[i]};
            for (double value : fields) {
                out += ',';
                append_number(out, value);
            }
        }
        for (double value : {rec.relay.position.x(), rec.relay.position.y(), rec.relay.heading,
                             rec.relay.speed, rec.control.speed, rec.control.heading_delta}) {
            out += ',';
            append_number(out, value);
        }
        for (bool flag : {rec.connected_single_hop, rec.connected_multi_hop,
                          rec.feasible_single_hop, rec.feasible_multi_hop}) {
            out += ',';
            out += flag ? '1' : '0';
        }
        out += ',';
        append_number(out, rec.objective);
        out += '\n';
    }
    return out;
}

std::string metrics_to_json(const RunMetrics& metrics, TopologyMode mode) {
    json j = metrics_fields(metrics);
    j["schema_version"] = kSchemaVersion;
    j["mode"] = topology_mode_to_string(mode);
    return j.dump(2) + "\n";
}

MonteCarloStats monte_carlo(const RunConfig& config, int runs, int jobs) {
    if (runs < 1) {
        throw ConfigError("runs", "must be at least 1");
    }
    if (jobs < 1) {
        throw ConfigError("jobs", "must be at least 1");
    }
    MonteCarloStats stats;
    stats.runs = runs;
    stats.per_run.resize(static_cast<std::size_t>(runs));
    const TopologyMode mode = scoring_mode(config.planner.algorithm);
    run_indexed(runs, jobs, [&](int i) {
        ScenarioConfig scenario_cfg = config.scenario;
        scenario_cfg.seed =
            Rng::derive_seed(config.scenario.seed, static_cast<std::uint64_t>(i));
        const Scenario scenario = materialize(scenario_cfg);
        RunOptions options;
        options.plan_at_refresh_only = config.plan_at_refresh_only;
        stats.per_run[static_cast<std::size_t>(i)] =
            score(run(scenario, config.planner, config.noise, options), mode);
    });
    const auto mean_of = [&](double RunMetrics::*member) {
        double sum = 0.0;
        for (const RunMetrics& m : stats.per_run) {
            sum += m.*member;
        }
        return sum / static_cast<double>(runs);
    };
    stats.mean.connectivity_duration = mean_of(&RunMetrics::connectivity_duration);
    stats.mean.max_lifetime = mean_of(&RunMetrics::max_lifetime);
    stats.mean.relative_connectivity = mean_of(&RunMetrics::relative_connectivity);
    stats.mean.rmse_position = mean_of(&RunMetrics::rmse_position);
    stats.mean.rmse_velocity = mean_of(&RunMetrics::rmse_velocity);
    stats.median = metrics_quantile(stats.per_run, 0.5);
    stats.q1 = metrics_quantile(stats.per_run, 0.25);
    stats.q3 = metrics_quantile(stats.per_run, 0.75);
    return stats;
}

std::string monte_carlo_to_json(const MonteCarloStats& stats, TopologyMode mode) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["mode"] = topology_mode_to_string(mode);
    j["runs"] = stats.runs;
    j["mean"] = metrics_fields(stats.mean);
    j["median"] = metrics_fields(stats.median);
    j["q1"] = metrics_fields(stats.q1);
    j["q3"] = metrics_fields(stats.q3);
    return j.dump(2) + "\n";
}

RmseCurves rmse_study(const RunConfig& config, int runs, int jobs) {
    if (runs < 1) {
        throw ConfigError("runs", "must be at least 1");
    }
    if (jobs < 1) {
        throw ConfigError("jobs", "must be at least 1");
    }
    const Scenario scenario = materialize(config.scenario);
    const long long total_steps =
        step_count(config.scenario.sim_duration, config.scenario.step_dt);
    const std::size_t steps = static_cast<std::size_t>(total_steps);
    std::vector<std::vector<double>> position_sq(static_cast<std::size_t>(runs));
    std::vector<std::vector<double>> velocity_sq(static_cast<std::size_t>(runs));
    run_indexed(runs, jobs, [&](int r) {
        RunOptions options;
        options.plan_at_refresh_only = config.plan_at_refresh_only;
        options.noise_seed =
            Rng::derive_seed(config.scenario.seed, static_cast<std::uint64_t>(r));
        const SimulationTrace trace = run(scenario, config.planner, config.noise, options);
        std::vector<double>& pos = position_sq[static_cast<std::size_t>(r)];
        std::vector<double>& vel = velocity_sq[static_cast<std::size_t>(r)];
        pos.assign(steps, 0.0);
        vel.assign(steps, 0.0);
        for (std::size_t k = 0; k < trace.records.size(); ++k) {
            const StepRecord& rec = trace.records[k];
            for (std::size_t i = 0; i < rec.estimates.size(); ++i) {
                const Eigen::Vector2d true_pos = rec.true_states[i].position.head<2>();
                const Eigen::Vector2d true_vel = rec.true_states[i].velocity.head<2>();
                pos[k] += (rec.estimates[i].position - true_pos).squaredNorm();
                vel[k] += (rec.estimates[i].velocity - true_vel).squaredNorm();
            }
        }
    });
    RmseCurves curves;
    curves.time_s.resize(steps);
    curves.rmse_position.resize(steps);
    curves.rmse_velocity.resize(steps);
    const double samples =
        static_cast<double>(runs) * static_cast<double>(config.scenario.n_trackers);
    for (std::size_t k = 0; k < steps; ++k) {
        curves.time_s[k] = static_cast<double>(k) * config.scenario.step_dt;
        double pos_total = 0.0;
        double vel_total = 0.0;
        for (int r = 0; r < runs; ++r) {
            pos_total += position_sq[static_cast<std::size_t>(r)][k];
            vel_total += velocity_sq[static_cast<std::size_t>(r)][k];
        }
        curves.rmse_position[k] = std::sqrt(pos_total / samples);
        curves.rmse_velocity[k] = std::sqrt(vel_total / samples);
    }
    return curves;
}

std::string rmse_curves_to_csv(const RmseCurves& curves) {
    std::string out = "time_s,rmse_position_m,rmse_velocity_mps\n";
    for (std::size_t k = 0; k < curves.time_s.size(); ++k) {
        append_number(out, curves.time_s[k]);
        out += ',';
        append_number(out, curves.rmse_position[k]);
        out += ',';
        append_number(out, curves.rmse_velocity[k]);
        out += '\n';
    }
    return out;
}

void run_indexed(int count, int jobs, const std::function<void(int)>& body) {
    if (jobs <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto drain = [&]() {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= count) {
                return;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) {
                    first_error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> workers;
    const int worker_count = std::min(jobs, count);
    workers.reserve(static_cast<std::size_t>(worker_count));
    for (int w = 0; w < worker_count; ++w) {
        workers.emplace_back(drain);
    }
    for (std::thread& worker : workers) {
        worker.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) {
        throw std::invalid_argument("quantile of an empty sample");
    }
    std::sort(values.begin(), values.end());
    const double h = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= values.size()) {
        return values.back();
    }
    return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

} // namespace relaysim
