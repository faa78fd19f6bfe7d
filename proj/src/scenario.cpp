#include "relaysim/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "relaysim/rng.hpp"

namespace relaysim {

namespace {

constexpr double kPi = 3.141592653589793;
constexpr double kMaxTurn = kPi / 3.0; // 60 deg maneuver turn limit
constexpr double kPeriodJitter = 0.1;  // +/-10% maneuver-period jitter

using nlohmann::json;

void require_finite(double value, const char* field) {
    if (!std::isfinite(value)) {
        throw ConfigError(field, "must be finite");
    }
}

void require_positive(double value, const char* field) {
    require_finite(value, field);
    if (value <= 0.0) {
        throw ConfigError(field, "must be positive");
    }
}

void validate(const ScenarioConfig& config) {
    if (config.n_trackers < 1) {
        throw ConfigError("n_trackers", "must be at least 1");
    }
    if (config.initial_positions.size() != static_cast<std::size_t>(config.n_trackers)) {
        throw ConfigError("initial_positions", "length must equal n_trackers");
    }
    for (const Eigen::Vector2d& p : config.initial_positions) {
        if (!p.allFinite()) {
            throw ConfigError("initial_positions", "entries must be finite");
        }
    }
    require_positive(config.sim_duration, "sim_duration");
    require_positive(config.step_dt, "step_dt");
    require_positive(config.estimate_period, "estimate_period");
    require_positive(config.comm_range, "comm_range");
    require_positive(config.maneuver_period_nominal, "maneuver_period_nominal");
    const double ratio = config.estimate_period / config.step_dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio) || ratio < 0.5) {
        throw ConfigError("estimate_period", "must be an integer multiple of step_dt");
    }
}

} // namespace

std::vector<double> speed_set_for(SpeedClass speed_class) {
    switch (speed_class) {
        case SpeedClass::slow: return {25.0};
        case SpeedClass::normal: return {30.0};
        case SpeedClass::fast: return {35.0};
        case SpeedClass::mixed: return {25.0, 30.0, 35.0};
    }
    throw ConfigError("speed_class", "unknown speed class value");
}

ScenarioConfig reference_preset() {
    ScenarioConfig config;
    config.n_trackers = 3;
    config.initial_positions = {Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(500.0, 500.0),
                                Eigen::Vector2d(1000.0, 0.0)};
    config.speed_class = SpeedClass::mixed;
    config.sim_duration = 171.0 * 60.0;
    config.step_dt = 2.0;
    config.estimate_period = 30.0;
    config.comm_range = 100000.0;
    config.seed = 1;
    config.maneuver_period_nominal = 300.0;
    return config;
}

Scenario materialize(const ScenarioConfig& config) {
    validate(config);
    Scenario scenario;
    scenario.config = config;
    const std::vector<double> speeds = speed_set_for(config.speed_class);
    const int n = config.n_trackers;
    scenario.tracker_plans.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Rng rng(Rng::derive_seed(config.seed, static_cast<std::uint64_t>(i)));
        TrackerPlan plan;
        plan.origin = config.initial_positions[static_cast<std::size_t>(i)];
        plan.end_time = config.sim_duration;
        double heading = normalize_angle(rng.uniform(-kPi, kPi));
        double speed = speeds[static_cast<std::size_t>(i) % speeds.size()];
        plan.segments.push_back(TrackerSegment{0.0, speed, heading});
        double t = 0.0;
        while (true) {
            t += config.maneuver_period_nominal *
                 rng.uniform(1.0 - kPeriodJitter, 1.0 + kPeriodJitter);
            if (t >= config.sim_duration) {
                break;
            }
            heading = normalize_angle(heading + rng.uniform(-kMaxTurn, kMaxTurn));
            speed = speeds[rng.uniform_index(speeds.size())];
            plan.segments.push_back(TrackerSegment{t, speed, heading});
        }
        scenario.tracker_plans.push_back(std::move(plan));
    }
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const Eigen::Vector2d& p : config.initial_positions) {
        centroid += p;
    }
    centroid /= static_cast<double>(n);
    scenario.relay_initial.position = centroid;
    scenario.relay_initial.heading = 0.0;
    scenario.relay_initial.speed = 30.0;
    return scenario;
}

namespace {

std::string joined(const std::string& context, const std::string& key) {
    return context.empty() ? key : context + "." + key;
}

const json& require_field(const json& obj, const std::string& context, const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ConfigError(joined(context, key), "missing required field");
    }
    return *it;
}

void reject_unknown(const json& obj, const std::string& context,
                    std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* name : allowed) {
            if (item.key() == name) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ConfigError(joined(context, item.key()), "unknown field");
        }
    }
}

double get_number(const json& obj, const std::string& context, const std::string& key) {
    const json& value = require_field(obj, context, key);
    if (!value.is_number()) {
        throw ConfigError(joined(context, key), "must be a number");
    }
    return value.get<double>();
}

int get_integer(const json& obj, const std::string& context, const std::string& key) {
    const json& value = require_field(obj, context, key);
    if (!value.is_number_integer()) {
        throw ConfigError(joined(context, key), "must be an integer");
    }
    return value.get<int>();
}

std::string get_string(const json& obj, const std::string& context, const std::string& key) {
    const json& value = require_field(obj, context, key);
    if (!value.is_string()) {
        throw ConfigError(joined(context, key), "must be a string");
    }
    return value.get<std::string>();
}

std::vector<double> get_number_array(const json& obj, const std::string& context,
                                     const std::string& key) {
    const json& value = require_field(obj, context, key);
    if (!value.is_array() || value.empty()) {
        throw ConfigError(joined(context, key), "must be a non-empty array of numbers");
    }
    std::vector<double> out;
    out.reserve(value.size());
    for (const json& element : value) {
        if (!element.is_number()) {
            throw ConfigError(joined(context, key), "must be a non-empty array of numbers");
        }
        out.push_back(element.get<double>());
    }
    return out;
}

double get_nonnegative(const json& obj, const std::string& context, const std::string& key) {
    const double value = get_number(obj, context, key);
    if (!(value >= 0.0)) {
        throw ConfigError(joined(context, key), "must be non-negative");
    }
    return value;
}

} // namespace

RunConfig reference_run_config() {
    RunConfig config;
    config.scenario = reference_preset();
    config.planner.step_dt = config.scenario.step_dt;
    config.planner.comm_range = config.scenario.comm_range;
    config.noise.dt = config.scenario.step_dt;
    return config;
}

RunConfig run_config_from_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("JSON parse failure: ") + e.what());
    }
    if (!root.is_object()) {
        throw ConfigError("config", "top level must be a JSON object");
    }
    reject_unknown(root, "",
                   {"n_trackers", "initial_positions_m", "speed_class", "sim_duration_s",
                    "step_dt_s", "estimate_period_s", "comm_range_m", "seed",
                    "maneuver_period_s", "planner", "noise"});

    RunConfig config;
    config.scenario.n_trackers = get_integer(root, "", "n_trackers");

    const json& positions = require_field(root, "", "initial_positions_m");
    if (!positions.is_array()) {
        throw ConfigError("initial_positions_m", "must be an array of [x, y] pairs");
    }
    config.scenario.initial_positions.clear();
    for (const json& entry : positions) {
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() ||
            !entry[1].is_number()) {
            throw ConfigError("initial_positions_m", "must be an array of [x, y] pairs");
        }
        config.scenario.initial_positions.emplace_back(entry[0].get<double>(),
                                                       entry[1].get<double>());
    }

    config.scenario.speed_class = speed_class_from_string(get_string(root, "", "speed_class"));
    config.scenario.sim_duration = get_number(root, "", "sim_duration_s");
    config.scenario.step_dt = get_number(root, "", "step_dt_s");
    config.scenario.estimate_period = get_number(root, "", "estimate_period_s");
    config.scenario.comm_range = get_number(root, "", "comm_range_m");

    const json& seed = require_field(root, "", "seed");
    if (!seed.is_number_unsigned()) {
        throw ConfigError("seed", "must be a non-negative integer");
    }
    config.scenario.seed = seed.get<std::uint64_t>();

    config.scenario.maneuver_period_nominal = get_number(root, "", "maneuver_period_s");

    const json& planner = require_field(root, "", "planner");
    if (!planner.is_object()) {
        throw ConfigError("planner", "must be an object");
    }
    reject_unknown(planner, "planner",
                   {"algorithm", "horizon_steps", "epsilon", "speed_set_mps", "delta_set_deg",
                    "k_uncertainty", "quad_tol", "plan_at_refresh_only"});
    config.planner.algorithm = algorithm_from_string(get_string(planner, "planner", "algorithm"));
    config.planner.horizon_steps = get_integer(planner, "planner", "horizon_steps");
    config.planner.epsilon = get_number(planner, "planner", "epsilon");
    config.planner.speed_set = get_number_array(planner, "planner", "speed_set_mps");
    config.delta_set_deg = get_number_array(planner, "planner", "delta_set_deg");
    config.planner.delta_set.clear();
    for (double deg : config.delta_set_deg) {
        config.planner.delta_set.push_back(deg * (kPi / 180.0));
    }
    config.planner.uncertainty_gain = get_number(planner, "planner", "k_uncertainty");
    config.planner.quad_tol = get_number(planner, "planner", "quad_tol");
    if (planner.contains("plan_at_refresh_only")) {
        const json& flag = planner["plan_at_refresh_only"];
        if (!flag.is_boolean()) {
            throw ConfigError("planner.plan_at_refresh_only", "must be a boolean");
        }
        config.plan_at_refresh_only = flag.get<bool>();
    }
    config.planner.step_dt = config.scenario.step_dt;
    config.planner.comm_range = config.scenario.comm_range;

    if (root.contains("noise")) {
        const json& noise = root["noise"];
        if (!noise.is_object()) {
            throw ConfigError("noise", "must be an object");
        }
        reject_unknown(noise, "noise", {"sigma_acc_mps2", "sigma_gps_m", "sigma_vel_mps"});
        config.noise.sigma_acc = get_nonnegative(noise, "noise", "sigma_acc_mps2");
        config.noise.sigma_gps = get_nonnegative(noise, "noise", "sigma_gps_m");
        config.noise.sigma_vel = get_nonnegative(noise, "noise", "sigma_vel_mps");
    }
    config.noise.dt = config.scenario.step_dt;
    return config;
}

std::string run_config_to_json(const RunConfig& config) {
    json root;
    root["n_trackers"] = config.scenario.n_trackers;
    json positions = json::array();
    for (const Eigen::Vector2d& p : config.scenario.initial_positions) {
        positions.push_back(json::array({p.x(), p.y()}));
    }
    root["initial_positions_m"] = positions;
    root["speed_class"] = speed_class_to_string(config.scenario.speed_class);
    root["sim_duration_s"] = config.scenario.sim_duration;
    root["step_dt_s"] = config.scenario.step_dt;
    root["estimate_period_s"] = config.scenario.estimate_period;
    root["comm_range_m"] = config.scenario.comm_range;
    root["seed"] = config.scenario.seed;
    root["maneuver_period_s"] = config.scenario.maneuver_period_nominal;
    root["planner"]["algorithm"] = algorithm_to_string(config.planner.algorithm);
    root["planner"]["horizon_steps"] = config.planner.horizon_steps;
    root["planner"]["epsilon"] = config.planner.epsilon;
    root["planner"]["speed_set_mps"] = config.planner.speed_set;
    root["planner"]["delta_set_deg"] = config.delta_set_deg;
    root["planner"]["k_uncertainty"] = config.planner.uncertainty_gain;
    root["planner"]["quad_tol"] = config.planner.quad_tol;
    root["planner"]["plan_at_refresh_only"] = config.plan_at_refresh_only;
    root["noise"]["sigma_acc_mps2"] = config.noise.sigma_acc;
    root["noise"]["sigma_gps_m"] = config.noise.sigma_gps;
    root["noise"]["sigma_vel_mps"] = config.noise.sigma_vel;
    return root.dump(2) + "\n";
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) {
        throw ConfigError("config", "cannot read file: " + path);
    }
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return run_config_from_json(buffer.str());
}

Algorithm algorithm_from_string(const std::string& name) {
    if (name == "single_hop") return Algorithm::single_hop;
    if (name == "nearest_point") return Algorithm::nearest_point;
    if (name == "midpoint") return Algorithm::midpoint;
    if (name == "hybrid") return Algorithm::hybrid;
    if (name == "center_of_mass") return Algorithm::center_of_mass;
    throw ConfigError("algorithm", "unknown algorithm: " + name);
}

std::string algorithm_to_string(Algorithm algorithm) {
    switch (algorithm) {
        case Algorithm::single_hop: return "single_hop";
        case Algorithm::nearest_point: return "nearest_point";
        case Algorithm::midpoint: return "midpoint";
        case Algorithm::hybrid: return "hybrid";
        case Algorithm::center_of_mass: return "center_of_mass";
    }
    throw ConfigError("algorithm", "unknown algorithm value");
}

SpeedClass speed_class_from_string(const std::string& name) {
    if (name == "slow") return SpeedClass::slow;
    if (name == "normal") return SpeedClass::normal;
    if (name == "fast") return SpeedClass::fast;
    if (name == "mixed") return SpeedClass::mixed;
    throw ConfigError("speed_class", "unknown speed class: " + name);
}

std::string speed_class_to_string(SpeedClass speed_class) {
    switch (speed_class) {
        case SpeedClass::slow: return "slow";
        case SpeedClass::normal: return "normal";
        case SpeedClass::fast: return "fast";
        case SpeedClass::mixed: return "mixed";
    }
    throw ConfigError("speed_class", "unknown speed class value");
}

} // namespace relaysim
