#include "relaysim/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace relaysim {
namespace {

constexpr double kAngleSlack = 1e-12;
constexpr double kBoundSlack = 1e-9;
constexpr double kMaxCandidates = 1e6;
constexpr int kMaxHorizonSteps = 1000;

void check_finite_values(const std::vector<double>& values, const char* field) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw ConfigError(field, "entries must be finite");
        }
    }
}

/// Validates cfg and resolves the no-horizon mode (F = 0 plans one step).
PlannerConfig normalized_config(const PlannerConfig& cfg) {
    PlannerConfig c = cfg;
    if (!(c.limits.v_min >= 0.0) || !(c.limits.v_max >= c.limits.v_min) ||
        !std::isfinite(c.limits.v_max) || !(c.limits.theta_max >= 0.0) ||
        !std::isfinite(c.limits.theta_max)) {
        throw ConfigError("limits", "need 0 <= v_min <= v_max and theta_max >= 0, all finite");
    }
    if (c.speed_set.empty()) {
        throw ConfigError("speed_set", "must not be empty");
    }
    check_finite_values(c.speed_set, "speed_set");
    for (double s : c.speed_set) {
        if (s < c.limits.v_min || s > c.limits.v_max) {
            throw ConfigError("speed_set", "speed " + std::to_string(s) +
                                               " outside [v_min, v_max]");
        }
    }
    if (c.delta_set.empty()) {
        throw ConfigError("delta_set", "must not be empty");
    }
    check_finite_values(c.delta_set, "delta_set");
    for (double d : c.delta_set) {
        if (std::abs(d) > c.limits.theta_max + kAngleSlack) {
            throw ConfigError("delta_set", "heading change " + std::to_string(d) +
                                               " exceeds theta_max");
        }
    }
    if (!(c.step_dt > 0.0) || !std::isfinite(c.step_dt)) {
        throw ConfigError("step_dt", "must be positive and finite");
    }
    if (!(c.epsilon > 0.0) || !(c.epsilon < 1.0)) {
        throw ConfigError("epsilon", "must lie strictly between 0 and 1");
    }
    if (!(c.comm_range > 0.0) || !std::isfinite(c.comm_range)) {
        throw ConfigError("comm_range", "must be positive and finite");
    }
    if (!(c.uncertainty_gain >= 0.0) || !std::isfinite(c.uncertainty_gain)) {
        throw ConfigError("uncertainty_gain", "must be non-negative and finite");
    }
    if (!(c.quad_tol > 0.0) || !std::isfinite(c.quad_tol)) {
        throw ConfigError("quad_tol", "must be positive and finite");
    }
    if (c.horizon_steps < 0) {
        throw ConfigError("horizon_steps", "must be non-negative");
    }
    if (c.horizon_steps == 0) {
        c.horizon_steps = 1; // no-horizon mode: a single-step lookahead
    }
    if (c.horizon_steps > kMaxHorizonSteps) {
        throw ConfigError("horizon_steps", "must be at most 1000");
    }
    const double alphabet =
        static_cast<double>(c.speed_set.size()) * static_cast<double>(c.delta_set.size());
    if (std::pow(alphabet, c.horizon_steps) > kMaxCandidates) {
        throw ConfigError("horizon_steps",
                          "candidate count (|speed_set|*|delta_set|)^F exceeds 10^6");
    }
    return c;
}

void check_estimates(const std::vector<TrackerEstimate>& estimates) {
    if (estimates.empty()) {
        throw std::invalid_argument("plan: need at least one tracker estimate");
    }
    for (const TrackerEstimate& e : estimates) {
        if (!e.position.allFinite() || !e.velocity.allFinite()) {
            throw std::invalid_argument("plan: tracker estimate must be finite");
        }
        if (!(e.tau >= 0.0) || !std::isfinite(e.tau)) {
            throw std::invalid_argument("plan: tau must be non-negative and finite");
        }
    }
}

void check_relay(const RelayState& relay) {
    if (!relay.position.allFinite() || !std::isfinite(relay.heading) ||
        !std::isfinite(relay.speed)) {
        throw std::invalid_argument("plan: relay state must be finite");
    }
}

/// Tracker-tracker link probabilities for one step, pairs in lexicographic
/// order over tracker indices (i < j). Candidate-independent, so callers can
/// compute them once per horizon step.
std::vector<double> tracker_pair_probabilities(const std::vector<UncertaintyDisk>& disks,
                                               double comm_range, double quad_tol) {
    const std::size_t n = disks.size();
    std::vector<double> probs;
    probs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            probs.push_back(tracker_link_probability(disks[i], disks[j], comm_range, quad_tol));
        }
    }
    return probs;
}

/// Exact probability that the whole graph (relay = node 0, trackers after)
/// is connected, with the tracker-tracker entries supplied precomputed.
double network_rho(const Eigen::Vector2d& relay_pos, const std::vector<UncertaintyDisk>& disks,
                   const std::vector<double>& pair_probs, double comm_range) {
    const int n = static_cast<int>(disks.size()) + 1;
    EdgeProbabilityVector edges;
    edges.node_count = n;
    edges.probabilities.resize(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n - 1; ++i) {
        edges.probabilities[static_cast<std::size_t>(edge_index(0, i + 1, n))] =
            relay_link_probability(relay_pos, disks[static_cast<std::size_t>(i)], comm_range);
    }
    std::size_t next_pair = 0;
    for (int i = 0; i < n - 1; ++i) {
        for (int j = i + 1; j < n - 1; ++j) {
            edges.probabilities[static_cast<std::size_t>(edge_index(i + 1, j + 1, n))] =
                pair_probs[next_pair++];
        }
    }
    return network_connectivity(edges, EdgeStateTable::shared(n));
}

/// Everything the candidate search needs that does not vary per candidate.
struct SearchContext {
    Algorithm objective = Algorithm::single_hop; // single_hop, nearest_point,
                                                 // midpoint, or center_of_mass
    const PlannerConfig* cfg = nullptr;
    int horizon = 1;
    std::vector<std::vector<UncertaintyDisk>> disks; // [horizon][trackers]
    std::vector<std::vector<double>> pair_probs;     // [horizon][pairs], multi-hop only
    std::vector<Eigen::Vector2d> mayer_targets;      // end-step distance targets
    double rho_cap = 1.0;                            // per-step connectivity bound
};

double step_rho(const SearchContext& ctx, int step, const Eigen::Vector2d& relay_pos) {
    const std::vector<UncertaintyDisk>& disks = ctx.disks[static_cast<std::size_t>(step)];
    if (ctx.objective == Algorithm::single_hop) {
        return single_hop_connectivity(relay_pos, disks, ctx.cfg->comm_range);
    }
    return network_rho(relay_pos, disks, ctx.pair_probs[static_cast<std::size_t>(step)],
                       ctx.cfg->comm_range);
}

// The end-distance term, written with the exact expression the public
// evaluators use so a search result and a direct evaluation agree bitwise.
double mayer_of(const SearchContext& ctx, const Eigen::Vector2d& end_pos) {
    double max_dist = 0.0;
    for (const Eigen::Vector2d& target : ctx.mayer_targets) {
        max_dist = std::max(max_dist, (end_pos - target).norm());
    }
    if (ctx.objective == Algorithm::center_of_mass) {
        return -max_dist;
    }
    return -(ctx.cfg->epsilon * max_dist / ctx.cfg->comm_range);
}

/// Upper bound on the end-distance term over every descendant of a node at
/// remaining_steps steps before the horizon end: the relay can close at most
/// v_max * step_dt per step toward any fixed end-step target.
double mayer_bound(const SearchContext& ctx, const Eigen::Vector2d& pos, int remaining_steps) {
    const double reach =
        ctx.cfg->limits.v_max * ctx.cfg->step_dt * static_cast<double>(remaining_steps);
    double max_lb = 0.0;
    for (const Eigen::Vector2d& target : ctx.mayer_targets) {
        max_lb = std::max(max_lb, std::max(0.0, (pos - target).norm() - reach));
    }
    if (ctx.objective == Algorithm::center_of_mass) {
        return -max_lb;
    }
    return -(ctx.cfg->epsilon * max_lb / ctx.cfg->comm_range);
}

struct SearchResult {
    ControlSequence best_seq;
    double best_objective = -std::numeric_limits<double>::infinity();
    double best_lagrange = 0.0;
    double best_mayer = 0.0;
    double best_min_rho = 0.0;
    std::size_t evaluated = 0;
    bool found = false;
};

/// Depth-first walk of the control tree in lexicographic order (earlier
/// steps most significant, speeds outer within a step). A child is skipped
/// only when an upper bound on every completion is <= the incumbent, which
/// cannot change the argmax: pruned candidates at best tie, and ties resolve
/// to the earlier sequence, which the walk has already visited.
void search(const SearchContext& ctx, int depth, const RelayState& state, double lagrange,
            double min_rho, ControlSequence& prefix, SearchResult& out) {
    if (depth == ctx.horizon) {
        const double mayer = mayer_of(ctx, state.position);
        const double objective = lagrange + mayer;
        ++out.evaluated;
        if (!out.found || objective > out.best_objective) {
            out.found = true;
            out.best_seq = prefix;
            out.best_objective = objective;
            out.best_lagrange = lagrange;
            out.best_mayer = mayer;
            out.best_min_rho = min_rho;
        }
        return;
    }
    const int remaining = ctx.horizon - depth - 1;
    for (double speed : ctx.cfg->speed_set) {
        for (double delta : ctx.cfg->delta_set) {
            const ControlInput u{speed, delta};
            const RelayState next = step_relay(state, u, ctx.cfg->step_dt, ctx.cfg->limits);
            const double rho = (ctx.objective == Algorithm::center_of_mass)
                                   ? 0.0
                                   : step_rho(ctx, depth, next.position);
            const double next_lagrange = lagrange + rho;
            if (remaining > 0 && out.found) {
                // kBoundSlack absorbs accumulation rounding so a candidate a
                // few ulps above the incumbent can never be pruned; exact
                // ties are then settled at the leaves, where the earlier
                // sequence wins.
                const double bound = next_lagrange +
                                     ctx.rho_cap * static_cast<double>(remaining) +
                                     mayer_bound(ctx, next.position, remaining) + kBoundSlack;
                if (bound <= out.best_objective) {
                    continue;
                }
            }
            prefix.push_back(u);
            search(ctx, depth + 1, next, next_lagrange, std::min(min_rho, rho), prefix, out);
            prefix.pop_back();
        }
    }
}

/// Builds the candidate-independent context for one objective. cfg must be
/// normalized already.
SearchContext make_context(Algorithm objective, const std::vector<TrackerEstimate>& estimates,
                           const RelayState& relay, const PlannerConfig& cfg) {
    SearchContext ctx;
    ctx.objective = objective;
    ctx.cfg = &cfg;
    ctx.horizon = cfg.horizon_steps;
    ctx.disks = propagate_disks(estimates, cfg);
    const std::vector<UncertaintyDisk>& end_disks =
        ctx.disks[static_cast<std::size_t>(ctx.horizon - 1)];

    if (objective == Algorithm::nearest_point || objective == Algorithm::midpoint) {
        if (estimates.size() + 1 > 6) {
            throw ConfigError("algorithm",
                              "multi-hop objectives support at most 5 trackers");
        }
        ctx.pair_probs.reserve(static_cast<std::size_t>(ctx.horizon));
        for (int m = 0; m < ctx.horizon; ++m) {
            ctx.pair_probs.push_back(
                tracker_pair_probabilities(ctx.disks[static_cast<std::size_t>(m)],
                                           cfg.comm_range, cfg.quad_tol));
        }
    }

    ctx.rho_cap = 1.0;
    switch (objective) {
    case Algorithm::single_hop:
        for (const UncertaintyDisk& d : end_disks) {
            ctx.mayer_targets.push_back(d.center);
        }
        break;
    case Algorithm::nearest_point: {
        const TrackerPartition part = partition_trackers(estimates, relay);
        ctx.mayer_targets.push_back(end_disks[static_cast<std::size_t>(part.far_drone)].center);
        if (part.near_s2_drone >= 0) {
            ctx.mayer_targets.push_back(
                end_disks[static_cast<std::size_t>(part.near_s2_drone)].center);
        }
        break;
    }
    case Algorithm::midpoint: {
        const TrackerPartition part = partition_trackers(estimates, relay);
        ctx.mayer_targets.push_back(end_disks[static_cast<std::size_t>(part.far_drone)].center);
        if (!part.s2.empty()) {
            Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
            for (int i : part.s2) {
                centroid += end_disks[static_cast<std::size_t>(i)].center;
            }
            centroid /= static_cast<double>(part.s2.size());
            ctx.mayer_targets.push_back(centroid);
        }
        break;
    }
    case Algorithm::center_of_mass: {
        Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
        for (const TrackerEstimate& e : estimates) {
            centroid += e.position;
        }
        centroid /= static_cast<double>(estimates.size());
        ctx.mayer_targets.push_back(centroid);
        ctx.rho_cap = 0.0;
        break;
    }
    case Algorithm::hybrid:
        throw std::logic_error("make_context: hybrid is resolved before the search");
    }
    return ctx;
}

std::size_t total_candidates(const PlannerConfig& cfg) {
    std::size_t total = 1;
    const std::size_t alphabet = cfg.speed_set.size() * cfg.delta_set.size();
    for (int i = 0; i < cfg.horizon_steps; ++i) {
        total *= alphabet; // bounded by the 10^6 cap checked in normalized_config
    }
    return total;
}

/// Runs one exhaustive search; cfg must be normalized.
PlanDecision run_search(Algorithm objective, const std::vector<TrackerEstimate>& estimates,
                        const RelayState& relay, const PlannerConfig& cfg,
                        double* min_rho_out = nullptr) {
    const SearchContext ctx = make_context(objective, estimates, relay, cfg);
    SearchResult result;
    ControlSequence prefix;
    prefix.reserve(static_cast<std::size_t>(ctx.horizon));
    search(ctx, 0, relay, 0.0, std::numeric_limits<double>::infinity(), prefix, result);

    PlanDecision decision;
    decision.controls = result.best_seq;
    decision.objective = result.best_objective;
    decision.lagrange = result.best_lagrange;
    decision.mayer = result.best_mayer;
    decision.candidates_total = total_candidates(cfg);
    decision.candidates_evaluated = result.evaluated;
    if (min_rho_out != nullptr) {
        *min_rho_out = result.best_min_rho;
    }
    return decision;
}

PlanDecision hybrid_impl(const std::vector<TrackerEstimate>& estimates, const RelayState& relay,
                         const PlannerConfig& cfg) {
    if (estimates.size() + 1 > 6) {
        throw ConfigError("algorithm", "multi-hop objectives support at most 5 trackers");
    }
    double min_rho = 0.0;
    PlanDecision direct = run_search(Algorithm::single_hop, estimates, relay, cfg, &min_rho);
    if (min_rho > 0.0) {
        return direct;
    }
    PlanDecision fallback = run_search(Algorithm::midpoint, estimates, relay, cfg);
    fallback.multi_hop_fallback = true;
    return fallback;
}

void check_evaluation_inputs(const std::vector<RelayState>& candidate_states,
                             const std::vector<std::vector<UncertaintyDisk>>& disks,
                             const PlannerConfig& cfg) {
    if (candidate_states.empty() || candidate_states.size() != disks.size()) {
        throw std::invalid_argument(
            "objective: candidate_states and disks must have equal non-zero length");
    }
    const std::size_t n = disks.front().size();
    if (n == 0) {
        throw std::invalid_argument("objective: need at least one tracker disk per step");
    }
    for (const std::vector<UncertaintyDisk>& step : disks) {
        if (step.size() != n) {
            throw std::invalid_argument("objective: tracker count must not vary over steps");
        }
    }
    for (const RelayState& s : candidate_states) {
        if (!s.position.allFinite()) {
            throw std::invalid_argument("objective: candidate states must be finite");
        }
    }
    if (!(cfg.epsilon > 0.0) || !(cfg.epsilon < 1.0)) {
        throw ConfigError("epsilon", "must lie strictly between 0 and 1");
    }
    if (!(cfg.comm_range > 0.0) || !std::isfinite(cfg.comm_range)) {
        throw ConfigError("comm_range", "must be positive and finite");
    }
}

void check_partition(const TrackerPartition& partition, std::size_t tracker_count) {
    const int n = static_cast<int>(tracker_count);
    if (partition.far_drone < 0 || partition.far_drone >= n) {
        throw std::invalid_argument("objective: partition far_drone out of range");
    }
    if (partition.near_s2_drone >= n) {
        throw std::invalid_argument("objective: partition near_s2_drone out of range");
    }
    for (int i : partition.s2) {
        if (i < 0 || i >= n) {
            throw std::invalid_argument("objective: partition s2 index out of range");
        }
    }
}

} // namespace

std::vector<std::vector<UncertaintyDisk>> propagate_disks(
    const std::vector<TrackerEstimate>& estimates, const PlannerConfig& cfg) {
    check_estimates(estimates);
    if (!(cfg.step_dt > 0.0) || !std::isfinite(cfg.step_dt)) {
        throw ConfigError("step_dt", "must be positive and finite");
    }
    if (!(cfg.uncertainty_gain >= 0.0) || !std::isfinite(cfg.uncertainty_gain)) {
        throw ConfigError("uncertainty_gain", "must be non-negative and finite");
    }
    if (cfg.horizon_steps < 0 || cfg.horizon_steps > kMaxHorizonSteps) {
        throw ConfigError("horizon_steps", "must lie in [0, 1000]");
    }
    const int horizon = std::max(cfg.horizon_steps, 1);
    std::vector<std::vector<UncertaintyDisk>> disks;
    disks.reserve(static_cast<std::size_t>(horizon));
    for (int m = 1; m <= horizon; ++m) {
        const double ahead = static_cast<double>(m) * cfg.step_dt;
        std::vector<UncertaintyDisk> step;
        step.reserve(estimates.size());
        for (const TrackerEstimate& e : estimates) {
            UncertaintyDisk d;
            d.center = e.position + e.velocity * ahead;
            d.radius =
                uncertainty_radius(cfg.uncertainty_gain, e.velocity.norm(), e.tau + ahead);
            step.push_back(d);
        }
        disks.push_back(std::move(step));
    }
    return disks;
}

TrackerPartition partition_trackers(const std::vector<TrackerEstimate>& estimates,
                                    const RelayState& relay) {
    check_estimates(estimates);
    check_relay(relay);
    const std::size_t n = estimates.size();
    TrackerPartition part;
    double best_sum = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            sum += (estimates[i].position - estimates[j].position).norm();
        }
        if (sum > best_sum) {
            best_sum = sum;
            part.far_drone = static_cast<int>(i);
        }
    }
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<int>(i) == part.far_drone) {
            continue;
        }
        part.s2.push_back(static_cast<int>(i));
        const double dist = (estimates[i].position - relay.position).norm();
        if (dist < best_dist) {
            best_dist = dist;
            part.near_s2_drone = static_cast<int>(i);
        }
    }
    return part;
}

double objective_single_hop(const std::vector<RelayState>& candidate_states,
                            const std::vector<std::vector<UncertaintyDisk>>& disks,
                            const PlannerConfig& cfg) {
    check_evaluation_inputs(candidate_states, disks, cfg);
    double lagrange = 0.0;
    for (std::size_t m = 0; m < candidate_states.size(); ++m) {
        lagrange +=
            single_hop_connectivity(candidate_states[m].position, disks[m], cfg.comm_range);
    }
    const Eigen::Vector2d end = candidate_states.back().position;
    double max_dist = 0.0;
    for (const UncertaintyDisk& d : disks.back()) {
        max_dist = std::max(max_dist, (end - d.center).norm());
    }
    return lagrange - cfg.epsilon * max_dist / cfg.comm_range;
}

double objective_nearest_point(const std::vector<RelayState>& candidate_states,
                               const std::vector<std::vector<UncertaintyDisk>>& disks,
                               const TrackerPartition& partition, const PlannerConfig& cfg) {
    check_evaluation_inputs(candidate_states, disks, cfg);
    check_partition(partition, disks.front().size());
    if (!(cfg.quad_tol > 0.0) || !std::isfinite(cfg.quad_tol)) {
        throw ConfigError("quad_tol", "must be positive and finite");
    }
    double lagrange = 0.0;
    for (std::size_t m = 0; m < candidate_states.size(); ++m) {
        const std::vector<double> pair_probs =
            tracker_pair_probabilities(disks[m], cfg.comm_range, cfg.quad_tol);
        lagrange +=
            network_rho(candidate_states[m].position, disks[m], pair_probs, cfg.comm_range);
    }
    const Eigen::Vector2d end = candidate_states.back().position;
    double max_dist =
        (end - disks.back()[static_cast<std::size_t>(partition.far_drone)].center).norm();
    if (partition.near_s2_drone >= 0) {
        max_dist = std::max(
            max_dist,
            (end - disks.back()[static_cast<std::size_t>(partition.near_s2_drone)].center)
                .norm());
    }
    return lagrange - cfg.epsilon * max_dist / cfg.comm_range;
}

double objective_midpoint(const std::vector<RelayState>& candidate_states,
                          const std::vector<std::vector<UncertaintyDisk>>& disks,
                          const TrackerPartition& partition, const PlannerConfig& cfg) {
    check_evaluation_inputs(candidate_states, disks, cfg);
    check_partition(partition, disks.front().size());
    if (!(cfg.quad_tol > 0.0) || !std::isfinite(cfg.quad_tol)) {
        throw ConfigError("quad_tol", "must be positive and finite");
    }
    double lagrange = 0.0;
    for (std::size_t m = 0; m < candidate_states.size(); ++m) {
        const std::vector<double> pair_probs =
            tracker_pair_probabilities(disks[m], cfg.comm_range, cfg.quad_tol);
        lagrange +=
            network_rho(candidate_states[m].position, disks[m], pair_probs, cfg.comm_range);
    }
    const Eigen::Vector2d end = candidate_states.back().position;
    double max_dist =
        (end - disks.back()[static_cast<std::size_t>(partition.far_drone)].center).norm();
    if (!partition.s2.empty()) {
        Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
        for (int i : partition.s2) {
            centroid += disks.back()[static_cast<std::size_t>(i)].center;
        }
        centroid /= static_cast<double>(partition.s2.size());
        max_dist = std::max(max_dist, (end - centroid).norm());
    }
    return lagrange - cfg.epsilon * max_dist / cfg.comm_range;
}

PlanDecision plan(const std::vector<TrackerEstimate>& estimates, const RelayState& relay_state,
                  const PlannerConfig& cfg) {
    const PlannerConfig c = normalized_config(cfg);
    check_estimates(estimates);
    check_relay(relay_state);
    switch (c.algorithm) {
    case Algorithm::hybrid:
        return hybrid_impl(estimates, relay_state, c);
    case Algorithm::center_of_mass:
        return run_search(Algorithm::center_of_mass, estimates, relay_state, c);
    default:
        return run_search(c.algorithm, estimates, relay_state, c);
    }
}

PlanDecision plan_hybrid(const std::vector<TrackerEstimate>& estimates,
                         const RelayState& relay_state, const PlannerConfig& cfg) {
    const PlannerConfig c = normalized_config(cfg);
    check_estimates(estimates);
    check_relay(relay_state);
    return hybrid_impl(estimates, relay_state, c);
}

PlanDecision plan_center_of_mass(const std::vector<TrackerEstimate>& estimates,
                                 const RelayState& relay_state, const PlannerConfig& cfg) {
    const PlannerConfig c = normalized_config(cfg);
    check_estimates(estimates);
    check_relay(relay_state);
    return run_search(Algorithm::center_of_mass, estimates, relay_state, c);
}

} // namespace relaysim
