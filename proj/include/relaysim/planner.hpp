#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "relaysim/connectivity.hpp"
#include "relaysim/errors.hpp"
#include "relaysim/mobility.hpp"

namespace relaysim {

/// Relay guidance algorithms. The first four maximize a connectivity
/// objective over the control tree; center_of_mass greedily chases the
/// centroid of the estimated tracker positions.
enum class Algorithm { single_hop, nearest_point, midpoint, hybrid, center_of_mass };

/// Receding-horizon planner parameters.
struct PlannerConfig {
    Algorithm algorithm = Algorithm::hybrid;
    int horizon_steps = 1; // F; 0 selects the no-horizon mode (one-step lookahead)
    double epsilon = 1e-4; // weight of the end-distance (Mayer) term
    std::vector<double> speed_set{20.0, 30.0, 40.0};             // [m/s]
    std::vector<double> delta_set{-0.5235987755982988, 0.0,
                                  0.5235987755982988};           // [rad]
    double step_dt = 2.0;          // control step t_s [s]
    double comm_range = 100000.0;  // R_com [m]
    double uncertainty_gain = 1.0; // k in the uncertainty-radius law
    double quad_tol = 1e-6;        // tracker-tracker link quadrature tolerance
    KinematicLimits limits{};      // relay kinematic envelope
};

/// What the relay knows about one tracker at planning time: filtered
/// position and velocity plus the time since that estimate was refreshed.
struct TrackerEstimate {
    Eigen::Vector2d position = Eigen::Vector2d::Zero(); // [m]
    Eigen::Vector2d velocity = Eigen::Vector2d::Zero(); // [m/s]
    double tau = 0.0;                                   // [s]
};

/// Split of the trackers used by the multi-hop objectives: far_drone is the
/// tracker maximizing the summed distance to all other trackers (ties to the
/// lowest index); s2 holds the remaining indices and near_s2_drone the one
/// of them closest to the relay (-1 when s2 is empty).
struct TrackerPartition {
    int far_drone = 0;
    int near_s2_drone = -1;
    std::vector<int> s2;
};

/// Result of one planning epoch. objective = lagrange + mayer of the chosen
/// sequence; candidates_total counts the full control tree, while
/// candidates_evaluated counts the leaves actually scored (the difference is
/// pruned by an exact bound that never changes the argmax).
struct PlanDecision {
    ControlSequence controls;
    double objective = 0.0;
    double lagrange = 0.0;
    double mayer = 0.0;
    std::size_t candidates_total = 0;
    std::size_t candidates_evaluated = 0;
    bool multi_hop_fallback = false; // hybrid only: true when it re-planned multi-hop
};

/// Uncertainty disks per horizon step (outer index: step 1..F) and tracker:
/// centers advanced ballistically by the estimated velocity, radii grown by
/// the radius law with the elapsed time tau + step * step_dt.
std::vector<std::vector<UncertaintyDisk>> propagate_disks(
    const std::vector<TrackerEstimate>& estimates, const PlannerConfig& cfg);

/// Partition of the trackers from current estimates and relay position.
TrackerPartition partition_trackers(const std::vector<TrackerEstimate>& estimates,
                                    const RelayState& relay);

/// Direct-link objective: per-step sum of the product of relay-tracker link
/// probabilities, minus epsilon times the largest end-step distance from the
/// relay to any tracker center, normalized by the communication range.
/// candidate_states[m] and disks[m] describe horizon step m+1; sizes must
/// match and be at least 1.
double objective_single_hop(const std::vector<RelayState>& candidate_states,
                            const std::vector<std::vector<UncertaintyDisk>>& disks,
                            const PlannerConfig& cfg);

/// Multi-hop objective: per-step sum of the exact all-network connectivity
/// probability over relay and trackers, minus epsilon times the larger of
/// the end-step distances to the far drone and to the nearest drone of the
/// remaining set, normalized by the communication range.
double objective_nearest_point(const std::vector<RelayState>& candidate_states,
                               const std::vector<std::vector<UncertaintyDisk>>& disks,
                               const TrackerPartition& partition, const PlannerConfig& cfg);

/// Like objective_nearest_point but the second end-distance target is the
/// centroid of the remaining set's end-step centers instead of one drone.
double objective_midpoint(const std::vector<RelayState>& candidate_states,
                          const std::vector<std::vector<UncertaintyDisk>>& disks,
                          const TrackerPartition& partition, const PlannerConfig& cfg);

/// Plan one epoch with cfg.algorithm over the full control tree: simulates
/// every control sequence from relay_state, scores it, and returns the
/// argmax; ties go to the first sequence in lexicographic enumeration order.
/// Throws ConfigError on invalid configuration or when the candidate count
/// (|speeds| * |deltas|)^F exceeds 10^6, std::invalid_argument on invalid
/// estimates.
PlanDecision plan(const std::vector<TrackerEstimate>& estimates, const RelayState& relay_state,
                  const PlannerConfig& cfg);

/// Two-phase planner: adopt the single-hop decision while its best candidate
/// keeps a positive link product at every horizon step, otherwise re-plan
/// with the midpoint objective (checked afresh every epoch).
PlanDecision plan_hybrid(const std::vector<TrackerEstimate>& estimates,
                         const RelayState& relay_state, const PlannerConfig& cfg);

/// Baseline: choose the control sequence ending nearest the current centroid
/// of the estimated tracker positions. objective = -(final distance), stored
/// in the mayer slot.
PlanDecision plan_center_of_mass(const std::vector<TrackerEstimate>& estimates,
                                 const RelayState& relay_state, const PlannerConfig& cfg);

} // namespace relaysim
