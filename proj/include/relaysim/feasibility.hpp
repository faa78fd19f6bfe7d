#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "relaysim/connectivity.hpp"

namespace relaysim {

/// Answer of the geometric placement oracle for one snapshot of true tracker
/// positions: can SOME relay placement produce a connected topology? The
/// witness_point, when present, is a relay position achieving the mode the
/// query was made for, so placing the relay there makes
/// ground_truth_connected true in that mode.
struct FeasibilityVerdict {
    bool single_hop_feasible = false;
    bool multi_hop_feasible = false;
    std::optional<Eigen::Vector2d> witness_point;
};

/// Direct-link placement test: feasible iff the minimum enclosing circle of
/// the positions has radius <= comm_range (then its center reaches every
/// tracker). witness = that center when feasible. The multi-hop flag is
/// also filled in truthfully. Distances within a 1e-9 relative slack of the
/// threshold count as feasible (closed-region convention).
/// Throws std::invalid_argument on empty/non-finite input or
/// comm_range <= 0.
FeasibilityVerdict single_hop_feasible(const std::vector<Eigen::Vector2d>& true_positions,
                                       double comm_range);

/// Relayed placement test: trackers within comm_range of each other link up
/// directly, and the relay must join every resulting component at once.
/// Three trackers use closed-form casework over the sorted pairwise
/// distances; other sizes use the region-intersection search of
/// multi_hop_feasible_generic. witness = a placement joining all components
/// when feasible. The single-hop flag is also filled in truthfully.
FeasibilityVerdict multi_hop_feasible(const std::vector<Eigen::Vector2d>& true_positions,
                                      double comm_range);

/// General-N relayed placement test: feasible iff the intersection over
/// tracker-graph components of the unions of comm_range disks around each
/// component's nodes is non-empty. Decided exactly by testing candidate
/// points: all tracker positions plus all pairwise circle intersections and
/// midpoints. Exposed separately so the three-tracker casework can be
/// cross-validated against it.
FeasibilityVerdict multi_hop_feasible_generic(
    const std::vector<Eigen::Vector2d>& true_positions, double comm_range);

/// Maximum achievable connected time for a trace of true tracker positions:
/// the number of timesteps whose snapshot is feasible in the given mode,
/// times step_dt. Throws std::invalid_argument on an empty trace, an empty
/// snapshot, comm_range <= 0, or step_dt <= 0.
double max_lifetime(const std::vector<std::vector<Eigen::Vector2d>>& position_trace,
                    double comm_range, TopologyMode mode, double step_dt);

} // namespace relaysim
