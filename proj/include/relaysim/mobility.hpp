#pragma once

#include <Eigen/Dense>
#include <vector>

#include "relaysim/errors.hpp"
#include "relaysim/estimator.hpp"

namespace relaysim {

/// Hard kinematic envelope of the relay platform.
struct KinematicLimits {
    double v_min = 20.0;                    // minimum commanded speed [m/s]
    double v_max = 40.0;                    // maximum commanded speed [m/s]
    double theta_max = 0.5235987755982988;  // max per-step heading change [rad] (30 deg)
};

/// Relay pose on the constant-altitude plane.
struct RelayState {
    Eigen::Vector2d position = Eigen::Vector2d::Zero(); // [m]
    double heading = 0.0;                               // [rad], in (-pi, pi]
    double speed = 30.0;                                // [m/s]
};

/// One element of the discrete control set: commanded speed plus heading
/// change applied at the start of the step.
struct ControlInput {
    double speed = 30.0;        // [m/s]
    double heading_delta = 0.0; // [rad]
};

using ControlSequence = std::vector<ControlInput>;

/// One constant-velocity leg of a tracker trajectory; active from start_time
/// until the next segment begins (left-closed interval).
struct TrackerSegment {
    double start_time = 0.0; // [s]
    double speed = 0.0;      // [m/s]
    double heading = 0.0;    // [rad]
};

/// Piecewise-constant-velocity tracker trajectory over a finite time window.
struct TrackerPlan {
    Eigen::Vector2d origin = Eigen::Vector2d::Zero(); // position at the first start_time
    std::vector<TrackerSegment> segments;             // start times strictly increasing
    double end_time = 0.0;                            // inclusive end of the window [s]
};

/// Wrap an angle into (-pi, pi].
double normalize_angle(double angle);

/// Advance the relay by one control step: the heading change is applied
/// first, then the relay moves at the commanded speed along the new heading
/// for dt seconds. Throws std::invalid_argument when the input violates the
/// kinematic limits (speed outside [v_min, v_max] or |heading_delta| beyond
/// theta_max), or on non-finite/non-positive inputs.
RelayState step_relay(const RelayState& state, const ControlInput& u, double dt,
                      const KinematicLimits& limits = {});

/// Enumerate every control sequence of the given horizon over the cross
/// product of the speed and heading-change sets, in lexicographic order:
/// earlier steps are most significant, and within a step the speed set is the
/// outer loop. horizon_steps = 0 yields the single empty sequence. Throws
/// std::invalid_argument on empty sets or when the enumeration would exceed
/// an internal size guard.
std::vector<ControlSequence> enumerate_control_sequences(const std::vector<double>& speed_set,
                                                         const std::vector<double>& delta_set,
                                                         int horizon_steps);

/// Exact tracker state at time t: continuous position from piecewise
/// integration of the plan, piecewise-constant velocity taken from the
/// segment whose left-closed interval contains t. Throws
/// std::invalid_argument when t lies outside the plan window or the plan is
/// malformed.
KinematicState tracker_position(const TrackerPlan& plan, double t);

} // namespace relaysim
