#pragma once

#include <Eigen/Dense>
#include <vector>

#include "relaysim/errors.hpp"

namespace relaysim {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Position and velocity of one vehicle.
struct KinematicState {
    Eigen::Vector3d position = Eigen::Vector3d::Zero(); // [m]
    Eigen::Vector3d velocity = Eigen::Vector3d::Zero(); // [m/s]
};

/// Constant-velocity Kalman filter parameters. Each sigma is a per-axis
/// standard deviation applied identically to all three axes; scenarios hold
/// the vehicles at constant altitude, so the z entries simply stay quiet.
struct FilterConfig {
    double dt = 1.0;        // prediction step [s]
    double sigma_acc = 0.3; // acceleration (process) noise [m/s^2]
    double sigma_gps = 3.0; // position measurement noise [m]
    double sigma_vel = 0.3; // velocity measurement noise [m/s]
};

/// Filter mean and covariance over the stacked [position; velocity] state.
struct FilterState {
    KinematicState estimate;
    Mat6 covariance = Mat6::Zero();
};

/// One noisy observation of the full state: z = [position; velocity].
struct Measurement {
    Vec6 z = Vec6::Zero();
};

/// Initial filter state from the first measurement: mean = z, covariance =
/// diag(sigma_gps^2 I3, sigma_vel^2 I3). Equivalent to updating an
/// uninformative prior with z.
FilterState filter_init(const Measurement& z, const FilterConfig& cfg);

/// Prediction step: mean advanced by the constant-velocity transition with
/// optional known acceleration input; covariance by F P F^T + Q.
/// Throws std::invalid_argument on non-finite input or invalid config.
FilterState predict(const FilterState& state, const Eigen::Vector3d& accel,
                    const FilterConfig& cfg);

/// Measurement update with identity observation matrix and R =
/// diag(sigma_gps^2 I3, sigma_vel^2 I3), every entry floored at (1e-12)^2 so
/// the innovation covariance stays invertible even with zero sigmas.
/// Throws NumericalError if the innovation covariance is singular anyway.
FilterState update(const FilterState& state, const Measurement& z,
                   const FilterConfig& cfg);

/// Run the filter over a measurement stream: element 0 initializes from the
/// first measurement, every later element is one predict/update cycle.
/// accel_inputs (one per transition, i.e. measurements.size() - 1 entries)
/// defaults to zero acceleration when empty. Output length equals input
/// length. Throws std::invalid_argument on an empty stream or a size
/// mismatch.
std::vector<FilterState> estimate_track(const std::vector<Measurement>& measurements,
                                        const FilterConfig& cfg,
                                        const std::vector<Eigen::Vector3d>& accel_inputs = {});

} // namespace relaysim
