#include "relaysim/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace relaysim {

namespace {

// Variance floor keeping R invertible when sigmas are zero.
constexpr double kVarianceFloor = 1e-12 * 1e-12;

void check_config(const FilterConfig& cfg) {
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt))
        throw std::invalid_argument("FilterConfig.dt must be positive and finite");
    if (cfg.sigma_acc < 0.0 || cfg.sigma_gps < 0.0 || cfg.sigma_vel < 0.0 ||
        !std::isfinite(cfg.sigma_acc) || !std::isfinite(cfg.sigma_gps) ||
        !std::isfinite(cfg.sigma_vel))
        throw std::invalid_argument("FilterConfig sigmas must be non-negative and finite");
}

void check_finite(const Vec6& v, const char* what) {
    if (!v.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite value");
}

Vec6 stack(const KinematicState& s) {
    Vec6 x;
    x << s.position, s.velocity;
    return x;
}

KinematicState unstack(const Vec6& x) {
    KinematicState s;
    s.position = x.head<3>();
    s.velocity = x.tail<3>();
    return s;
}

Mat6 transition_matrix(double dt) {
    Mat6 F = Mat6::Identity();
    F.topRightCorner<3, 3>() = dt * Eigen::Matrix3d::Identity();
    return F;
}

// Process noise from per-axis acceleration noise: position block
// 1/4 dt^4 sigma^2, velocity block dt^2 sigma^2, isotropic over the axes.
Mat6 process_noise(const FilterConfig& cfg) {
    double s2 = cfg.sigma_acc * cfg.sigma_acc;
    double dt2 = cfg.dt * cfg.dt;
    Mat6 Q = Mat6::Zero();
    Q.diagonal().head<3>().setConstant(0.25 * dt2 * dt2 * s2);
    Q.diagonal().tail<3>().setConstant(dt2 * s2);
    return Q;
}

Mat6 measurement_noise(const FilterConfig& cfg) {
    double g2 = std::max(cfg.sigma_gps * cfg.sigma_gps, kVarianceFloor);
    double v2 = std::max(cfg.sigma_vel * cfg.sigma_vel, kVarianceFloor);
    Mat6 R = Mat6::Zero();
    R.diagonal().head<3>().setConstant(g2);
    R.diagonal().tail<3>().setConstant(v2);
    return R;
}

} // namespace

FilterState filter_init(const Measurement& z, const FilterConfig& cfg) {
    check_config(cfg);
    check_finite(z.z, "filter_init measurement");
    FilterState out;
    out.estimate = unstack(z.z);
    out.covariance = Mat6::Zero();
    out.covariance.diagonal().head<3>().setConstant(cfg.sigma_gps * cfg.sigma_gps);
    out.covariance.diagonal().tail<3>().setConstant(cfg.sigma_vel * cfg.sigma_vel);
    return out;
}

FilterState predict(const FilterState& state, const Eigen::Vector3d& accel,
                    const FilterConfig& cfg) {
    check_config(cfg);
    check_finite(stack(state.estimate), "predict state");
    if (!accel.allFinite()) throw std::invalid_argument("predict: non-finite acceleration");

    Mat6 F = transition_matrix(cfg.dt);
    Eigen::Matrix<double, 6, 3> B;
    B.topRows<3>() = 0.5 * cfg.dt * cfg.dt * Eigen::Matrix3d::Identity();
    B.bottomRows<3>() = cfg.dt * Eigen::Matrix3d::Identity();

    FilterState out;
    out.estimate = unstack(F * stack(state.estimate) + B * accel);
    out.covariance = F * state.covariance * F.transpose() + process_noise(cfg);
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    return out;
}

FilterState update(const FilterState& state, const Measurement& z, const FilterConfig& cfg) {
    check_config(cfg);
    check_finite(z.z, "update measurement");
    check_finite(stack(state.estimate), "update state");

    Mat6 R = measurement_noise(cfg);
    Mat6 S = state.covariance + R; // identity observation matrix
    Eigen::LDLT<Mat6> ldlt(S);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw NumericalError("update: singular innovation covariance",
                             std::numeric_limits<double>::quiet_NaN());
    Mat6 K = ldlt.solve(state.covariance).transpose(); // K = P S^-1 (S symmetric)

    Vec6 x = stack(state.estimate);
    FilterState out;
    out.estimate = unstack(x + K * (z.z - x));
    // Joseph form keeps the covariance symmetric PSD under roundoff.
    Mat6 ImK = Mat6::Identity() - K;
    out.covariance = ImK * state.covariance * ImK.transpose() + K * R * K.transpose();
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    return out;
}

std::vector<FilterState> estimate_track(const std::vector<Measurement>& measurements,
                                        const FilterConfig& cfg,
                                        const std::vector<Eigen::Vector3d>& accel_inputs) {
    if (measurements.empty())
        throw std::invalid_argument("estimate_track: empty measurement stream");
    if (!accel_inputs.empty() && accel_inputs.size() != measurements.size() - 1)
        throw std::invalid_argument(
            "estimate_track: accel_inputs must be empty or have one entry per transition");

    std::vector<FilterState> out;
    out.reserve(measurements.size());
    out.push_back(filter_init(measurements.front(), cfg));
    for (std::size_t k = 1; k < measurements.size(); ++k) {
        Eigen::Vector3d a =
            accel_inputs.empty() ? Eigen::Vector3d::Zero() : accel_inputs[k - 1];
        out.push_back(update(predict(out.back(), a, cfg), measurements[k], cfg));
    }
    return out;
}

} // namespace relaysim
