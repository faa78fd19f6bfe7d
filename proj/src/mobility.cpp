#include "relaysim/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace relaysim {

namespace {

constexpr double kPi = 3.14159265358979323846;
// Slack for heading-change comparisons: the caller's delta set and theta_max
// may round the same nominal angle differently by an ulp.
constexpr double kAngleSlack = 1e-12;
// Guard against runaway enumerations; planners cap candidate counts well
// below this.
constexpr std::size_t kMaxSequences = 1u << 24;

void check_plan(const TrackerPlan& plan) {
    if (plan.segments.empty())
        throw std::invalid_argument("tracker_position: plan has no segments");
    if (!plan.origin.allFinite() || !std::isfinite(plan.end_time))
        throw std::invalid_argument("tracker_position: non-finite plan");
    for (std::size_t i = 0; i < plan.segments.size(); ++i) {
        const TrackerSegment& s = plan.segments[i];
        if (!std::isfinite(s.start_time) || !std::isfinite(s.speed) || !std::isfinite(s.heading))
            throw std::invalid_argument("tracker_position: non-finite segment");
        if (s.speed < 0.0) throw std::invalid_argument("tracker_position: negative speed");
        if (i > 0 && !(s.start_time > plan.segments[i - 1].start_time))
            throw std::invalid_argument("tracker_position: segment times must strictly increase");
    }
    if (plan.end_time < plan.segments.back().start_time)
        throw std::invalid_argument("tracker_position: window ends before the last segment");
}

} // namespace

double normalize_angle(double angle) {
    double a = std::fmod(angle + kPi, 2.0 * kPi);
    if (a <= 0.0) a += 2.0 * kPi;
    return a - kPi;
}

RelayState step_relay(const RelayState& state, const ControlInput& u, double dt,
                      const KinematicLimits& limits) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("step_relay: dt must be positive and finite");
    if (!state.position.allFinite() || !std::isfinite(state.heading) ||
        !std::isfinite(state.speed))
        throw std::invalid_argument("step_relay: non-finite state");
    if (!std::isfinite(u.speed) || !std::isfinite(u.heading_delta))
        throw std::invalid_argument("step_relay: non-finite control");
    if (u.speed < limits.v_min || u.speed > limits.v_max)
        throw std::invalid_argument("step_relay: commanded speed outside [v_min, v_max]");
    if (std::abs(u.heading_delta) > limits.theta_max + kAngleSlack)
        throw std::invalid_argument("step_relay: heading change exceeds theta_max");

    RelayState out;
    out.heading = normalize_angle(state.heading + u.heading_delta);
    out.speed = u.speed;
    out.position = state.position +
                   u.speed * dt * Eigen::Vector2d(std::cos(out.heading), std::sin(out.heading));
    return out;
}

std::vector<ControlSequence> enumerate_control_sequences(const std::vector<double>& speed_set,
                                                         const std::vector<double>& delta_set,
                                                         int horizon_steps) {
    if (speed_set.empty() || delta_set.empty())
        throw std::invalid_argument("enumerate_control_sequences: empty control set");
    if (horizon_steps < 0)
        throw std::invalid_argument("enumerate_control_sequences: negative horizon");
    for (double s : speed_set)
        if (!std::isfinite(s))
            throw std::invalid_argument("enumerate_control_sequences: non-finite speed");
    for (double d : delta_set)
        if (!std::isfinite(d))
            throw std::invalid_argument("enumerate_control_sequences: non-finite heading change");

    std::size_t alphabet_size = speed_set.size() * delta_set.size();
    std::size_t count = 1;
    for (int k = 0; k < horizon_steps; ++k) {
        if (count > kMaxSequences / alphabet_size)
            throw std::invalid_argument("enumerate_control_sequences: enumeration too large");
        count *= alphabet_size;
    }

    ControlSequence alphabet;
    alphabet.reserve(alphabet_size);
    for (double s : speed_set)
        for (double d : delta_set) alphabet.push_back(ControlInput{s, d});

    // Grow breadth-first so earlier steps stay most significant.
    std::vector<ControlSequence> out{ControlSequence{}};
    out.reserve(count);
    for (int k = 0; k < horizon_steps; ++k) {
        std::vector<ControlSequence> next;
        next.reserve(out.size() * alphabet_size);
        for (const ControlSequence& seq : out) {
            for (const ControlInput& u : alphabet) {
                ControlSequence extended = seq;
                extended.push_back(u);
                next.push_back(std::move(extended));
            }
        }
        out = std::move(next);
    }
    return out;
}

KinematicState tracker_position(const TrackerPlan& plan, double t) {
    check_plan(plan);
    if (!std::isfinite(t)) throw std::invalid_argument("tracker_position: non-finite time");
    double t0 = plan.segments.front().start_time;
    if (t < t0 || t > plan.end_time + 1e-9)
        throw std::invalid_argument("tracker_position: time outside the plan window");
    t = std::min(t, plan.end_time);

    Eigen::Vector2d pos = plan.origin;
    std::size_t active = 0;
    for (std::size_t i = 0; i < plan.segments.size(); ++i) {
        const TrackerSegment& seg = plan.segments[i];
        bool last = i + 1 == plan.segments.size();
        double seg_end = last ? plan.end_time : plan.segments[i + 1].start_time;
        // Left-closed segments: the segment starting exactly at t owns it.
        if (!last && t >= plan.segments[i + 1].start_time) {
            pos += seg.speed * (seg_end - seg.start_time) *
                   Eigen::Vector2d(std::cos(seg.heading), std::sin(seg.heading));
            continue;
        }
        pos += seg.speed * (t - seg.start_time) *
               Eigen::Vector2d(std::cos(seg.heading), std::sin(seg.heading));
        active = i;
        break;
    }

    const TrackerSegment& seg = plan.segments[active];
    KinematicState out;
    out.position = Eigen::Vector3d(pos.x(), pos.y(), 0.0);
    out.velocity =
        seg.speed * Eigen::Vector3d(std::cos(seg.heading), std::sin(seg.heading), 0.0);
    return out;
}

} // namespace relaysim
