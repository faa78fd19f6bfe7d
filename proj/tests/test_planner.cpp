#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "relaysim/connectivity.hpp"
#include "relaysim/errors.hpp"
#include "relaysim/mobility.hpp"
#include "relaysim/planner.hpp"
#include "relaysim/rng.hpp"

using namespace relaysim;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTurn = 0.5235987755982988; // 30 degrees

/// Relay states after each control of seq, in order.
std::vector<RelayState> simulate(const RelayState& start, const ControlSequence& seq,
                                 const PlannerConfig& cfg) {
    std::vector<RelayState> states;
    RelayState s = start;
    for (const ControlInput& u : seq) {
        s = step_relay(s, u, cfg.step_dt, cfg.limits);
        states.push_back(s);
    }
    return states;
}

bool same_sequence(const ControlSequence& a, const ControlSequence& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].speed != b[i].speed || a[i].heading_delta != b[i].heading_delta) return false;
    }
    return true;
}

TrackerEstimate make_estimate(double px, double py, double vx = 0.0, double vy = 0.0,
                              double tau = 0.0) {
    TrackerEstimate e;
    e.position = Eigen::Vector2d(px, py);
    e.velocity = Eigen::Vector2d(vx, vy);
    e.tau = tau;
    return e;
}

std::vector<TrackerEstimate> random_estimates(Rng& rng, int n) {
    std::vector<TrackerEstimate> out;
    for (int i = 0; i < n; ++i) {
        out.push_back(make_estimate(rng.uniform(-300.0, 300.0), rng.uniform(-300.0, 300.0),
                                    rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0),
                                    rng.uniform(0.0, 30.0)));
    }
    return out;
}

RelayState random_relay(Rng& rng) {
    RelayState r;
    r.position = Eigen::Vector2d(rng.uniform(-300.0, 300.0), rng.uniform(-300.0, 300.0));
    r.heading = rng.uniform(-kPi, kPi);
    r.speed = rng.uniform(20.0, 40.0);
    return r;
}

/// Scores one simulated candidate with the public evaluators.
double evaluate_candidate(Algorithm algo, const std::vector<RelayState>& states,
                          const std::vector<std::vector<UncertaintyDisk>>& disks,
                          const TrackerPartition& part, const PlannerConfig& cfg) {
    switch (algo) {
    case Algorithm::single_hop:
        return objective_single_hop(states, disks, cfg);
    case Algorithm::nearest_point:
        return objective_nearest_point(states, disks, part, cfg);
    case Algorithm::midpoint:
        return objective_midpoint(states, disks, part, cfg);
    default:
        REQUIRE(false);
        return 0.0;
    }
}

} // namespace

TEST_CASE("propagate_disks advances centers ballistically and grows radii") {
    PlannerConfig cfg;
    cfg.horizon_steps = 3;
    cfg.step_dt = 2.0;
    cfg.uncertainty_gain = 1.0;
    std::vector<TrackerEstimate> ests{make_estimate(100.0, 50.0, 10.0, -5.0, 3.0)};
    const auto disks = propagate_disks(ests, cfg);
    REQUIRE(disks.size() == 3);
    const double speed = std::sqrt(125.0);
    for (int m = 1; m <= 3; ++m) {
        const auto& step = disks[static_cast<std::size_t>(m - 1)];
        REQUIRE(step.size() == 1);
        const double ahead = 2.0 * m;
        CHECK(step[0].center.x() == doctest::Approx(100.0 + 10.0 * ahead).epsilon(1e-14));
        CHECK(step[0].center.y() == doctest::Approx(50.0 - 5.0 * ahead).epsilon(1e-14));
        CHECK(step[0].radius == doctest::Approx(speed * (3.0 + ahead)).epsilon(1e-14));
    }

    SUBCASE("stationary tracker keeps the floor radius at every step") {
        std::vector<TrackerEstimate> still{make_estimate(7.0, -4.0)};
        for (const auto& step : propagate_disks(still, cfg)) {
            CHECK(step[0].radius == kMinUncertaintyRadius);
            CHECK(step[0].center == Eigen::Vector2d(7.0, -4.0));
        }
    }

    SUBCASE("no-horizon mode still produces one step") {
        cfg.horizon_steps = 0;
        CHECK(propagate_disks(ests, cfg).size() == 1);
    }
}

TEST_CASE("partition_trackers singles out the drone farthest from the others") {
    RelayState relay;
    relay.position = Eigen::Vector2d(-5.0, 0.0);

    std::vector<TrackerEstimate> ests{make_estimate(0.0, 0.0), make_estimate(10.0, 0.0),
                                      make_estimate(1000.0, 0.0)};
    const TrackerPartition part = partition_trackers(ests, relay);
    CHECK(part.far_drone == 2);
    REQUIRE(part.s2 == std::vector<int>{0, 1});
    CHECK(part.near_s2_drone == 0);

    SUBCASE("symmetric pair ties to the lowest index") {
        std::vector<TrackerEstimate> pair{make_estimate(-50.0, 0.0), make_estimate(50.0, 0.0)};
        const TrackerPartition p = partition_trackers(pair, relay);
        CHECK(p.far_drone == 0);
        CHECK(p.s2 == std::vector<int>{1});
        CHECK(p.near_s2_drone == 1);
    }

    SUBCASE("single tracker leaves the second set empty") {
        std::vector<TrackerEstimate> one{make_estimate(3.0, 4.0)};
        const TrackerPartition p = partition_trackers(one, relay);
        CHECK(p.far_drone == 0);
        CHECK(p.s2.empty());
        CHECK(p.near_s2_drone == -1);
    }
}

TEST_CASE("objective_single_hop sums per-step products and charges the end distance") {
    PlannerConfig cfg;
    cfg.comm_range = 100.0;
    cfg.epsilon = 1e-4;

    SUBCASE("certain links at zero end distance score exactly the step count") {
        // Both candidate positions sit on the disk center, so each link
        // probability is exactly 1 and the end distance is 0.
        std::vector<RelayState> states(2);
        states[0].position = Eigen::Vector2d(10.0, 0.0);
        states[1].position = Eigen::Vector2d(10.0, 0.0);
        std::vector<std::vector<UncertaintyDisk>> disks(2);
        for (auto& step : disks) {
            step.push_back(UncertaintyDisk{Eigen::Vector2d(10.0, 0.0), 1.0});
        }
        CHECK(objective_single_hop(states, disks, cfg) == 2.0);
    }

    SUBCASE("fully disconnected horizon is decided by the end distance alone") {
        std::vector<RelayState> states(2);
        states[0].position = Eigen::Vector2d(0.0, 0.0);
        states[1].position = Eigen::Vector2d(40.0, 0.0);
        std::vector<std::vector<UncertaintyDisk>> disks(2);
        for (auto& step : disks) {
            step.push_back(UncertaintyDisk{Eigen::Vector2d(500.0, 0.0), 2.0});
        }
        const double expected = -cfg.epsilon * 460.0 / cfg.comm_range;
        CHECK(objective_single_hop(states, disks, cfg) ==
              doctest::Approx(expected).epsilon(1e-12));
    }

    SUBCASE("a larger probability sum beats a larger end-distance advantage") {
        // Candidate A keeps the disk in range on both steps; candidate B only
        // on the first. The probability-sum gap (about 1) dwarfs the end
        // distance charge (at most epsilon).
        std::vector<std::vector<UncertaintyDisk>> disks(2);
        for (auto& step : disks) {
            step.push_back(UncertaintyDisk{Eigen::Vector2d(0.0, 0.0), 5.0});
        }
        std::vector<RelayState> a(2), b(2);
        a[0].position = Eigen::Vector2d(2.0, 0.0);
        a[1].position = Eigen::Vector2d(50.0, 0.0);
        b[0].position = Eigen::Vector2d(2.0, 0.0);
        b[1].position = Eigen::Vector2d(300.0, 0.0);
        const double oa = objective_single_hop(a, disks, cfg);
        const double ob = objective_single_hop(b, disks, cfg);
        CHECK(oa > ob);
        // Hand recomputation of A from the public link model.
        double lagrange = relay_link_probability(a[0].position, disks[0][0], cfg.comm_range) +
                          relay_link_probability(a[1].position, disks[1][0], cfg.comm_range);
        CHECK(oa == doctest::Approx(lagrange - cfg.epsilon * 50.0 / cfg.comm_range)
                        .epsilon(1e-12));
    }
}

TEST_CASE("multi-hop objectives separate the far drone from the remaining set") {
    // Far drone at (1000, 0); the remaining pair mirrored about the origin so
    // its centroid is exactly the origin. Huge comm range makes every link
    // certain, isolating the end-distance term.
    PlannerConfig cfg;
    cfg.comm_range = 10000.0;
    cfg.epsilon = 1e-4;
    std::vector<TrackerEstimate> ests{make_estimate(1000.0, 0.0), make_estimate(0.0, 100.0),
                                      make_estimate(0.0, -100.0)};
    RelayState relay; // origin
    const TrackerPartition part = partition_trackers(ests, relay);
    REQUIRE(part.far_drone == 0);
    REQUIRE(part.s2 == std::vector<int>{1, 2});
    REQUIRE(part.near_s2_drone == 1);

    PlannerConfig one_step = cfg;
    one_step.horizon_steps = 1;
    const auto disks = propagate_disks(ests, one_step);

    std::vector<RelayState> candidate(1);
    candidate[0].position = Eigen::Vector2d(999.0, 0.0);

    // Midpoint: end-distance targets are the far drone (distance 1) and the
    // centroid of the mirrored pair (distance 999).
    const double midpoint = objective_midpoint(candidate, disks, part, cfg);
    CHECK(midpoint == doctest::Approx(1.0 - cfg.epsilon * 999.0 / cfg.comm_range)
                          .epsilon(1e-12));

    // Nearest point: the second target is drone 1 instead of the centroid.
    const double d1 = std::sqrt(999.0 * 999.0 + 100.0 * 100.0);
    const double nearest = objective_nearest_point(candidate, disks, part, cfg);
    CHECK(nearest == doctest::Approx(1.0 - cfg.epsilon * d1 / cfg.comm_range).epsilon(1e-12));

    SUBCASE("single tracker reduces both to the one available target") {
        std::vector<TrackerEstimate> one{make_estimate(30.0, 40.0)};
        const TrackerPartition p = partition_trackers(one, relay);
        PlannerConfig pc = cfg;
        pc.horizon_steps = 1;
        const auto d = propagate_disks(one, pc);
        std::vector<RelayState> c(1);
        c[0].position = Eigen::Vector2d(0.0, 0.0);
        const double expected = 1.0 - cfg.epsilon * 50.0 / cfg.comm_range;
        CHECK(objective_nearest_point(c, d, p, cfg) ==
              doctest::Approx(expected).epsilon(1e-12));
        CHECK(objective_midpoint(c, d, p, cfg) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("plan matches brute-force enumeration for every objective") {
    PlannerConfig cfg;
    cfg.horizon_steps = 2;
    cfg.comm_range = 250.0;
    cfg.quad_tol = 1e-6;

    Rng rng(0x9a3c0de5u);
    const Algorithm algos[] = {Algorithm::single_hop, Algorithm::nearest_point,
                               Algorithm::midpoint};
    const auto all_seqs = enumerate_control_sequences(cfg.speed_set, cfg.delta_set, 2);
    REQUIRE(all_seqs.size() == 81);

    for (int trial = 0; trial < 10; ++trial) {
        const auto ests = random_estimates(rng, 3);
        const RelayState relay = random_relay(rng);
        const auto disks = propagate_disks(ests, cfg);
        const TrackerPartition part = partition_trackers(ests, relay);

        for (Algorithm algo : algos) {
            PlannerConfig run = cfg;
            run.algorithm = algo;
            const PlanDecision decision = plan(ests, relay, run);

            double best = -std::numeric_limits<double>::infinity();
            std::size_t best_idx = 0;
            for (std::size_t i = 0; i < all_seqs.size(); ++i) {
                const auto states = simulate(relay, all_seqs[i], cfg);
                const double v = evaluate_candidate(algo, states, disks, part, cfg);
                if (v > best) {
                    best = v;
                    best_idx = i;
                }
            }

            CHECK(decision.objective == best);
            CHECK(same_sequence(decision.controls, all_seqs[best_idx]));
            CHECK(decision.objective ==
                  doctest::Approx(decision.lagrange + decision.mayer).epsilon(1e-12));
            CHECK(decision.candidates_total == 81);
            CHECK(decision.candidates_evaluated >= 1);
            CHECK(decision.candidates_evaluated <= 81);
        }
    }
}

TEST_CASE("plan is bit-identical across repeated calls") {
    PlannerConfig cfg;
    cfg.algorithm = Algorithm::midpoint;
    cfg.horizon_steps = 2;
    cfg.comm_range = 250.0;
    Rng rng(0x51deb00cu);
    const auto ests = random_estimates(rng, 3);
    const RelayState relay = random_relay(rng);

    const PlanDecision a = plan(ests, relay, cfg);
    const PlanDecision b = plan(ests, relay, cfg);
    CHECK(a.objective == b.objective);
    CHECK(a.lagrange == b.lagrange);
    CHECK(a.mayer == b.mayer);
    CHECK(a.candidates_evaluated == b.candidates_evaluated);
    CHECK(same_sequence(a.controls, b.controls));
}

TEST_CASE("ties resolve to the first sequence in enumeration order") {
    // The tracker sits on the perpendicular bisector of the two candidate end
    // points (40, 0) and (80, 0), so both squared distances are exactly 500
    // and the objectives tie bitwise; the link is certain for both. The
    // winner must then be whichever speed the set lists first.
    PlannerConfig cfg;
    cfg.algorithm = Algorithm::single_hop;
    cfg.horizon_steps = 1;
    cfg.comm_range = 1000.0;
    cfg.speed_set = {20.0, 40.0};
    cfg.delta_set = {0.0};
    std::vector<TrackerEstimate> ests{make_estimate(60.0, 10.0)};
    RelayState relay; // at the origin, heading 0

    const PlanDecision first = plan(ests, relay, cfg);
    REQUIRE(first.controls.size() == 1);
    CHECK(first.controls[0].speed == 20.0);

    PlannerConfig reversed = cfg;
    reversed.speed_set = {40.0, 20.0};
    const PlanDecision second = plan(ests, relay, reversed);
    CHECK(second.controls[0].speed == 40.0);
    CHECK(first.objective == second.objective);

    SUBCASE("center_of_mass ties identically") {
        const PlanDecision com = plan_center_of_mass(ests, relay, cfg);
        CHECK(com.controls[0].speed == 20.0);
        const PlanDecision com_rev = plan_center_of_mass(ests, relay, reversed);
        CHECK(com_rev.controls[0].speed == 40.0);
        CHECK(com.objective == com_rev.objective);
    }
}

TEST_CASE("a long horizon equals repeated one-step planning in a static saturated world") {
    // All trackers coincide far ahead and every link probability is exactly 1
    // for every reachable candidate, so both the long-horizon plan and the
    // greedy replanned sequence reduce to closing distance at full speed.
    PlannerConfig cfg;
    cfg.algorithm = Algorithm::single_hop;
    cfg.comm_range = 1e7;
    std::vector<TrackerEstimate> ests{make_estimate(1e6, 0.0), make_estimate(1e6, 0.0)};
    RelayState relay; // origin, heading 0

    PlannerConfig long_cfg = cfg;
    long_cfg.horizon_steps = 4;
    const PlanDecision long_plan = plan(ests, relay, long_cfg);
    REQUIRE(long_plan.controls.size() == 4);

    PlannerConfig short_cfg = cfg;
    short_cfg.horizon_steps = 1;
    RelayState state = relay;
    ControlSequence greedy;
    for (int i = 0; i < 4; ++i) {
        const PlanDecision step = plan(ests, state, short_cfg);
        REQUIRE(step.controls.size() == 1);
        greedy.push_back(step.controls[0]);
        state = step_relay(state, step.controls[0], short_cfg.step_dt, short_cfg.limits);
    }

    CHECK(same_sequence(long_plan.controls, greedy));
    for (const ControlInput& u : long_plan.controls) {
        CHECK(u.speed == 40.0);
        CHECK(u.heading_delta == 0.0);
    }
}

TEST_CASE("hybrid adopts the direct plan only while its product stays positive") {
    PlannerConfig cfg;
    cfg.horizon_steps = 1;
    cfg.comm_range = 100.0;
    RelayState relay; // origin, heading 0

    SUBCASE("exactly one candidate keeps the product positive and is chosen") {
        // Tracker 180 m ahead with a unit disk: only the full-speed straight
        // candidate ends within comm_range + radius - 1 of it.
        std::vector<TrackerEstimate> ests{make_estimate(180.0, 0.0)};
        const PlanDecision d = plan_hybrid(ests, relay, cfg);
        CHECK_FALSE(d.multi_hop_fallback);
        REQUIRE(d.controls.size() == 1);
        CHECK(d.controls[0].speed == 40.0);
        CHECK(d.controls[0].heading_delta == 0.0);
        CHECK(d.lagrange > 0.0);
    }

    SUBCASE("all products zero falls back to the midpoint decision") {
        std::vector<TrackerEstimate> ests{make_estimate(300.0, 0.0)};
        const PlanDecision d = plan_hybrid(ests, relay, cfg);
        CHECK(d.multi_hop_fallback);
        PlannerConfig mp = cfg;
        mp.algorithm = Algorithm::midpoint;
        const PlanDecision expected = plan(ests, relay, mp);
        CHECK(d.objective == expected.objective);
        CHECK(same_sequence(d.controls, expected.controls));
    }

    SUBCASE("near trackers keep hybrid identical to the direct planner") {
        Rng rng(0x7f31aa02u);
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<TrackerEstimate> ests{
                make_estimate(rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0)),
                make_estimate(rng.uniform(-30.0, 30.0), rng.uniform(-30.0, 30.0))};
            const PlanDecision hybrid = plan_hybrid(ests, relay, cfg);
            PlannerConfig sh = cfg;
            sh.algorithm = Algorithm::single_hop;
            const PlanDecision direct = plan(ests, relay, sh);
            CHECK_FALSE(hybrid.multi_hop_fallback);
            CHECK(hybrid.objective == direct.objective);
            CHECK(same_sequence(hybrid.controls, direct.controls));
        }
    }

    SUBCASE("plan dispatches the hybrid algorithm") {
        std::vector<TrackerEstimate> ests{make_estimate(300.0, 0.0)};
        PlannerConfig hy = cfg;
        hy.algorithm = Algorithm::hybrid;
        const PlanDecision via_plan = plan(ests, relay, hy);
        const PlanDecision direct = plan_hybrid(ests, relay, cfg);
        CHECK(via_plan.objective == direct.objective);
        CHECK(via_plan.multi_hop_fallback == direct.multi_hop_fallback);
        CHECK(same_sequence(via_plan.controls, direct.controls));
    }
}

TEST_CASE("center_of_mass chooses the end point nearest the current centroid") {
    PlannerConfig cfg;
    cfg.horizon_steps = 2;
    Rng rng(0xfeed5eedu);
    const auto all_seqs = enumerate_control_sequences(cfg.speed_set, cfg.delta_set, 2);

    for (int trial = 0; trial < 5; ++trial) {
        const auto ests = random_estimates(rng, 3);
        const RelayState relay = random_relay(rng);
        Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
        for (const auto& e : ests) centroid += e.position;
        centroid /= 3.0;

        const PlanDecision decision = plan_center_of_mass(ests, relay, cfg);

        double best = std::numeric_limits<double>::infinity();
        std::size_t best_idx = 0;
        for (std::size_t i = 0; i < all_seqs.size(); ++i) {
            const auto states = simulate(relay, all_seqs[i], cfg);
            const double dist = (states.back().position - centroid).norm();
            if (dist < best) {
                best = dist;
                best_idx = i;
            }
        }
        CHECK(decision.objective == -best);
        CHECK(decision.lagrange == 0.0);
        CHECK(decision.mayer == decision.objective);
        CHECK(same_sequence(decision.controls, all_seqs[best_idx]));
    }
}

TEST_CASE("pruning skips dominated subtrees without changing the answer") {
    // Target directly ahead with the fastest speed listed first: the very
    // first leaf is optimal, so every sibling subtree is pruned by the
    // reachability bound and only the final-step leaves are scored.
    PlannerConfig cfg;
    cfg.algorithm = Algorithm::center_of_mass;
    cfg.horizon_steps = 3;
    cfg.speed_set = {40.0, 30.0, 20.0};
    cfg.delta_set = {0.0, -kTurn, kTurn};
    std::vector<TrackerEstimate> ests{make_estimate(1e6, 0.0)};
    RelayState relay; // origin, heading 0

    const PlanDecision d = plan(ests, relay, cfg);
    REQUIRE(d.controls.size() == 3);
    for (const ControlInput& u : d.controls) {
        CHECK(u.speed == 40.0);
        CHECK(u.heading_delta == 0.0);
    }
    CHECK(d.objective == -(1e6 - 240.0));
    CHECK(d.candidates_total == 729);
    CHECK(d.candidates_evaluated < 729);
    CHECK(d.candidates_evaluated >= 1);
}

TEST_CASE("no-horizon mode plans exactly one step") {
    PlannerConfig cfg;
    cfg.algorithm = Algorithm::single_hop;
    cfg.horizon_steps = 0;
    cfg.comm_range = 200.0;
    std::vector<TrackerEstimate> ests{make_estimate(150.0, 30.0, 2.0, 1.0, 5.0)};
    RelayState relay;

    const PlanDecision zero = plan(ests, relay, cfg);
    cfg.horizon_steps = 1;
    const PlanDecision one = plan(ests, relay, cfg);
    CHECK(zero.objective == one.objective);
    CHECK(zero.candidates_total == 9);
    CHECK(same_sequence(zero.controls, one.controls));
}

TEST_CASE("planned controls always come from the configured sets") {
    PlannerConfig cfg;
    cfg.horizon_steps = 2;
    cfg.comm_range = 250.0;
    Rng rng(0xc0ffee11u);
    const Algorithm algos[] = {Algorithm::single_hop, Algorithm::nearest_point,
                               Algorithm::midpoint, Algorithm::hybrid,
                               Algorithm::center_of_mass};
    for (int trial = 0; trial < 4; ++trial) {
        const auto ests = random_estimates(rng, 3);
        const RelayState relay = random_relay(rng);
        for (Algorithm algo : algos) {
            PlannerConfig run = cfg;
            run.algorithm = algo;
            const PlanDecision d = plan(ests, relay, run);
            REQUIRE(d.controls.size() == 2);
            for (const ControlInput& u : d.controls) {
                CHECK(std::count(run.speed_set.begin(), run.speed_set.end(), u.speed) > 0);
                CHECK(std::count(run.delta_set.begin(), run.delta_set.end(),
                                 u.heading_delta) > 0);
            }
        }
    }
}

TEST_CASE("planner configuration and input validation") {
    std::vector<TrackerEstimate> ests{make_estimate(10.0, 0.0)};
    RelayState relay;
    PlannerConfig cfg;

    SUBCASE("candidate cap") {
        cfg.horizon_steps = 7; // 9^7 > 10^6
        CHECK_THROWS_AS(plan(ests, relay, cfg), ConfigError);
    }
    SUBCASE("speed outside the kinematic envelope") {
        cfg.speed_set = {20.0, 50.0};
        CHECK_THROWS_AS(plan(ests, relay, cfg), ConfigError);
    }
    SUBCASE("empty speed set") {
        cfg.speed_set.clear();
        CHECK_THROWS_AS(plan(ests, relay, cfg), ConfigError);
    }
    SUBCASE("heading change beyond theta_max") {
        cfg.delta_set = {0.7};
        CHECK_THROWS_AS(plan(ests, relay, cfg), ConfigError);
    }
    SUBCASE("epsilon bounds") {
        cfg.epsilon = 0.0;
        CHECK_THROWS_AS(plan(ests, relay, cfg), ConfigError);
        cfg.epsilon = 1.0;
        CHECK_THROWS_AS(plan(ests, relay, cfg), ConfigError);
    }
    SUBCASE("non-positive step or range") {
        cfg.step_dt = 0.0;
        CHECK_THROWS_AS(plan(ests, relay, cfg), ConfigError);
        cfg.step_dt = 2.0;
        cfg.comm_range = -1.0;
        CHECK_THROWS_AS(plan(ests, relay, cfg), ConfigError);
    }
    SUBCASE("negative horizon") {
        cfg.horizon_steps = -1;
        CHECK_THROWS_AS(plan(ests, relay, cfg), ConfigError);
    }
    SUBCASE("invalid estimates") {
        CHECK_THROWS_AS(plan({}, relay, cfg), std::invalid_argument);
        std::vector<TrackerEstimate> bad{make_estimate(
            std::numeric_limits<double>::quiet_NaN(), 0.0)};
        CHECK_THROWS_AS(plan(bad, relay, cfg), std::invalid_argument);
        std::vector<TrackerEstimate> neg_tau{make_estimate(1.0, 2.0, 0.0, 0.0, -1.0)};
        CHECK_THROWS_AS(plan(neg_tau, relay, cfg), std::invalid_argument);
    }
    SUBCASE("multi-hop tracker cap") {
        std::vector<TrackerEstimate> six;
        for (int i = 0; i < 6; ++i) six.push_back(make_estimate(10.0 * i, 0.0));
        cfg.algorithm = Algorithm::nearest_point;
        CHECK_THROWS_AS(plan(six, relay, cfg), ConfigError);
        cfg.algorithm = Algorithm::hybrid;
        CHECK_THROWS_AS(plan(six, relay, cfg), ConfigError);
        cfg.algorithm = Algorithm::single_hop; // direct product has no node cap
        CHECK_NOTHROW(plan(six, relay, cfg));
    }
}

TEST_CASE("a probability-sum lead beyond the end-distance budget always wins") {
    // The end-distance charge is bounded by epsilon (distances here stay well
    // under comm_range), so any candidate whose probability sum trails the
    // winner's by more than epsilon must lose regardless of geometry.
    PlannerConfig cfg;
    cfg.algorithm = Algorithm::single_hop;
    cfg.horizon_steps = 2;
    cfg.comm_range = 250.0;
    Rng rng(0xbead1234u);
    const auto all_seqs = enumerate_control_sequences(cfg.speed_set, cfg.delta_set, 2);

    for (int trial = 0; trial < 5; ++trial) {
        const auto ests = random_estimates(rng, 3);
        const RelayState relay = random_relay(rng);
        const auto disks = propagate_disks(ests, cfg);
        const PlanDecision decision = plan(ests, relay, cfg);

        for (const auto& seq : all_seqs) {
            const auto states = simulate(relay, seq, cfg);
            double lagrange = 0.0;
            for (std::size_t m = 0; m < states.size(); ++m) {
                lagrange += single_hop_connectivity(states[m].position, disks[m],
                                                    cfg.comm_range);
            }
            CHECK(decision.lagrange >= lagrange - cfg.epsilon - 1e-12);
        }
    }
}
