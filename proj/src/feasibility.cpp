#include "relaysim/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "relaysim/geometry.hpp"

namespace relaysim {
namespace {

// Closed-region convention: distances within this relative slack of a
// threshold still count as feasible.
constexpr double kBoundarySlack = 1e-9;

void check_inputs(const std::vector<Eigen::Vector2d>& positions, double comm_range) {
    if (positions.empty()) {
        throw std::invalid_argument("feasibility: need at least one tracker position");
    }
    if (!(comm_range > 0.0) || !std::isfinite(comm_range)) {
        throw std::invalid_argument("feasibility: comm_range must be positive and finite");
    }
    for (const Eigen::Vector2d& p : positions) {
        if (!p.allFinite()) {
            throw std::invalid_argument("feasibility: positions must be finite");
        }
    }
}

struct DisjointSet {
    std::vector<int> parent;

    explicit DisjointSet(int n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }

    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }

    void unite(int a, int b) {
        const int ra = find(a);
        const int rb = find(b);
        if (ra != rb) {
            parent[static_cast<std::size_t>(ra)] = rb;
        }
    }
};

/// Root label per tracker of the graph whose edges join trackers within
/// link_range of each other.
std::vector<int> component_roots(const std::vector<Eigen::Vector2d>& positions,
                                 double link_range) {
    const int n = static_cast<int>(positions.size());
    DisjointSet dsu(n);
    const double r2 = link_range * link_range;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if ((positions[static_cast<std::size_t>(i)] - positions[static_cast<std::size_t>(j)])
                    .squaredNorm() <= r2) {
                dsu.unite(i, j);
            }
        }
    }
    std::vector<int> roots(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        roots[static_cast<std::size_t>(i)] = dsu.find(i);
    }
    return roots;
}

/// True when point is within cover_range of at least one node of every
/// component.
bool covers_all_components(const Eigen::Vector2d& point,
                           const std::vector<Eigen::Vector2d>& positions,
                           const std::vector<int>& roots, const std::vector<int>& root_list,
                           double cover_range) {
    const double r2 = cover_range * cover_range;
    for (int root : root_list) {
        bool covered = false;
        for (std::size_t i = 0; i < positions.size(); ++i) {
            if (roots[i] == root && (positions[i] - point).squaredNorm() <= r2) {
                covered = true;
                break;
            }
        }
        if (!covered) {
            return false;
        }
    }
    return true;
}

/// The general-N placement search over candidate points; comm_range assumed
/// validated. Returns the witness, or nothing when infeasible.
std::optional<Eigen::Vector2d> generic_placement(const std::vector<Eigen::Vector2d>& positions,
                                                 double comm_range) {
    const double link_range = comm_range * (1.0 + kBoundarySlack);
    const std::vector<int> roots = component_roots(positions, link_range);
    std::vector<int> root_list = roots;
    std::sort(root_list.begin(), root_list.end());
    root_list.erase(std::unique(root_list.begin(), root_list.end()), root_list.end());

    if (root_list.size() == 1) {
        return positions.front(); // any point within range of one tracker works
    }

    // Candidate points: tracker positions, pair midpoints (covers tangency),
    // and the intersection points of same-radius circles around each pair.
    // A non-empty intersection of unions of closed equal-radius disks always
    // contains one of these. The intersection circles are shrunk by a hair
    // (far below the coverage slack) so a returned witness sits strictly
    // inside its parent disks rather than on the boundary, where rounding
    // could push it out.
    const double gen_radius = comm_range * (1.0 - 1e-12);
    std::vector<Eigen::Vector2d> candidates(positions);
    for (std::size_t i = 0; i < positions.size(); ++i) {
        for (std::size_t j = i + 1; j < positions.size(); ++j) {
            const Eigen::Vector2d mid = 0.5 * (positions[i] + positions[j]);
            candidates.push_back(mid);
            const Eigen::Vector2d diff = positions[j] - positions[i];
            const double d = diff.norm();
            if (d > 0.0 && d <= 2.0 * comm_range) {
                const double h2 = gen_radius * gen_radius - 0.25 * d * d;
                const double h = std::sqrt(std::max(0.0, h2));
                const Eigen::Vector2d perp(-diff.y() / d, diff.x() / d);
                candidates.push_back(mid + h * perp);
                candidates.push_back(mid - h * perp);
            }
        }
    }
    for (const Eigen::Vector2d& c : candidates) {
        if (covers_all_components(c, positions, roots, root_list, link_range)) {
            return c;
        }
    }
    return std::nullopt;
}

/// Three-tracker placement casework over the link structure. comm_range
/// assumed validated. Returns the witness, or nothing when infeasible.
std::optional<Eigen::Vector2d> three_tracker_placement(
    const std::vector<Eigen::Vector2d>& positions, double comm_range) {
    const double link_range = comm_range * (1.0 + kBoundarySlack);
    const double d01 = (positions[0] - positions[1]).norm();
    const double d02 = (positions[0] - positions[2]).norm();
    const double d12 = (positions[1] - positions[2]).norm();
    const int edges = (d01 <= link_range ? 1 : 0) + (d02 <= link_range ? 1 : 0) +
                      (d12 <= link_range ? 1 : 0);

    if (edges >= 2) {
        // Two links on three trackers always chain them together.
        return positions.front();
    }
    if (edges == 1) {
        // One linked pair plus an isolated tracker: the relay can bridge the
        // gap iff the isolated tracker is within twice the range of the
        // nearer pair member; park it midway to reach both sides.
        int isolated;
        if (d01 <= link_range) {
            isolated = 2;
        } else if (d02 <= link_range) {
            isolated = 1;
        } else {
            isolated = 0;
        }
        const int a = (isolated == 0) ? 1 : 0;
        const int b = (isolated == 2) ? 1 : 2;
        const double da = (positions[static_cast<std::size_t>(isolated)] -
                           positions[static_cast<std::size_t>(a)])
                              .norm();
        const double db = (positions[static_cast<std::size_t>(isolated)] -
                           positions[static_cast<std::size_t>(b)])
                              .norm();
        const int bridge = (da <= db) ? a : b;
        const double gap = std::min(da, db);
        if (gap <= 2.0 * link_range) {
            return 0.5 * (positions[static_cast<std::size_t>(isolated)] +
                          positions[static_cast<std::size_t>(bridge)]);
        }
        return std::nullopt;
    }
    // No links at all: the relay must reach all three trackers directly.
    const EnclosingCircle mec = min_enclosing_circle(positions);
    if (mec.radius <= link_range) {
        return mec.center;
    }
    return std::nullopt;
}

bool single_hop_flag(const std::vector<Eigen::Vector2d>& positions, double comm_range,
                     Eigen::Vector2d* center_out) {
    const EnclosingCircle mec = min_enclosing_circle(positions);
    if (center_out != nullptr) {
        *center_out = mec.center;
    }
    return mec.radius <= comm_range * (1.0 + kBoundarySlack);
}

std::optional<Eigen::Vector2d> multi_hop_placement(const std::vector<Eigen::Vector2d>& positions,
                                                   double comm_range) {
    if (positions.size() == 3) {
        return three_tracker_placement(positions, comm_range);
    }
    return generic_placement(positions, comm_range);
}

} // namespace

FeasibilityVerdict single_hop_feasible(const std::vector<Eigen::Vector2d>& true_positions,
                                       double comm_range) {
    check_inputs(true_positions, comm_range);
    FeasibilityVerdict verdict;
    Eigen::Vector2d center;
    verdict.single_hop_feasible = single_hop_flag(true_positions, comm_range, &center);
    verdict.multi_hop_feasible =
        verdict.single_hop_feasible || multi_hop_placement(true_positions, comm_range).has_value();
    if (verdict.single_hop_feasible) {
        verdict.witness_point = center;
    }
    return verdict;
}

FeasibilityVerdict multi_hop_feasible(const std::vector<Eigen::Vector2d>& true_positions,
                                      double comm_range) {
    check_inputs(true_positions, comm_range);
    FeasibilityVerdict verdict;
    verdict.single_hop_feasible = single_hop_flag(true_positions, comm_range, nullptr);
    const std::optional<Eigen::Vector2d> witness =
        multi_hop_placement(true_positions, comm_range);
    verdict.multi_hop_feasible = witness.has_value();
    verdict.witness_point = witness;
    return verdict;
}

FeasibilityVerdict multi_hop_feasible_generic(
    const std::vector<Eigen::Vector2d>& true_positions, double comm_range) {
    check_inputs(true_positions, comm_range);
    FeasibilityVerdict verdict;
    verdict.single_hop_feasible = single_hop_flag(true_positions, comm_range, nullptr);
    const std::optional<Eigen::Vector2d> witness =
        generic_placement(true_positions, comm_range);
    verdict.multi_hop_feasible = witness.has_value();
    verdict.witness_point = witness;
    return verdict;
}

double max_lifetime(const std::vector<std::vector<Eigen::Vector2d>>& position_trace,
                    double comm_range, TopologyMode mode, double step_dt) {
    if (position_trace.empty()) {
        throw std::invalid_argument("max_lifetime: trace must not be empty");
    }
    if (!(step_dt > 0.0) || !std::isfinite(step_dt)) {
        throw std::invalid_argument("max_lifetime: step_dt must be positive and finite");
    }
    std::size_t feasible_steps = 0;
    for (const std::vector<Eigen::Vector2d>& snapshot : position_trace) {
        check_inputs(snapshot, comm_range);
        if (mode == TopologyMode::single_hop) {
            if (single_hop_flag(snapshot, comm_range, nullptr)) {
                ++feasible_steps;
            }
        } else {
            if (multi_hop_placement(snapshot, comm_range).has_value()) {
                ++feasible_steps;
            }
        }
    }
    return static_cast<double>(feasible_steps) * step_dt;
}

} // namespace relaysim
