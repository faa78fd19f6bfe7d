#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "relaysim/errors.hpp"
#include "relaysim/geometry.hpp"

namespace relaysim {

/// Floor on uncertainty radii: keeps the normalizing disk area positive.
constexpr double kMinUncertaintyRadius = 1.0; // [m]

/// Where a tracker might actually be: the estimated position plus a radius
/// that grows with the estimated speed and the time since the last estimate
/// refresh.
struct UncertaintyDisk {
    Eigen::Vector2d center = Eigen::Vector2d::Zero(); // [m]
    double radius = kMinUncertaintyRadius;            // [m], >= kMinUncertaintyRadius
};

/// Uncertainty radius law r = max(k * speed * tau, floor). k is a
/// dimensionless growth gain, speed the estimated speed [m/s], tau the time
/// since the last estimate refresh [s].
double uncertainty_radius(double k, double speed, double tau);

/// Link probabilities for every unordered node pair of an N-node network.
/// Pair (i, j), i < j, appears in lexicographic order: (0,1), (0,2), ...,
/// (0,N-1), (1,2), ... Node 0 is the relay by convention wherever a relay
/// participates.
struct EdgeProbabilityVector {
    int node_count = 0;
    std::vector<double> probabilities; // C(N,2) entries, each in [0, 1]
};

/// Index of pair (i, j), i < j, in the lexicographic pair order.
int edge_index(int i, int j, int node_count);

/// Connected/disconnected flag for every edge subset of the complete graph
/// on node_count nodes. Bit b of a state selects the b-th pair in the
/// lexicographic pair order. Exact enumeration is capped at 6 nodes
/// (2^15 subsets).
class EdgeStateTable {
public:
    explicit EdgeStateTable(int node_count);

    int node_count() const { return node_count_; }
    int edge_count() const { return static_cast<int>(edge_bits_.size()); }
    std::uint32_t state_count() const { return 1u << edge_bits_.size(); }
    bool connected(std::uint32_t state) const { return connected_[state] != 0; }

    /// Shared immutable instance for the given node count (built once).
    static const EdgeStateTable& shared(int node_count);

private:
    int node_count_;
    std::vector<std::pair<int, int>> edge_bits_; // bit -> (i, j)
    std::vector<char> connected_;
};

/// Probability that the relay at relay_pos hears a tracker whose true
/// position is uniform over the uncertainty disk: the disk area within
/// communication range over the whole disk area, clamped to [0, 1].
double relay_link_probability(const Eigen::Vector2d& relay_pos, const UncertaintyDisk& disk,
                              double comm_range);

/// Probability that two trackers, each uniform over its own uncertainty
/// disk, are within communication range of each other: the expected
/// in-range area over the disk area, averaged over both orientations so the
/// link is undirected. Propagates NumericalError from the quadrature.
double tracker_link_probability(const UncertaintyDisk& disk_i, const UncertaintyDisk& disk_j,
                                double comm_range, double quad_tol = 1e-8);

/// Probability that every tracker hears the relay directly: the product of
/// the per-tracker link probabilities (links independent).
double single_hop_connectivity(const Eigen::Vector2d& relay_pos,
                               const std::vector<UncertaintyDisk>& disks, double comm_range);

/// Probability that the whole network is connected when every edge is
/// independently present with its given probability: the exact sum of the
/// probabilities of all connected edge subsets.
double network_connectivity(const EdgeProbabilityVector& edges, const EdgeStateTable& table);

/// Which links count for connectivity scoring.
enum class TopologyMode { single_hop, multi_hop };

/// Deterministic connectivity of the true geometry: single_hop requires
/// every tracker within comm_range of the relay; multi_hop requires the
/// graph over relay and trackers with edges at pairwise distance <=
/// comm_range to be connected. Boundary distances count as connected.
bool ground_truth_connected(const std::vector<Eigen::Vector2d>& tracker_positions,
                            const Eigen::Vector2d& relay_pos, double comm_range,
                            TopologyMode mode);

} // namespace relaysim
