#include "relaysim/connectivity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace relaysim {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_disk(const UncertaintyDisk& disk, const char* where) {
    if (!disk.center.allFinite() || !std::isfinite(disk.radius))
        throw std::invalid_argument(std::string(where) + ": non-finite disk");
    if (disk.radius <= 0.0)
        throw std::invalid_argument(std::string(where) + ": disk radius must be positive");
}

void check_range(double comm_range, const char* where) {
    if (!(comm_range > 0.0) || !std::isfinite(comm_range))
        throw std::invalid_argument(std::string(where) +
                                    ": communication range must be positive and finite");
}

double clamp01(double p) { return std::min(1.0, std::max(0.0, p)); }

struct DisjointSet {
    std::vector<int> parent;
    explicit DisjointSet(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

} // namespace

double uncertainty_radius(double k, double speed, double tau) {
    if (!std::isfinite(k) || !std::isfinite(speed) || !std::isfinite(tau))
        throw std::invalid_argument("uncertainty_radius: non-finite input");
    if (k < 0.0 || speed < 0.0 || tau < 0.0)
        throw std::invalid_argument("uncertainty_radius: negative input");
    return std::max(k * speed * tau, kMinUncertaintyRadius);
}

int edge_index(int i, int j, int node_count) {
    if (i > j) std::swap(i, j);
    if (i < 0 || j >= node_count || i == j)
        throw std::invalid_argument("edge_index: invalid node pair");
    // Pairs with first node < i come first, then (i, i+1) ... (i, j).
    return i * node_count - i * (i + 1) / 2 + (j - i - 1);
}

EdgeStateTable::EdgeStateTable(int node_count) : node_count_(node_count) {
    if (node_count < 1) throw std::invalid_argument("EdgeStateTable: need at least one node");
    if (node_count > 6)
        throw std::invalid_argument("EdgeStateTable: exact enumeration capped at 6 nodes");

    for (int i = 0; i < node_count; ++i)
        for (int j = i + 1; j < node_count; ++j) edge_bits_.emplace_back(i, j);

    std::uint32_t states = 1u << edge_bits_.size();
    connected_.resize(states);
    for (std::uint32_t state = 0; state < states; ++state) {
        DisjointSet dsu(node_count);
        for (std::size_t b = 0; b < edge_bits_.size(); ++b)
            if (state & (1u << b)) dsu.unite(edge_bits_[b].first, edge_bits_[b].second);
        int root = dsu.find(0);
        bool all = true;
        for (int v = 1; v < node_count; ++v) all = all && dsu.find(v) == root;
        connected_[state] = all ? 1 : 0;
    }
}

const EdgeStateTable& EdgeStateTable::shared(int node_count) {
    static const EdgeStateTable tables[] = {
        EdgeStateTable(1), EdgeStateTable(2), EdgeStateTable(3),
        EdgeStateTable(4), EdgeStateTable(5), EdgeStateTable(6),
    };
    if (node_count < 1 || node_count > 6)
        throw std::invalid_argument("EdgeStateTable: exact enumeration capped at 6 nodes");
    return tables[node_count - 1];
}

double relay_link_probability(const Eigen::Vector2d& relay_pos, const UncertaintyDisk& disk,
                              double comm_range) {
    check_range(comm_range, "relay_link_probability");
    check_disk(disk, "relay_link_probability");
    if (!relay_pos.allFinite())
        throw std::invalid_argument("relay_link_probability: non-finite relay position");

    double d = (relay_pos - disk.center).norm();
    double lens = lens_area(comm_range, disk.radius, d);
    return clamp01(lens / (kPi * disk.radius * disk.radius));
}

double tracker_link_probability(const UncertaintyDisk& disk_i, const UncertaintyDisk& disk_j,
                                double comm_range, double quad_tol) {
    check_range(comm_range, "tracker_link_probability");
    check_disk(disk_i, "tracker_link_probability");
    check_disk(disk_j, "tracker_link_probability");

    double d = (disk_i.center - disk_j.center).norm();
    // Average over both orientations: the normalization by one disk's area is
    // not symmetric in the disks, but an undirected link needs one number.
    double p_ij = average_lens_area(comm_range, disk_i.radius, d, disk_j.radius, quad_tol) /
                  (kPi * disk_i.radius * disk_i.radius);
    double p_ji = average_lens_area(comm_range, disk_j.radius, d, disk_i.radius, quad_tol) /
                  (kPi * disk_j.radius * disk_j.radius);
    return clamp01(0.5 * (p_ij + p_ji));
}

double single_hop_connectivity(const Eigen::Vector2d& relay_pos,
                               const std::vector<UncertaintyDisk>& disks, double comm_range) {
    if (disks.empty())
        throw std::invalid_argument("single_hop_connectivity: no uncertainty disks");
    double product = 1.0;
    for (const UncertaintyDisk& disk : disks)
        product *= relay_link_probability(relay_pos, disk, comm_range);
    return product;
}

double network_connectivity(const EdgeProbabilityVector& edges, const EdgeStateTable& table) {
    if (edges.node_count != table.node_count())
        throw std::invalid_argument("network_connectivity: node count mismatch");
    if (static_cast<int>(edges.probabilities.size()) != table.edge_count())
        throw std::invalid_argument("network_connectivity: edge count mismatch");
    for (double p : edges.probabilities)
        if (!std::isfinite(p) || p < -1e-12 || p > 1.0 + 1e-12)
            throw std::invalid_argument("network_connectivity: probability outside [0, 1]");

    int m = table.edge_count();
    double total = 0.0;
    for (std::uint32_t state = 0; state < table.state_count(); ++state) {
        if (!table.connected(state)) continue;
        double term = 1.0;
        for (int b = 0; b < m; ++b) {
            double p = clamp01(edges.probabilities[b]);
            term *= (state & (1u << b)) ? p : 1.0 - p;
        }
        total += term;
    }
    return clamp01(total);
}

bool ground_truth_connected(const std::vector<Eigen::Vector2d>& tracker_positions,
                            const Eigen::Vector2d& relay_pos, double comm_range,
                            TopologyMode mode) {
    check_range(comm_range, "ground_truth_connected");
    double r2 = comm_range * comm_range;

    if (mode == TopologyMode::single_hop) {
        for (const Eigen::Vector2d& p : tracker_positions)
            if ((p - relay_pos).squaredNorm() > r2) return false;
        return true;
    }

    std::vector<Eigen::Vector2d> nodes;
    nodes.reserve(tracker_positions.size() + 1);
    nodes.push_back(relay_pos);
    nodes.insert(nodes.end(), tracker_positions.begin(), tracker_positions.end());

    int n = static_cast<int>(nodes.size());
    DisjointSet dsu(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if ((nodes[i] - nodes[j]).squaredNorm() <= r2) dsu.unite(i, j);
    int root = dsu.find(0);
    for (int v = 1; v < n; ++v)
        if (dsu.find(v) != root) return false;
    return true;
}

} // namespace relaysim
