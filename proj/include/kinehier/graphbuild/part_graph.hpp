#pragma once

#include "kinehier/kinecore/types.hpp"

#include <Eigen/Core>

#include <optional>
#include <utility>
#include <vector>

namespace kinehier::graphbuild {

inline constexpr double kDefaultTauRel = 0.05;

struct PartNode {
    int part_id = 0;
    std::vector<std::size_t> point_indices;
    Vec3 centroid = Vec3::Zero();
    Aabb bbox;
};

/// Canonical undirected edge, u < v. `repaired` marks edges added only to
/// make the graph connected.
struct GraphEdge {
    int u = 0;
    int v = 0;
    bool repaired = false;

    bool operator==(const GraphEdge&) const = default;
};

struct PartGraph {
    std::vector<PartNode> nodes;  // nodes[i].part_id == i
    std::vector<GraphEdge> edges;  // sorted by (u, v)

    int node_count() const { return static_cast<int>(nodes.size()); }
    bool has_edge(int a, int b) const;
    /// Index of the canonical edge {a, b} in `edges`, if present.
    std::optional<std::size_t> edge_index(int a, int b) const;
};

/// Checks the PartGraph invariants (dense ids, canonical unique edges,
/// connectivity). Throws StructuralError.
void check_part_graph(const PartGraph& graph);

/// P x P matrix of minimum point-to-point distances between parts; zero
/// diagonal. Uses per-part uniform hash grids with expanding-shell nearest
/// queries, pruned by the best distance found so far. `cell_size <= 0` picks
/// kDefaultTauRel times the cloud bbox diagonal.
Eigen::MatrixXd part_min_distances(const PointCloud& cloud, double cell_size = 0.0);

/// O(n^2) reference for part_min_distances.
Eigen::MatrixXd part_min_distances_brute_force(const PointCloud& cloud);

/// Candidate graph: edge (i, j) iff min distance < tau_rel * bbox diagonal,
/// then greedy minimum cross-component edges until connected.
PartGraph build_graph(const PointCloud& cloud, double tau_rel = kDefaultTauRel);

/// Graph nodes (points, centroid, bbox) without edges.
std::vector<PartNode> part_nodes(const PointCloud& cloud);

/// Relabels to dense ids in ascending order of the original labels.
/// Returns the compacted cloud and the original id of each new label.
std::pair<PointCloud, std::vector<int>> compact_labels(const PointCloud& cloud);

} // namespace kinehier::graphbuild
