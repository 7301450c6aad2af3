#pragma once

#include "kinehier/kinecore/types.hpp"
#include "kinehier/labelnet/labeled_graph.hpp"

#include <Eigen/Core>

#include <limits>
#include <vector>

namespace kinehier::treeextract {

/// Cost of pairs that are not candidate edges.
inline constexpr double kNoEdge = std::numeric_limits<double>::infinity();

/// Symmetric P x P matrix of -log clamp(p_exist) on candidate edges,
/// kNoEdge elsewhere (diagonal included).
Eigen::MatrixXd pairwise_cost(const labelnet::LabeledGraph& labeled);

/// Argmax of the root scores, lowest node id on ties.
int select_root(const labelnet::LabeledGraph& labeled);

/// Placeholder joint kind for a motion type.
JointKind joint_kind_for(MotionType motion);

/// Argmax motion type, enumeration order on ties.
MotionType argmax_motion(const std::array<double, kMotionTypeCount>& dist);

/// Prim's algorithm from select_root over pairwise_cost. Among equal-cost
/// frontier edges the lowest (parent, child) pair wins. Node ids are graph
/// node ids. Throws StructuralError when the candidate graph is disconnected.
KinematicTree extract_tree(const labelnet::LabeledGraph& labeled);

/// Same Prim procedure on a raw cost matrix (kNoEdge = absent).
std::vector<std::pair<int, int>> prim_tree(const Eigen::MatrixXd& cost, int root);

/// Sum of cost over the tree's edges.
double tree_cost(const Eigen::MatrixXd& cost, const KinematicTree& tree);

/// Bounding-box joint heuristic. For every non-fixed edge the two part boxes
/// are grown by 1% of the object diagonal and intersected. Revolute: axis
/// along the overlap's longest side, origin at its center. Prismatic: axis
/// along the child box's longest side, origin at the child box center. An
/// empty overlap falls back to world z at the child centroid and marks the
/// joint low-confidence. Ties between sides pick x, then y, then z.
KinematicTree estimate_joint_axes(const KinematicTree& tree, const graphbuild::PartGraph& graph);

/// Replaces node ids with `part_ids[id]`.
KinematicTree relabel_tree(const KinematicTree& tree, const std::vector<int>& part_ids);

/// Copies joint limits from `reference` onto edges with the same
/// (parent, child) pair and joint kind.
KinematicTree attach_limits(const KinematicTree& tree, const KinematicTree& reference);

} // namespace kinehier::treeextract
