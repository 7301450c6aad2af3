#pragma once

#include "kinehier/kinecore/types.hpp"
#include "kinehier/labelnet/labeled_graph.hpp"

#include <cstddef>
#include <vector>

namespace kinehier::metrics {

/// Percentages in [0, 100].
struct StructureErrors {
    double e_type = 0.0;   // nodes whose argmax motion differs from ground truth
    double e_exist = 0.0;  // candidate edges with (p_exist > 0.5) != tree membership
    double e_dir = 0.0;    // tree edges (present in the candidate graph) with the wrong direction
    double e_root = 0.0;   // 100 when the selected root is wrong, else 0
    std::size_t nodes = 0;
    std::size_t candidate_edges = 0;
    std::size_t tree_edges = 0;
    /// Tree edges without a candidate edge; excluded from e_dir.
    std::size_t uncovered_tree_edges = 0;
};

/// `gt` uses the node ids of `pred.base`. Throws SchemaError when the node
/// sets differ.
StructureErrors structure_errors(const labelnet::LabeledGraph& pred, const KinematicTree& gt);

/// Top-down tree F1 in [0, 100]. The predicted root matches when it is the
/// ground-truth root with the same motion type; any other node matches when
/// its parent matched, the directed edge exists in the ground truth and its
/// motion type agrees. P = matched / (pred nodes + pred edges), R likewise
/// over the ground truth, where matched counts matched nodes plus their
/// parent edges. Throws SchemaError when the trees share no part id.
double tree_f1(const KinematicTree& pred, const KinematicTree& gt);

/// Part ids of `pred` that match under the rule above.
std::vector<int> matched_nodes(const KinematicTree& pred, const KinematicTree& gt);

/// Average precision of one predicted segmentation against ground truth.
/// Predicted segments are ranked by size (descending, lower label first);
/// each is compared with its best-IoU ground-truth segment (lower label on
/// ties) and counts as a hit when IoU > threshold and that segment is still
/// unclaimed. AP = sum over ranks of precision x recall increment.
/// Throws SchemaError when the clouds differ in size or lack labels.
double segmentation_ap(const PointCloud& pred, const PointCloud& gt, double iou_threshold = 0.5);

/// Mean of per-object AP values (0 for an empty list).
double mean_ap(const std::vector<double>& per_object);

} // namespace kinehier::metrics
