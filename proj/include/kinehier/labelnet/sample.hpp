#pragma once

#include "kinehier/graphbuild/part_graph.hpp"
#include "kinehier/kinecore/types.hpp"
#include "kinehier/labelnet/config.hpp"
#include "kinehier/synthgen/dataset.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace kinehier::labelnet {

/// Supervision for one candidate graph, in compact node ids.
struct GraphTargets {
    KinematicTree tree;                    // ground truth restricted to observed parts
    std::vector<std::size_t> motion;       // per node, MotionType index
    std::size_t root = 0;
    std::vector<float> exist;              // per candidate edge
    std::vector<std::size_t> dir_edges;    // candidate edges that are tree edges
    std::vector<float> direction;          // 1 iff the tree edge runs u -> v
    std::size_t missing_edges = 0;         // tree edges absent from the candidate graph
};

/// Network input for one object: resampled part points and per-part
/// descriptors, both in the object frame normalised by the cloud's bbox
/// (center subtracted, divided by the diagonal).
struct GraphSample {
    graphbuild::PartGraph graph;
    std::vector<int> part_ids;           // compact id -> label in the source cloud
    std::vector<float> points;           // parts x samples x 3
    std::vector<float> descriptors;      // parts x 6: centroid, bbox extents
    std::optional<GraphTargets> targets;

    std::size_t part_count() const { return graph.nodes.size(); }
};

/// `cloud` must carry dense labels matching `graph`. Each part is resampled
/// with replacement to exactly `config.samples_per_part` points.
GraphSample prepare_input(const PointCloud& cloud, graphbuild::PartGraph graph, const ModelConfig& config,
                          std::uint64_t sample_seed);

/// Keeps only `present` parts (given in ascending original id order), hanging
/// each on its nearest present ancestor. If the root is missing, the
/// shallowest present part (lowest id on ties) becomes the root and the other
/// orphans attach to it. Node ids of the result are indices into `present`.
KinematicTree contract_tree(const KinematicTree& tree, const std::vector<int>& present);

/// Tree edges that are not candidate edges are skipped and counted in
/// `missing_edges`.
GraphTargets make_targets(const graphbuild::PartGraph& graph, const KinematicTree& compact_tree);

std::uint64_t sample_seed(const ModelConfig& config, const synthgen::DatasetRecord& record);

/// Compacts the record's labels, rebuilds the candidate graph from the stored
/// edge list and attaches targets derived from the ground-truth tree.
GraphSample prepare_sample(const synthgen::DatasetRecord& record, const ModelConfig& config);

/// Prepares many records, logging one line per record whose tree edges are
/// missing from its candidate graph.
std::vector<GraphSample> prepare_samples(const std::vector<synthgen::DatasetRecord>& records,
                                         const ModelConfig& config);

} // namespace kinehier::labelnet
