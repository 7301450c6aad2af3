#pragma once

#include "kinehier/kinecore/types.hpp"
#include "kinehier/labelnet/labeled_graph.hpp"

#include <vector>

namespace kinehier::testing {

// Five parts: 0 -> {1, 2}, 1 -> {3, 4}; motions S, T, R, S, S.
inline KinematicTree five_node_tree() {
    KinematicTree t;
    t.nodes = {{0, MotionType::Static},
               {1, MotionType::Translating},
               {2, MotionType::Rotating},
               {3, MotionType::Static},
               {4, MotionType::Static}};
    t.edges = {{0, 1, {}}, {0, 2, {}}, {1, 3, {}}, {1, 4, {}}};
    return t;
}

inline PointCloud labels_only(std::vector<int> labels) {
    PointCloud c;
    c.points.assign(labels.size(), Vec3::Zero());
    c.labels = std::move(labels);
    return c;
}

// Candidate edges (0,1), (0,2), (1,2), (2,3) against the chain 0 -> 1 -> 2 -> 3
// (motions S, T, R, S): node 2 typed wrong, exist wrong on (0,2) and (1,2),
// direction wrong on (1,2), root wrong. E = 25, 50, 33.33, 100.
inline labelnet::LabeledGraph four_node_prediction() {
    labelnet::LabeledGraph g;
    g.base.nodes.resize(4);
    for (int i = 0; i < 4; ++i) g.base.nodes[static_cast<std::size_t>(i)].part_id = i;
    g.base.edges = {{0, 1, false}, {0, 2, false}, {1, 2, false}, {2, 3, false}};
    g.part_ids = {0, 1, 2, 3};
    g.motion = {{0.9, 0.1, 0, 0}, {0.1, 0, 0.9, 0}, {0.6, 0.4, 0, 0}, {1, 0, 0, 0}};
    g.root = {0.2, 0.5, 0.2, 0.1};
    g.exist = {0.9, 0.8, 0.3, 0.6};
    g.direction = {0.9, 0.5, 0.4, 0.7};
    return g;
}

inline KinematicTree four_node_chain() {
    KinematicTree gt;
    gt.nodes = {{0, MotionType::Static}, {1, MotionType::Translating}, {2, MotionType::Rotating}, {3, MotionType::Static}};
    gt.edges = {{0, 1, {}}, {1, 2, {}}, {2, 3, {}}};
    return gt;
}

} // namespace kinehier::testing
