#include "kinehier/kinecore/articulation.hpp"

#include "kinehier/errors.hpp"
#include "kinehier/kinecore/tree.hpp"

#include <string>

namespace kinehier {

Isometry joint_transform(const Joint& joint, double value) {
    switch (joint.kind) {
    case JointKind::Fixed: return Isometry::Identity();
    case JointKind::Revolute: return revolute_transform(joint.axis, joint.origin, value);
    case JointKind::Prismatic: return prismatic_transform(joint.axis, value);
    }
    return Isometry::Identity();
}

void check_pose(const KinematicTree& tree, const JointPose& pose) {
    for (const auto& [part, value] : pose.values) {
        const TreeEdge* edge = tree.parent_edge(part);
        if (!edge || edge->joint.kind == JointKind::Fixed)
            throw SchemaError("pose names part " + std::to_string(part) + " which has no movable joint");
        if (!(value >= edge->joint.lower && value <= edge->joint.upper))
            throw LimitViolationError("pose value " + std::to_string(value) + " for part " +
                                      std::to_string(part) + " outside [" +
                                      std::to_string(edge->joint.lower) + ", " +
                                      std::to_string(edge->joint.upper) + "]");
    }
}

std::vector<Isometry> part_transforms(const KinematicTree& tree, const JointPose& pose) {
    int max_id = -1;
    for (const auto& n : tree.nodes) max_id = std::max(max_id, n.part_id);
    std::vector<Isometry> out(static_cast<std::size_t>(max_id + 1), Isometry::Identity());
    for (const auto& n : tree.nodes) {
        Isometry t = Isometry::Identity();
        // Parent transforms act last: T = T_root->a * T_a->b * ... * T_x->part.
        for (int id : tree.path_from_root(n.part_id)) {
            if (id == tree.root) continue;
            const TreeEdge* edge = tree.parent_edge(id);
            auto it = pose.values.find(id);
            const double value = it == pose.values.end() ? 0.0 : it->second;
            t = t * joint_transform(edge->joint, value);
        }
        out[static_cast<std::size_t>(n.part_id)] = t;
    }
    return out;
}

PointCloud apply_articulation(const GroundTruthObject& object, const JointPose& pose,
                              const PointCloud& rest_cloud) {
    if (!rest_cloud.labels) throw SchemaError("apply_articulation needs a labeled cloud");
    check_pose(object.tree, pose);
    const auto transforms = part_transforms(object.tree, pose);
    PointCloud out;
    out.labels = rest_cloud.labels;
    out.points.reserve(rest_cloud.points.size());
    const auto& labels = *rest_cloud.labels;
    for (std::size_t i = 0; i < rest_cloud.points.size(); ++i) {
        const int label = labels[i];
        if (label < 0 || static_cast<std::size_t>(label) >= transforms.size() || !object.tree.node(label))
            throw SchemaError("point " + std::to_string(i) + " has unknown part label " + std::to_string(label));
        out.points.push_back(transforms[static_cast<std::size_t>(label)] * rest_cloud.points[i]);
    }
    return out;
}

} // namespace kinehier
