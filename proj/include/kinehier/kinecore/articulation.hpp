#pragma once

#include "kinehier/kinecore/types.hpp"

#include <vector>

namespace kinehier {

/// Transform of a single joint at `value` (identity for fixed joints).
Isometry joint_transform(const Joint& joint, double value);

/// World transform of every part under `pose`, indexed by part id. The root
/// maps to identity; each part composes the joint transforms on its
/// root-to-part path.
std::vector<Isometry> part_transforms(const KinematicTree& tree, const JointPose& pose);

/// Throws LimitViolationError when a pose value lies outside its joint range,
/// SchemaError when it names a part with no movable joint.
void check_pose(const KinematicTree& tree, const JointPose& pose);

/// Moves each labeled rest-pose point by its part's articulated transform.
PointCloud apply_articulation(const GroundTruthObject& object, const JointPose& pose,
                              const PointCloud& rest_cloud);

} // namespace kinehier
