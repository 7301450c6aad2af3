#pragma once

#include "kinehier/kinecore/types.hpp"

#include <string>

namespace kinehier::treeextract {

/// URDF-like XML. One <link name="part_N"/> per node (ascending id), one
/// <joint> per edge (ascending child id) with type fixed/revolute/prismatic,
/// <parent>, <child>, <origin xyz rpy="0 0 0">, <axis xyz> for movable joints
/// and <limit lower upper> when the limits are not both zero. All link
/// frames coincide with the object frame at rest, so origins are object
/// coordinates. A low-confidence axis is flagged by an XML comment.
std::string tree_to_urdf(const KinematicTree& tree, const std::string& robot_name = "kinehier_object");

} // namespace kinehier::treeextract
