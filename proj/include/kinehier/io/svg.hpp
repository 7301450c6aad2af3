#pragma once

#include "kinehier/kinecore/types.hpp"

#include <string>
#include <vector>

namespace kinehier::io {

/// Static orthographic views (front x-z, side y-z, top x-y) of a cloud on
/// one shared scale. Points are colored by `color_keys[label]` into a fixed
/// palette; unlabeled clouds are drawn in one color. `legend[k]`, when
/// given, names palette entry k.
std::string cloud_to_svg(const PointCloud& cloud, const std::vector<int>& color_keys = {},
                         const std::vector<std::string>& legend = {}, const std::string& title = {});

/// Coloring by motion type of each label, given the tree over those labels.
std::string cloud_motion_svg(const PointCloud& cloud, const KinematicTree& tree, const std::string& title = {});

} // namespace kinehier::io
