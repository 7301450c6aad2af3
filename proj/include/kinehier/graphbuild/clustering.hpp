#pragma once

#include "kinehier/kinecore/types.hpp"

namespace kinehier::graphbuild {

/// Connected components of the radius graph (distance < radius). Labels are
/// assigned by component size, largest first; ties by lowest point index.
PointCloud segment_clustering(const PointCloud& cloud, double radius);

} // namespace kinehier::graphbuild
