#pragma once

#include "kinehier/kinecore/types.hpp"
#include "kinehier/random.hpp"

namespace kinehier::synthgen {

/// Area-uniform sample on the primitive surface, in the object frame.
Vec3 sample_surface(const Primitive& primitive, Rng& rng);

/// Unsigned distance from `point` (object frame) to the primitive surface.
double distance_to_surface(const Primitive& primitive, const Vec3& point);

/// World-space bounding box of the primitive placed by `transform`.
Aabb primitive_bounds(const Primitive& primitive, const Isometry& transform = Isometry::Identity());

} // namespace kinehier::synthgen
