#pragma once

#include "kinehier/kinecore/types.hpp"

#include <cstdint>

namespace kinehier::synthgen {

struct GeneratorOptions {
    /// Minimum clearance between distinct parts (m). Zero gives touching parts
    /// with a 3 mm sliding clearance; a few centimetres makes every part a
    /// separate spatial cluster, for the clustering baseline.
    double part_gap = 0.0;
};

/// Procedural articulated object, deterministic in (category, seed, options).
///
/// Morphologies (part 0 is always the static root):
///  - cabinet: hollow panel body; 1-4 drawers (prismatic, +y pull axis) and/or
///    1-2 doors (revolute, vertical hinge); every drawer/door carries a static
///    handle child. At most 5 movable parts, so 3..11 parts in total.
///  - lamp: disk base, 1-3 revolute arm segments in a chain (hinges about y),
///    static head on the last arm.
///  - chair: star base, prismatic seat column (+z), static back on the seat,
///    3-5 revolute wheels on the base.
/// The rest-pose bounding-box diagonal is rescaled into [0.5, 2.0] m if needed.
GroundTruthObject generate_object(Category category, std::uint64_t seed,
                                  const GeneratorOptions& options = {});

/// Uniform joint values within each movable joint's limits.
JointPose sample_pose(const GroundTruthObject& object, std::uint64_t seed);

/// Rest-pose bounding box over all primitive corners / cylinder extremes.
Aabb rest_bounding_box(const GroundTruthObject& object);

} // namespace kinehier::synthgen
