#pragma once

#include "kinehier/geometry.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kinehier {

/// 3D points in meters with optional per-point part labels.
struct PointCloud {
    std::vector<Vec3> points;
    std::optional<std::vector<int>> labels;

    std::size_t size() const { return points.size(); }
    bool labeled() const { return labels.has_value(); }
    /// Number of distinct part labels (max label + 1); 0 when unlabeled or empty.
    int part_count() const;
};

/// Checks finiteness and label density. Throws SchemaError on violation.
void check_point_cloud(const PointCloud& cloud);

/// Classifier output index order is fixed: Static=0 .. RotatingTranslating=3.
enum class MotionType : std::uint8_t {
    Static = 0,
    Rotating = 1,
    Translating = 2,
    RotatingTranslating = 3,
};
inline constexpr int kMotionTypeCount = 4;

std::string_view to_string(MotionType type);
MotionType motion_type_from_string(std::string_view name);

enum class JointKind : std::uint8_t { Fixed, Revolute, Prismatic };

std::string_view to_string(JointKind kind);
JointKind joint_kind_from_string(std::string_view name);

struct Joint {
    JointKind kind = JointKind::Fixed;
    Vec3 axis = Vec3::UnitZ();
    Vec3 origin = Vec3::Zero();
    double lower = 0.0;
    double upper = 0.0;
    /// Set by the bounding-box heuristic when it had to fall back.
    bool low_confidence = false;

    bool operator==(const Joint&) const = default;
};

struct TreeNode {
    int part_id = 0;
    MotionType motion = MotionType::Static;

    bool operator==(const TreeNode&) const = default;
};

/// Directed edge parent -> child: the child moves with the parent.
struct TreeEdge {
    int parent = 0;
    int child = 0;
    Joint joint;

    bool operator==(const TreeEdge&) const = default;
};

struct KinematicTree {
    std::vector<TreeNode> nodes;
    int root = 0;
    std::vector<TreeEdge> edges;

    const TreeNode* node(int part_id) const;
    const TreeEdge* parent_edge(int part_id) const;
    std::optional<int> parent_of(int part_id) const;
    std::vector<int> children_of(int part_id) const;
    /// Part ids from the root down to `part_id` inclusive. Requires a valid tree.
    std::vector<int> path_from_root(int part_id) const;

    bool operator==(const KinematicTree&) const = default;
};

enum class PrimitiveShape : std::uint8_t { Box, Cylinder };

/// Box: axis-aligned in its own frame, `half_extents` along x/y/z.
/// Cylinder: z-aligned in its own frame, `radius` and `half_height`.
/// `pose` places the primitive in the object frame at rest.
struct Primitive {
    PrimitiveShape shape = PrimitiveShape::Box;
    int part_id = 0;
    Isometry pose = Isometry::Identity();
    Vec3 half_extents = Vec3::Zero();
    double radius = 0.0;
    double half_height = 0.0;

    double surface_area() const;
};

enum class Category : std::uint8_t { Cabinet, Lamp, Chair };

std::string_view to_string(Category category);
Category category_from_string(std::string_view name);

struct GroundTruthObject {
    Category category = Category::Cabinet;
    std::uint64_t seed = 0;
    std::vector<Primitive> primitives;
    KinematicTree tree;

    int part_count() const { return static_cast<int>(tree.nodes.size()); }
};

/// Joint values keyed by the child part id of each non-fixed joint.
struct JointPose {
    std::map<int, double> values;

    bool operator==(const JointPose&) const = default;
};

} // namespace kinehier
