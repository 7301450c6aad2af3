#include "kinehier/kinecore/types.hpp"

#include "kinehier/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kinehier {

int PointCloud::part_count() const {
    if (!labels || labels->empty()) return 0;
    return *std::max_element(labels->begin(), labels->end()) + 1;
}

void check_point_cloud(const PointCloud& cloud) {
    for (std::size_t i = 0; i < cloud.points.size(); ++i) {
        if (!cloud.points[i].allFinite())
            throw SchemaError("point " + std::to_string(i) + " has a non-finite coordinate");
    }
    if (!cloud.labels) return;
    const auto& labels = *cloud.labels;
    if (labels.size() != cloud.points.size())
        throw SchemaError("label count " + std::to_string(labels.size()) + " != point count " +
                          std::to_string(cloud.points.size()));
    const int parts = cloud.part_count();
    std::vector<bool> seen(static_cast<std::size_t>(std::max(parts, 0)), false);
    for (int l : labels) {
        if (l < 0) throw SchemaError("negative part label " + std::to_string(l));
        seen[static_cast<std::size_t>(l)] = true;
    }
    for (int p = 0; p < parts; ++p) {
        if (!seen[static_cast<std::size_t>(p)])
            throw SchemaError("part labels are not dense: label " + std::to_string(p) + " unused");
    }
}

std::string_view to_string(MotionType type) {
    switch (type) {
    case MotionType::Static: return "static";
    case MotionType::Rotating: return "rotating";
    case MotionType::Translating: return "translating";
    case MotionType::RotatingTranslating: return "rotating_translating";
    }
    return "unknown";
}

MotionType motion_type_from_string(std::string_view name) {
    for (int i = 0; i < kMotionTypeCount; ++i) {
        const auto t = static_cast<MotionType>(i);
        if (to_string(t) == name) return t;
    }
    throw SchemaError("unknown motion type '" + std::string(name) + "'");
}

std::string_view to_string(JointKind kind) {
    switch (kind) {
    case JointKind::Fixed: return "fixed";
    case JointKind::Revolute: return "revolute";
    case JointKind::Prismatic: return "prismatic";
    }
    return "unknown";
}

JointKind joint_kind_from_string(std::string_view name) {
    for (auto k : {JointKind::Fixed, JointKind::Revolute, JointKind::Prismatic}) {
        if (to_string(k) == name) return k;
    }
    throw SchemaError("unknown joint kind '" + std::string(name) + "'");
}

std::string_view to_string(Category category) {
    switch (category) {
    case Category::Cabinet: return "cabinet";
    case Category::Lamp: return "lamp";
    case Category::Chair: return "chair";
    }
    return "unknown";
}

Category category_from_string(std::string_view name) {
    for (auto c : {Category::Cabinet, Category::Lamp, Category::Chair}) {
        if (to_string(c) == name) return c;
    }
    throw ConfigError("unknown category '" + std::string(name) + "'");
}

double Primitive::surface_area() const {
    if (shape == PrimitiveShape::Box) {
        const Vec3 e = 2.0 * half_extents;
        return 2.0 * (e.x() * e.y() + e.y() * e.z() + e.x() * e.z());
    }
    return 2.0 * std::numbers::pi * radius * (radius + 2.0 * half_height);
}

const TreeNode* KinematicTree::node(int part_id) const {
    auto it = std::find_if(nodes.begin(), nodes.end(),
                           [&](const TreeNode& n) { return n.part_id == part_id; });
    return it == nodes.end() ? nullptr : &*it;
}

const TreeEdge* KinematicTree::parent_edge(int part_id) const {
    auto it = std::find_if(edges.begin(), edges.end(),
                           [&](const TreeEdge& e) { return e.child == part_id; });
    return it == edges.end() ? nullptr : &*it;
}

std::optional<int> KinematicTree::parent_of(int part_id) const {
    if (const auto* e = parent_edge(part_id)) return e->parent;
    return std::nullopt;
}

std::vector<int> KinematicTree::children_of(int part_id) const {
    std::vector<int> out;
    for (const auto& e : edges) {
        if (e.parent == part_id) out.push_back(e.child);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<int> KinematicTree::path_from_root(int part_id) const {
    std::vector<int> path{part_id};
    const std::size_t limit = nodes.size();
    while (path.back() != root) {
        auto parent = parent_of(path.back());
        if (!parent || path.size() > limit)
            throw StructuralError("part " + std::to_string(part_id) + " is not reachable from the root");
        path.push_back(*parent);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

} // namespace kinehier
