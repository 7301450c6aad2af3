#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace kinehier {

using Vec3 = Eigen::Vector3d;
using Vec3f = Eigen::Vector3f;
using Mat4 = Eigen::Matrix4d;
using Isometry = Eigen::Isometry3d;

/// Axis-aligned bounding box. An empty box has min > max.
struct Aabb {
    Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

    bool empty() const { return (min.array() > max.array()).any(); }
    void extend(const Vec3& p) {
        min = min.cwiseMin(p);
        max = max.cwiseMax(p);
    }
    Vec3 center() const { return 0.5 * (min + max); }
    Vec3 extents() const { return empty() ? Vec3::Zero() : Vec3(max - min); }
    double diagonal() const { return empty() ? 0.0 : (max - min).norm(); }
    Aabb expanded(double margin) const {
        Aabb out = *this;
        out.min.array() -= margin;
        out.max.array() += margin;
        return out;
    }
    Aabb intersection(const Aabb& o) const {
        Aabb out;
        out.min = min.cwiseMax(o.min);
        out.max = max.cwiseMin(o.max);
        return out;
    }
};

inline Aabb bounding_box(std::span<const Vec3> points) {
    Aabb box;
    for (const auto& p : points) box.extend(p);
    return box;
}

/// Squared distance with a fixed evaluation order; the spatial hash and its
/// brute-force counterpart both go through here so results compare exactly.
inline double squared_distance(const Vec3& a, const Vec3& b) {
    const double dx = a.x() - b.x();
    const double dy = a.y() - b.y();
    const double dz = a.z() - b.z();
    return dx * dx + dy * dy + dz * dz;
}

/// Rigid motion of `value` along/about a unit `axis` through `origin`.
inline Isometry revolute_transform(const Vec3& axis, const Vec3& origin, double angle) {
    Isometry t = Isometry::Identity();
    t.translate(origin);
    t.rotate(Eigen::AngleAxisd(angle, axis));
    t.translate(-origin);
    return t;
}

inline Isometry prismatic_transform(const Vec3& axis, double distance) {
    Isometry t = Isometry::Identity();
    t.translate(distance * axis);
    return t;
}

} // namespace kinehier
