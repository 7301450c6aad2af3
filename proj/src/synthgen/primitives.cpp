#include "kinehier/synthgen/primitives.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace kinehier::synthgen {

namespace {

Vec3 sample_box_local(const Vec3& h, Rng& rng) {
    const std::array<double, 3> face_area{h.y() * h.z(), h.x() * h.z(), h.x() * h.y()};
    const double total = 2.0 * (face_area[0] + face_area[1] + face_area[2]);
    double pick = uniform(rng, 0.0, total);
    int face = 0;
    for (; face < 5; ++face) {
        const double a = face_area[static_cast<std::size_t>(face / 2)];
        if (pick < a) break;
        pick -= a;
    }
    const int axis = face / 2;
    const double sign = (face % 2 == 0) ? 1.0 : -1.0;
    Vec3 q;
    for (int i = 0; i < 3; ++i) q[i] = uniform(rng, -h[i], h[i]);
    q[axis] = sign * h[axis];
    return q;
}

Vec3 sample_cylinder_local(double r, double h, Rng& rng) {
    const double side = 2.0 * std::numbers::pi * r * 2.0 * h;
    const double cap = std::numbers::pi * r * r;
    const double pick = uniform(rng, 0.0, side + 2.0 * cap);
    const double theta = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    if (pick < side) {
        return {r * std::cos(theta), r * std::sin(theta), uniform(rng, -h, h)};
    }
    const double rho = r * std::sqrt(uniform(rng, 0.0, 1.0));
    const double z = pick < side + cap ? h : -h;
    return {rho * std::cos(theta), rho * std::sin(theta), z};
}

} // namespace

Vec3 sample_surface(const Primitive& primitive, Rng& rng) {
    const Vec3 local = primitive.shape == PrimitiveShape::Box
                           ? sample_box_local(primitive.half_extents, rng)
                           : sample_cylinder_local(primitive.radius, primitive.half_height, rng);
    return primitive.pose * local;
}

double distance_to_surface(const Primitive& primitive, const Vec3& point) {
    const Vec3 q = primitive.pose.inverse() * point;
    if (primitive.shape == PrimitiveShape::Box) {
        const Vec3 d = q.cwiseAbs() - primitive.half_extents;
        if ((d.array() <= 0.0).all()) return -d.maxCoeff();
        return d.cwiseMax(0.0).norm();
    }
    const double dr = std::hypot(q.x(), q.y()) - primitive.radius;
    const double dz = std::abs(q.z()) - primitive.half_height;
    if (dr <= 0.0 && dz <= 0.0) return std::min(-dr, -dz);
    return std::hypot(std::max(dr, 0.0), std::max(dz, 0.0));
}

Aabb primitive_bounds(const Primitive& primitive, const Isometry& transform) {
    const Isometry t = transform * primitive.pose;
    const Eigen::Matrix3d rot = t.linear();
    Vec3 half;
    if (primitive.shape == PrimitiveShape::Box) {
        half = rot.cwiseAbs() * primitive.half_extents;
    } else {
        const Vec3 axis = rot.col(2);
        for (int i = 0; i < 3; ++i) {
            const double a = std::min(1.0, std::abs(axis[i]));
            half[i] = primitive.half_height * a + primitive.radius * std::sqrt(1.0 - a * a);
        }
    }
    Aabb box;
    box.min = t.translation() - half;
    box.max = t.translation() + half;
    return box;
}

} // namespace kinehier::synthgen
