#include "kinehier/synthgen/generator.hpp"

#include "kinehier/errors.hpp"
#include "kinehier/random.hpp"
#include "kinehier/synthgen/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace kinehier::synthgen {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMinDiagonal = 0.5;
constexpr double kMaxDiagonal = 2.0;
constexpr double kSlideClearance = 0.003;

class ObjectBuilder {
public:
    explicit ObjectBuilder(Category category, std::uint64_t seed) {
        object_.category = category;
        object_.seed = seed;
        object_.tree.root = 0;
    }

    int add_part(MotionType motion) {
        const int id = static_cast<int>(object_.tree.nodes.size());
        object_.tree.nodes.push_back({id, motion});
        return id;
    }

    void attach(int parent, int child, Joint joint) { object_.tree.edges.push_back({parent, child, joint}); }

    void box(int part, const Vec3& lo, const Vec3& hi, const Isometry& frame = Isometry::Identity()) {
        Primitive p;
        p.shape = PrimitiveShape::Box;
        p.part_id = part;
        p.pose = frame * Eigen::Translation3d(0.5 * (lo + hi));
        p.half_extents = 0.5 * (hi - lo);
        object_.primitives.push_back(p);
    }

    void cylinder(int part, const Vec3& center, double radius, double half_height,
                  const Eigen::Matrix3d& rotation = Eigen::Matrix3d::Identity()) {
        Primitive p;
        p.shape = PrimitiveShape::Cylinder;
        p.part_id = part;
        p.pose = Isometry::Identity();
        p.pose.translate(center);
        p.pose.rotate(rotation);
        p.radius = radius;
        p.half_height = half_height;
        object_.primitives.push_back(p);
    }

    GroundTruthObject take() { return std::move(object_); }

private:
    GroundTruthObject object_;
};

Joint fixed_joint() { return Joint{}; }

Joint revolute(const Vec3& axis, const Vec3& origin, double lo, double hi) {
    return Joint{JointKind::Revolute, axis.normalized(), origin, lo, hi, false};
}

Joint prismatic(const Vec3& axis, const Vec3& origin, double lo, double hi) {
    return Joint{JointKind::Prismatic, axis.normalized(), origin, lo, hi, false};
}

// Cabinet: front faces +y, floor at z = 0.
GroundTruthObject make_cabinet(std::uint64_t seed, Rng& rng, const GeneratorOptions& opt) {
    ObjectBuilder b(Category::Cabinet, seed);
    const double gap = opt.part_gap;
    const double clearance = std::max(kSlideClearance, gap);

    const double width = uniform(rng, 0.35, 0.6);
    const double depth = uniform(rng, width + 0.1, width + 0.35);  // drawers elongated along pull
    const double t = uniform(rng, 0.015, 0.025);

    int drawers = 0;
    int doors = 0;
    switch (uniform_int(rng, 0, 2)) {
    case 0: drawers = uniform_int(rng, 1, 4); break;
    case 1: doors = uniform_int(rng, 1, 2); break;
    default:
        doors = uniform_int(rng, 1, 2);
        drawers = uniform_int(rng, 1, 3);
        break;
    }
    const double drawer_h = uniform(rng, 0.14, 0.24);
    const double door_w = doors == 2 ? 0.5 * width : width;
    const double door_min = std::max(1.15 * door_w, 0.35);
    const double door_h = doors ? uniform(rng, door_min, door_min + 0.35) : 0.0;
    const double height = t + (doors ? door_h + t : 0.0) + drawers * (drawer_h + t);

    const double x0 = -0.5 * width;
    const double x1 = 0.5 * width;
    const double y0 = -0.5 * depth;
    const double y1 = 0.5 * depth;

    const int body = b.add_part(MotionType::Static);
    b.box(body, {x0, y0, 0}, {x0 + t, y1, height});
    b.box(body, {x1 - t, y0, 0}, {x1, y1, height});
    b.box(body, {x0 + t, y0, 0}, {x1 - t, y0 + t, height});
    b.box(body, {x0 + t, y0 + t, 0}, {x1 - t, y1, t});

    double z = t;
    if (doors) {
        b.box(body, {x0 + t, y0 + t, z + door_h}, {x1 - t, y1, z + door_h + t});
        const double zb = z;
        const double thick = uniform(rng, 0.015, 0.025);
        const double door_y0 = y1 + clearance;
        for (int d = 0; d < doors; ++d) {
            // d == 0 hinges on the left edge unless it is the only door and the
            // coin says right.
            const bool left = doors == 2 ? d == 0 : uniform_int(rng, 0, 1) == 0;
            double dx0 = x0;
            double dx1 = x1;
            if (doors == 2) {
                dx0 = left ? x0 : 0.5 * clearance;
                dx1 = left ? -0.5 * clearance : x1;
            }
            const int door = b.add_part(MotionType::Rotating);
            b.box(door, {dx0, door_y0, zb + clearance}, {dx1, door_y0 + thick, zb + door_h - clearance});
            const double hinge_x = left ? dx0 : dx1;
            const Vec3 axis = left ? Vec3::UnitZ() : Vec3(-Vec3::UnitZ());
            b.attach(body, door, revolute(axis, {hinge_x, door_y0, zb + 0.5 * door_h}, 0.0, 0.5 * kPi));

            const int handle = b.add_part(MotionType::Static);
            const double len = uniform(rng, 0.1, std::min(0.25, 0.6 * door_h));
            const double hx = left ? dx1 - 0.05 : dx0 + 0.05;
            const double hy0 = door_y0 + thick + gap;
            const double hz = zb + 0.5 * door_h;
            b.box(handle, {hx - 0.01, hy0, hz - 0.5 * len}, {hx + 0.01, hy0 + 0.025, hz + 0.5 * len});
            b.attach(door, handle, fixed_joint());
        }
        z += door_h + t;
    }

    for (int k = 0; k < drawers; ++k) {
        b.box(body, {x0 + t, y0 + t, z + drawer_h}, {x1 - t, y1, z + drawer_h + t});
        const int drawer = b.add_part(MotionType::Translating);
        const Vec3 lo{x0 + t + clearance, y0 + t + clearance, z + clearance};
        const Vec3 hi{x1 - t - clearance, y1, z + drawer_h - clearance};
        b.box(drawer, lo, hi);
        const double travel = 0.75 * (hi.y() - lo.y());
        b.attach(body, drawer, prismatic(Vec3::UnitY(), {0.0, y1, 0.5 * (lo.z() + hi.z())}, 0.0, travel));

        const int handle = b.add_part(MotionType::Static);
        const double len = uniform(rng, 0.3, 0.6) * (hi.x() - lo.x());
        const double hz = 0.5 * (lo.z() + hi.z());
        b.box(handle, {-0.5 * len, y1 + gap, hz - 0.01}, {0.5 * len, y1 + gap + 0.025, hz + 0.01});
        b.attach(drawer, handle, fixed_joint());
        z += drawer_h + t;
    }
    return b.take();
}

// Lamp: chain of arms hinged about y, rest pose straight up.
GroundTruthObject make_lamp(std::uint64_t seed, Rng& rng, const GeneratorOptions& opt) {
    ObjectBuilder b(Category::Lamp, seed);
    const double gap = opt.part_gap;

    const double base_r = uniform(rng, 0.1, 0.18);
    const double base_hh = uniform(rng, 0.01, 0.025);
    const int base = b.add_part(MotionType::Static);
    b.cylinder(base, {0, 0, base_hh}, base_r, base_hh);

    const int arms = uniform_int(rng, 1, 3);
    const double half_w = uniform(rng, 0.01, 0.0175);
    double z = 2.0 * base_hh;
    int parent = base;
    for (int k = 0; k < arms; ++k) {
        const double len = uniform(rng, 0.25, 0.5);
        const int arm = b.add_part(MotionType::Rotating);
        b.box(arm, {-half_w, -half_w, z + gap}, {half_w, half_w, z + len});
        const double limit = k == 0 ? kPi / 3.0 : kPi / 2.0;
        b.attach(parent, arm, revolute(Vec3::UnitY(), {0, 0, z}, -limit, limit));
        parent = arm;
        z += len;
    }

    const double head_r = uniform(rng, 0.06, 0.1);
    const double head_hh = uniform(rng, 0.04, 0.08);
    const int head = b.add_part(MotionType::Static);
    b.cylinder(head, {0, 0, z + gap + head_hh}, head_r, head_hh);
    b.attach(parent, head, fixed_joint());
    return b.take();
}

// Office chair: star base with casters, height-adjustable seat, fixed back.
GroundTruthObject make_chair(std::uint64_t seed, Rng& rng, const GeneratorOptions& opt) {
    ObjectBuilder b(Category::Chair, seed);
    const double gap = opt.part_gap;

    const int wheels = uniform_int(rng, 3, 5);
    const double wheel_r = uniform(rng, 0.025, 0.04);
    const double leg_len = uniform(rng, 0.25, 0.33);
    const double leg_z0 = 2.0 * wheel_r + gap;
    const double leg_z1 = leg_z0 + 0.04;
    const double hub_top = leg_z1 + 0.06;

    const int base = b.add_part(MotionType::Static);
    b.cylinder(base, {0, 0, 0.5 * (leg_z0 + hub_top)}, 0.045, 0.5 * (hub_top - leg_z0));
    std::vector<double> angles;
    for (int k = 0; k < wheels; ++k) {
        const double phi = 2.0 * kPi * k / wheels;
        angles.push_back(phi);
        Isometry frame = Isometry::Identity();
        frame.rotate(Eigen::AngleAxisd(phi, Vec3::UnitZ()));
        b.box(base, {0.0, -0.015, leg_z0}, {leg_len, 0.015, leg_z1}, frame);
    }

    const double seat_w = uniform(rng, 0.4, 0.5);
    const double seat_d = uniform(rng, 0.4, 0.5);
    const double seat_z = uniform(rng, 0.42, 0.55);
    const int seat = b.add_part(MotionType::Translating);
    const double col_z0 = hub_top + gap;
    b.cylinder(seat, {0, 0, 0.5 * (col_z0 + seat_z)}, 0.025, 0.5 * (seat_z - col_z0));
    b.box(seat, {-0.5 * seat_w, -0.5 * seat_d, seat_z}, {0.5 * seat_w, 0.5 * seat_d, seat_z + 0.06});
    b.attach(base, seat, prismatic(Vec3::UnitZ(), {0, 0, col_z0}, 0.0, 0.12));

    const double back_h = uniform(rng, 0.35, 0.55);
    const int back = b.add_part(MotionType::Static);
    const double back_z0 = seat_z + 0.06 + gap;
    b.box(back, {-0.45 * seat_w, -0.5 * seat_d, back_z0}, {0.45 * seat_w, -0.5 * seat_d + 0.03, back_z0 + back_h});
    b.attach(seat, back, fixed_joint());

    for (double phi : angles) {
        const Vec3 dir{std::cos(phi), std::sin(phi), 0.0};
        const Vec3 axle{-std::sin(phi), std::cos(phi), 0.0};
        const Vec3 center = (leg_len - wheel_r) * dir + Vec3(0, 0, wheel_r);
        // Cylinder z-axis onto the axle.
        const Eigen::Matrix3d rot = Eigen::Quaterniond::FromTwoVectors(Vec3::UnitZ(), axle).toRotationMatrix();
        const int wheel = b.add_part(MotionType::Rotating);
        b.cylinder(wheel, center, wheel_r, 0.012, rot);
        b.attach(base, wheel, revolute(axle, center, -kPi, kPi));
    }
    return b.take();
}

void rescale(GroundTruthObject& object, double factor) {
    for (auto& p : object.primitives) {
        p.pose.translation() *= factor;
        p.half_extents *= factor;
        p.radius *= factor;
        p.half_height *= factor;
    }
    for (auto& e : object.tree.edges) {
        e.joint.origin *= factor;
        if (e.joint.kind == JointKind::Prismatic) {
            e.joint.lower *= factor;
            e.joint.upper *= factor;
        }
    }
}

} // namespace

Aabb rest_bounding_box(const GroundTruthObject& object) {
    Aabb box;
    for (const auto& p : object.primitives) {
        const Aabb pb = primitive_bounds(p);
        box.extend(pb.min);
        box.extend(pb.max);
    }
    return box;
}

GroundTruthObject generate_object(Category category, std::uint64_t seed, const GeneratorOptions& options) {
    if (!(options.part_gap >= 0.0)) throw ConfigError("part_gap must be non-negative");
    Rng rng(derive_seed({0x6f626a656374ULL, static_cast<std::uint64_t>(category), seed}));
    GroundTruthObject object;
    switch (category) {
    case Category::Cabinet: object = make_cabinet(seed, rng, options); break;
    case Category::Lamp: object = make_lamp(seed, rng, options); break;
    case Category::Chair: object = make_chair(seed, rng, options); break;
    default: throw ConfigError("unknown category");
    }
    const double diag = rest_bounding_box(object).diagonal();
    if (diag > kMaxDiagonal) rescale(object, 0.98 * kMaxDiagonal / diag);
    else if (diag < kMinDiagonal) rescale(object, 1.02 * kMinDiagonal / diag);
    return object;
}

JointPose sample_pose(const GroundTruthObject& object, std::uint64_t seed) {
    Rng rng(derive_seed({0x706f7365ULL, object.seed, seed}));
    JointPose pose;
    auto edges = object.tree.edges;
    std::sort(edges.begin(), edges.end(), [](const TreeEdge& a, const TreeEdge& b) { return a.child < b.child; });
    for (const auto& e : edges) {
        if (e.joint.kind == JointKind::Fixed) continue;
        pose.values[e.child] = uniform(rng, e.joint.lower, e.joint.upper);
    }
    return pose;
}

} // namespace kinehier::synthgen
