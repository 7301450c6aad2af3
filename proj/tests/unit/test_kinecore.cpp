#include "kinehier/errors.hpp"
#include "kinehier/kinecore/articulation.hpp"
#include "kinehier/kinecore/tree.hpp"
#include "kinehier/random.hpp"
#include "kinehier/synthgen/generator.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <regex>
#include <set>

using namespace kinehier;

namespace {

KinematicTree chain_tree(int n) {
    KinematicTree t;
    for (int i = 0; i < n; ++i) t.nodes.push_back({i, i == 0 ? MotionType::Static : MotionType::Rotating});
    t.root = 0;
    for (int i = 1; i < n; ++i) {
        TreeEdge e{i - 1, i, {}};
        e.joint.kind = JointKind::Revolute;
        e.joint.lower = -std::numbers::pi;
        e.joint.upper = std::numbers::pi;
        t.edges.push_back(e);
    }
    return t;
}

bool has_violation(const std::vector<TreeViolation>& v, const std::string& name) {
    for (const auto& x : v)
        if (x.invariant == name) return true;
    return false;
}

// Rodrigues rotation as an explicit 4x4 matrix, independent of Eigen's AngleAxis.
Eigen::Matrix4d rodrigues(const Vec3& axis, const Vec3& origin, double angle) {
    const Vec3 k = axis.normalized();
    Eigen::Matrix3d K;
    K << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
    const Eigen::Matrix3d R = Eigen::Matrix3d::Identity() + std::sin(angle) * K + (1 - std::cos(angle)) * K * K;
    Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
    T.topLeftCorner<3, 3>() = R;
    T.topRightCorner<3, 1>() = origin - R * origin;
    return T;
}

} // namespace

TEST(PointCloud, ValidationRejectsGapsAndNonFinite) {
    PointCloud c;
    c.points = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
    c.labels = std::vector<int>{0, 2};
    EXPECT_THROW(check_point_cloud(c), SchemaError);
    c.labels = std::vector<int>{0, 1};
    EXPECT_NO_THROW(check_point_cloud(c));
    c.points[1].x() = NAN;
    EXPECT_THROW(check_point_cloud(c), SchemaError);
    c.points[1].x() = 1;
    c.labels = std::vector<int>{0};
    EXPECT_THROW(check_point_cloud(c), SchemaError);
}

TEST(MotionType, FixedIndexOrder) {
    EXPECT_EQ(static_cast<int>(MotionType::Static), 0);
    EXPECT_EQ(static_cast<int>(MotionType::Rotating), 1);
    EXPECT_EQ(static_cast<int>(MotionType::Translating), 2);
    EXPECT_EQ(static_cast<int>(MotionType::RotatingTranslating), 3);
    EXPECT_EQ(kMotionTypeCount, 4);
    for (int k = 0; k < kMotionTypeCount; ++k)
        EXPECT_EQ(motion_type_from_string(to_string(static_cast<MotionType>(k))), static_cast<MotionType>(k));
}

TEST(Articulation, ZeroPoseIsIdentity) {
    const auto obj = synthgen::generate_object(Category::Cabinet, 3);
    JointPose zero;
    for (const auto& e : obj.tree.edges)
        if (e.joint.kind != JointKind::Fixed) zero.values[e.child] = 0.0;
    PointCloud rest;
    Rng rng(1);
    std::vector<int> labels;
    for (int p = 0; p < obj.part_count(); ++p) {
        rest.points.push_back(Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)));
        labels.push_back(p);
    }
    rest.labels = labels;
    const auto moved = apply_articulation(obj, zero, rest);
    for (std::size_t i = 0; i < rest.size(); ++i) EXPECT_EQ(moved.points[i], rest.points[i]);
    EXPECT_EQ(moved.labels, rest.labels);
}

TEST(Articulation, HalfTurnAboutZ) {
    GroundTruthObject obj;
    obj.tree = chain_tree(2);
    obj.tree.edges[0].joint.axis = Vec3::UnitZ();
    obj.tree.edges[0].joint.origin = Vec3::Zero();
    PointCloud rest;
    rest.points = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
    rest.labels = std::vector<int>{0, 1};
    JointPose pose;
    pose.values[1] = std::numbers::pi;
    const auto moved = apply_articulation(obj, pose, rest);
    EXPECT_NEAR(moved.points[1].x(), -1.0, 1e-6);
    EXPECT_NEAR(moved.points[1].y(), 0.0, 1e-6);
    EXPECT_NEAR(moved.points[1].z(), 0.0, 1e-6);
}

TEST(Articulation, ErrorsOnLimitsAndUnknownParts) {
    GroundTruthObject obj;
    obj.tree = chain_tree(2);
    obj.tree.edges[0].joint.upper = 0.5;
    PointCloud rest;
    rest.points = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
    rest.labels = std::vector<int>{0, 1};
    JointPose pose;
    pose.values[1] = 0.6;
    EXPECT_THROW(apply_articulation(obj, pose, rest), LimitViolationError);
    pose.values.clear();
    pose.values[7] = 0.1;
    EXPECT_THROW(apply_articulation(obj, pose, rest), SchemaError);
    pose.values.clear();
    rest.labels = std::vector<int>{0, 5};
    EXPECT_THROW(apply_articulation(obj, pose, rest), SchemaError);
}

TEST(Articulation, ChainMatchesMatrixProductOracle) {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        GroundTruthObject obj;
        obj.tree = chain_tree(4);
        JointPose pose;
        for (auto& e : obj.tree.edges) {
            const bool prismatic = uniform(rng, 0, 1) < 0.3;
            e.joint.kind = prismatic ? JointKind::Prismatic : JointKind::Revolute;
            e.joint.axis = Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)).normalized();
            e.joint.origin = Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
            e.joint.lower = -2;
            e.joint.upper = 2;
            pose.values[e.child] = uniform(rng, -2, 2);
        }
        PointCloud rest;
        std::vector<int> labels;
        for (int i = 0; i < 40; ++i) {
            rest.points.push_back(Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)));
            labels.push_back(i % 4);
        }
        rest.labels = labels;
        const auto moved = apply_articulation(obj, pose, rest);
        for (std::size_t i = 0; i < rest.size(); ++i) {
            Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
            for (int d = 1; d <= labels[i]; ++d) {
                const auto& j = obj.tree.edges[static_cast<std::size_t>(d - 1)].joint;
                Eigen::Matrix4d J = Eigen::Matrix4d::Identity();
                if (j.kind == JointKind::Revolute) J = rodrigues(j.axis, j.origin, pose.values[d]);
                else J.topRightCorner<3, 1>() = j.axis * pose.values[d];
                T = T * J;
            }
            const Eigen::Vector4d p = T * rest.points[i].homogeneous();
            EXPECT_LT((p.head<3>() - moved.points[i]).norm(), 1e-5);
        }
    }
}

TEST(Articulation, RigidAndInvertible) {
    Rng rng(5);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto obj = synthgen::generate_object(static_cast<Category>(seed % 3), seed);
        const auto pose = synthgen::sample_pose(obj, seed);
        PointCloud rest;
        std::vector<int> labels;
        for (int i = 0; i < 6 * obj.part_count(); ++i) {
            rest.points.push_back(Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)));
            labels.push_back(i % obj.part_count());
        }
        rest.labels = labels;
        const auto moved = apply_articulation(obj, pose, rest);
        const auto transforms = part_transforms(obj.tree, pose);
        for (std::size_t i = 0; i < rest.size(); ++i) {
            const Vec3 back = transforms[static_cast<std::size_t>(labels[i])].inverse() * moved.points[i];
            EXPECT_LT((back - rest.points[i]).norm(), 1e-5);
            for (std::size_t k = i + 1; k < rest.size(); ++k) {
                if (labels[k] != labels[i]) continue;
                EXPECT_NEAR((moved.points[i] - moved.points[k]).norm(), (rest.points[i] - rest.points[k]).norm(), 1e-5);
            }
        }
    }
}

TEST(ValidateTree, SingleNodeIsValid) {
    KinematicTree t;
    t.nodes = {{4, MotionType::Static}};
    t.root = 4;
    EXPECT_TRUE(validate_tree(t).empty());
}

TEST(ValidateTree, MultipleRoots) {
    auto t = chain_tree(3);
    t.edges.pop_back();
    const auto v = validate_tree(t);
    ASSERT_TRUE(has_violation(v, "multiple roots"));
    for (const auto& x : v)
        if (x.invariant == "multiple roots") EXPECT_EQ(x.part_ids, (std::vector<int>{0, 2}));
}

TEST(ValidateTree, ThreeCycleIsListed) {
    KinematicTree t;
    for (int i = 0; i < 4; ++i) t.nodes.push_back({i, MotionType::Static});
    t.root = 0;
    t.edges = {{1, 2, {}}, {2, 3, {}}, {3, 1, {}}};
    const auto v = validate_tree(t);
    bool found = false;
    for (const auto& x : v) {
        if (x.invariant != "cycle detected") continue;
        found = true;
        EXPECT_EQ(x.part_ids, (std::vector<int>{1, 2, 3}));
    }
    EXPECT_TRUE(found);
}

TEST(ValidateTree, OtherInvariants) {
    auto t = chain_tree(3);
    t.edges.push_back({0, 2, {}});
    EXPECT_TRUE(has_violation(validate_tree(t), "multiple parents"));
    t = chain_tree(3);
    t.edges[0].joint.axis = Vec3(0, 0, 2);
    EXPECT_TRUE(has_violation(validate_tree(t), "joint axis not unit length"));
    t = chain_tree(3);
    t.edges[0].joint.lower = 1;
    t.edges[0].joint.upper = 0;
    EXPECT_TRUE(has_violation(validate_tree(t), "joint limits inverted"));
    t = chain_tree(3);
    t.edges.push_back({2, 0, {}});
    EXPECT_TRUE(has_violation(validate_tree(t), "root has a parent"));
    t = chain_tree(2);
    t.nodes.push_back({1, MotionType::Static});
    EXPECT_TRUE(has_violation(validate_tree(t), "duplicate part id"));
}

TEST(ValidateTree, AcceptsGeneratedTrees) {
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto obj = synthgen::generate_object(static_cast<Category>(seed % 3), seed);
        ASSERT_TRUE(validate_tree(obj.tree).empty()) << "seed " << seed;
    }
}

TEST(TreeToDot, SingleNodeAndStar) {
    KinematicTree one;
    one.nodes = {{0, MotionType::Static}};
    const auto dot1 = tree_to_dot(one);
    EXPECT_EQ(dot1.find("->"), std::string::npos);
    EXPECT_NE(dot1.find("part_0"), std::string::npos);

    KinematicTree star;
    star.nodes = {{0, MotionType::Static}, {1, MotionType::Rotating}, {2, MotionType::Translating}};
    star.edges = {{0, 1, {}}, {0, 2, {}}};
    const auto dot = tree_to_dot(star);
    EXPECT_NE(dot.find("part_0 -> part_1"), std::string::npos);
    EXPECT_NE(dot.find("part_0 -> part_2"), std::string::npos);
    EXPECT_NE(dot.find("rotating"), std::string::npos);
    EXPECT_EQ(dot, tree_to_dot(star));
}

TEST(TreeToDot, ParseBackRecoversEdges) {
    const std::regex edge_re(R"(part_(\d+) -> part_(\d+))");
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto obj = synthgen::generate_object(static_cast<Category>(seed % 3), seed);
        const auto dot = tree_to_dot(obj.tree);
        std::set<std::pair<int, int>> parsed, expected;
        for (auto it = std::sregex_iterator(dot.begin(), dot.end(), edge_re); it != std::sregex_iterator(); ++it)
            parsed.emplace(std::stoi((*it)[1]), std::stoi((*it)[2]));
        for (const auto& e : obj.tree.edges) expected.emplace(e.parent, e.child);
        EXPECT_EQ(parsed, expected);
    }
}

TEST(TreeToDot, InvalidTreeThrows) {
    auto t = chain_tree(3);
    t.edges.pop_back();
    EXPECT_THROW(tree_to_dot(t), ValidationError);
}
