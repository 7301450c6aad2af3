#include "kinehier/treeextract/extract.hpp"

#include "kinehier/errors.hpp"
#include "kinehier/neural/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace kinehier::treeextract {

Eigen::MatrixXd pairwise_cost(const labelnet::LabeledGraph& g) {
    const auto n = static_cast<Eigen::Index>(g.base.nodes.size());
    Eigen::MatrixXd cost = Eigen::MatrixXd::Constant(n, n, kNoEdge);
    for (std::size_t e = 0; e < g.base.edges.size(); ++e) {
        const auto& edge = g.base.edges[e];
        const double c = -std::log(neural::clamp_prob(g.exist.at(e)));
        cost(edge.u, edge.v) = c;
        cost(edge.v, edge.u) = c;
    }
    return cost;
}

int select_root(const labelnet::LabeledGraph& g) {
    if (g.root.empty()) throw PreconditionError("select_root: graph has no nodes");
    int best = 0;
    for (std::size_t i = 1; i < g.root.size(); ++i)
        if (g.root[i] > g.root[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
    return best;
}

JointKind joint_kind_for(MotionType motion) {
    switch (motion) {
    case MotionType::Static: return JointKind::Fixed;
    case MotionType::Translating: return JointKind::Prismatic;
    case MotionType::Rotating:
    case MotionType::RotatingTranslating: return JointKind::Revolute;
    }
    return JointKind::Fixed;
}

MotionType argmax_motion(const std::array<double, kMotionTypeCount>& dist) {
    int best = 0;
    for (int k = 1; k < kMotionTypeCount; ++k)
        if (dist[static_cast<std::size_t>(k)] > dist[static_cast<std::size_t>(best)]) best = k;
    return static_cast<MotionType>(best);
}

std::vector<std::pair<int, int>> prim_tree(const Eigen::MatrixXd& cost, int root) {
    const int n = static_cast<int>(cost.rows());
    if (root < 0 || root >= n) throw PreconditionError("prim_tree: root out of range");
    std::vector<char> in(static_cast<std::size_t>(n), 0);
    in[static_cast<std::size_t>(root)] = 1;
    std::vector<std::pair<int, int>> edges;
    for (int step = 1; step < n; ++step) {
        // (cost, parent, child) lexicographic minimum over the frontier.
        std::tuple<double, int, int> best{kNoEdge, -1, -1};
        for (int p = 0; p < n; ++p) {
            if (!in[static_cast<std::size_t>(p)]) continue;
            for (int c = 0; c < n; ++c) {
                if (in[static_cast<std::size_t>(c)] || !(cost(p, c) < kNoEdge)) continue;
                const std::tuple<double, int, int> cand{cost(p, c), p, c};
                if (std::get<1>(best) < 0 || cand < best) best = cand;
            }
        }
        if (std::get<1>(best) < 0) throw StructuralError("candidate graph is disconnected; no spanning tree");
        in[static_cast<std::size_t>(std::get<2>(best))] = 1;
        edges.emplace_back(std::get<1>(best), std::get<2>(best));
    }
    return edges;
}

KinematicTree extract_tree(const labelnet::LabeledGraph& g) {
    KinematicTree t;
    t.root = select_root(g);
    for (std::size_t i = 0; i < g.motion.size(); ++i) t.nodes.push_back({static_cast<int>(i), argmax_motion(g.motion[i])});
    for (const auto& [p, c] : prim_tree(pairwise_cost(g), t.root)) {
        TreeEdge e;
        e.parent = p;
        e.child = c;
        e.joint.kind = joint_kind_for(t.nodes[static_cast<std::size_t>(c)].motion);
        t.edges.push_back(e);
    }
    return t;
}

double tree_cost(const Eigen::MatrixXd& cost, const KinematicTree& tree) {
    double s = 0;
    for (const auto& e : tree.edges) s += cost(e.parent, e.child);
    return s;
}

namespace {

int longest_side(const Vec3& extents) {
    int k = 0;
    for (int i = 1; i < 3; ++i)
        if (extents[i] > extents[k]) k = i;
    return k;
}

} // namespace

KinematicTree estimate_joint_axes(const KinematicTree& tree, const graphbuild::PartGraph& graph) {
    Aabb object;
    for (const auto& node : graph.nodes) {
        object.extend(node.bbox.min);
        object.extend(node.bbox.max);
    }
    const double margin = 0.01 * object.diagonal();
    KinematicTree out = tree;
    for (auto& e : out.edges) {
        if (e.joint.kind == JointKind::Fixed) continue;
        const auto& parent = graph.nodes.at(static_cast<std::size_t>(e.parent));
        const auto& child = graph.nodes.at(static_cast<std::size_t>(e.child));
        const Aabb overlap = parent.bbox.expanded(margin).intersection(child.bbox.expanded(margin));
        e.joint.low_confidence = false;
        if (overlap.empty()) {
            e.joint.axis = Vec3::UnitZ();
            e.joint.origin = child.centroid;
            e.joint.low_confidence = true;
        } else if (e.joint.kind == JointKind::Revolute) {
            e.joint.axis = Vec3::Unit(longest_side(overlap.extents()));
            e.joint.origin = overlap.center();
        } else {
            e.joint.axis = Vec3::Unit(longest_side(child.bbox.extents()));
            e.joint.origin = child.bbox.center();
        }
    }
    return out;
}

KinematicTree relabel_tree(const KinematicTree& tree, const std::vector<int>& ids) {
    auto map = [&](int id) { return ids.at(static_cast<std::size_t>(id)); };
    KinematicTree out = tree;
    out.root = map(tree.root);
    for (auto& n : out.nodes) n.part_id = map(n.part_id);
    for (auto& e : out.edges) {
        e.parent = map(e.parent);
        e.child = map(e.child);
    }
    return out;
}

KinematicTree attach_limits(const KinematicTree& tree, const KinematicTree& reference) {
    KinematicTree out = tree;
    for (auto& e : out.edges) {
        const auto* ref = reference.parent_edge(e.child);
        if (ref && ref->parent == e.parent && ref->joint.kind == e.joint.kind) {
            e.joint.lower = ref->joint.lower;
            e.joint.upper = ref->joint.upper;
        }
    }
    return out;
}

} // namespace kinehier::treeextract
