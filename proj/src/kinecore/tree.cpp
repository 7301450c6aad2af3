#include "kinehier/kinecore/tree.hpp"

#include "kinehier/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace kinehier {

namespace {

std::string join_ids(const std::vector<int>& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(ids[i]);
    }
    return out;
}

} // namespace

std::vector<TreeViolation> validate_tree(const KinematicTree& tree) {
    std::vector<TreeViolation> out;
    if (tree.nodes.empty()) {
        out.push_back({"no nodes", {}});
        return out;
    }

    std::set<int> ids;
    std::vector<int> duplicates;
    for (const auto& n : tree.nodes) {
        if (!ids.insert(n.part_id).second) duplicates.push_back(n.part_id);
    }
    if (!duplicates.empty()) out.push_back({"duplicate part id", duplicates});
    if (!ids.contains(tree.root)) out.push_back({"root is not a node", {tree.root}});

    std::map<int, std::vector<int>> parents;
    for (const auto& e : tree.edges) {
        if (!ids.contains(e.parent) || !ids.contains(e.child)) {
            out.push_back({"edge references unknown part", {e.parent, e.child}});
            continue;
        }
        if (e.parent == e.child) {
            out.push_back({"self loop", {e.parent}});
            continue;
        }
        parents[e.child].push_back(e.parent);
        if (e.joint.kind != JointKind::Fixed) {
            if (std::abs(e.joint.axis.norm() - 1.0) > 1e-6)
                out.push_back({"joint axis not unit length", {e.parent, e.child}});
            if (!(e.joint.lower <= e.joint.upper))
                out.push_back({"joint limits inverted", {e.parent, e.child}});
        }
    }

    if (parents.contains(tree.root)) out.push_back({"root has a parent", {tree.root}});

    std::vector<int> multi;
    std::vector<int> orphans;
    for (int id : ids) {
        if (id == tree.root) continue;
        auto it = parents.find(id);
        if (it == parents.end()) orphans.push_back(id);
        else if (it->second.size() > 1) multi.push_back(id);
    }
    if (!orphans.empty()) {
        std::vector<int> roots{tree.root};
        roots.insert(roots.end(), orphans.begin(), orphans.end());
        std::sort(roots.begin(), roots.end());
        out.push_back({"multiple roots", roots});
    }
    if (!multi.empty()) out.push_back({"multiple parents", multi});

    // Walk parent pointers; a walk that revisits one of its own nodes found a cycle.
    std::map<int, int> state;  // 0 unvisited, 1 on current walk, 2 done
    for (int start : ids) {
        if (state[start] != 0) continue;
        std::vector<int> walk;
        int cur = start;
        while (true) {
            if (state[cur] == 2) break;
            if (state[cur] == 1) {
                auto pos = std::find(walk.begin(), walk.end(), cur);
                std::vector<int> cycle(pos, walk.end());
                // Report parent -> child order starting at the smallest id.
                std::reverse(cycle.begin(), cycle.end());
                std::rotate(cycle.begin(), std::min_element(cycle.begin(), cycle.end()), cycle.end());
                out.push_back({"cycle detected", cycle});
                break;
            }
            state[cur] = 1;
            walk.push_back(cur);
            auto it = parents.find(cur);
            if (it == parents.end()) break;
            cur = it->second.front();
        }
        for (int w : walk) state[w] = 2;
    }

    if (tree.edges.size() + 1 != tree.nodes.size())
        out.push_back({"edge count must equal node count - 1",
                       {static_cast<int>(tree.edges.size()), static_cast<int>(tree.nodes.size())}});
    return out;
}

void require_valid_tree(const KinematicTree& tree) {
    const auto violations = validate_tree(tree);
    if (violations.empty()) return;
    std::string msg = "invalid kinematic tree:";
    for (const auto& v : violations) msg += " [" + v.invariant + ": " + join_ids(v.part_ids) + "]";
    throw ValidationError(msg);
}

std::string tree_to_dot(const KinematicTree& tree) {
    require_valid_tree(tree);
    auto nodes = tree.nodes;
    std::sort(nodes.begin(), nodes.end(),
              [](const TreeNode& a, const TreeNode& b) { return a.part_id < b.part_id; });
    auto edges = tree.edges;
    std::sort(edges.begin(), edges.end(), [](const TreeEdge& a, const TreeEdge& b) {
        return std::pair(a.parent, a.child) < std::pair(b.parent, b.child);
    });

    std::ostringstream os;
    os << "digraph kinematic_tree {\n";
    os << "  rankdir=TB;\n";
    for (const auto& n : nodes) {
        os << "  part_" << n.part_id << " [label=\"part " << n.part_id << "\\n" << to_string(n.motion)
           << "\"";
        if (n.part_id == tree.root) os << ", shape=doublecircle";
        os << "];\n";
    }
    for (const auto& e : edges) {
        os << "  part_" << e.parent << " -> part_" << e.child << " [label=\"" << to_string(e.joint.kind)
           << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

} // namespace kinehier
