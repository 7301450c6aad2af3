#include "kinehier/treeextract/urdf.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace kinehier::treeextract {

namespace {

std::string triple(const Vec3& v) { return fmt::format("{:.6f} {:.6f} {:.6f}", v.x(), v.y(), v.z()); }

} // namespace

std::string tree_to_urdf(const KinematicTree& tree, const std::string& robot_name) {
    std::string out = "<?xml version=\"1.0\"?>\n";
    out += fmt::format("<robot name=\"{}\">\n", robot_name);
    auto nodes = tree.nodes;
    std::sort(nodes.begin(), nodes.end(), [](const auto& a, const auto& b) { return a.part_id < b.part_id; });
    for (const auto& n : nodes)
        out += fmt::format("  <link name=\"part_{}\"/>  <!-- {}{} -->\n", n.part_id, to_string(n.motion),
                           n.part_id == tree.root ? ", root" : "");
    auto edges = tree.edges;
    std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) { return a.child < b.child; });
    for (const auto& e : edges) {
        const auto& j = e.joint;
        out += fmt::format("  <joint name=\"joint_{}_{}\" type=\"{}\">\n", e.parent, e.child, to_string(j.kind));
        out += fmt::format("    <parent link=\"part_{}\"/>\n", e.parent);
        out += fmt::format("    <child link=\"part_{}\"/>\n", e.child);
        out += fmt::format("    <origin xyz=\"{}\" rpy=\"0 0 0\"/>\n", triple(j.origin));
        if (j.kind != JointKind::Fixed) {
            out += fmt::format("    <axis xyz=\"{}\"/>\n", triple(j.axis));
            if (j.lower != 0.0 || j.upper != 0.0)
                out += fmt::format("    <limit lower=\"{:.6f}\" upper=\"{:.6f}\"/>\n", j.lower, j.upper);
            if (j.low_confidence) out += "    <!-- axis from fallback: part boxes do not overlap -->\n";
        }
        out += "  </joint>\n";
    }
    out += "</robot>\n";
    return out;
}

} // namespace kinehier::treeextract
