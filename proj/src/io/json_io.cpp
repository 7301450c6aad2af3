#include "kinehier/io/json_io.hpp"

#include "kinehier/errors.hpp"
#include "kinehier/io/files.hpp"

#include <fstream>
#include <sstream>

namespace kinehier {

Json vec3_to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 3) throw SchemaError("expected a 3-vector");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

void to_json(Json& j, const Joint& joint) {
    j = Json{{"kind", std::string(to_string(joint.kind))},
             {"axis", vec3_to_json(joint.axis)},
             {"origin", vec3_to_json(joint.origin)},
             {"limits", Json::array({joint.lower, joint.upper})}};
    if (joint.low_confidence) j["low_confidence"] = true;
}

void from_json(const Json& j, Joint& joint) {
    joint.kind = joint_kind_from_string(j.at("kind").get<std::string>());
    joint.axis = vec3_from_json(j.at("axis"));
    joint.origin = vec3_from_json(j.at("origin"));
    const auto& lim = j.at("limits");
    joint.lower = lim.at(0).get<double>();
    joint.upper = lim.at(1).get<double>();
    joint.low_confidence = j.value("low_confidence", false);
}

void to_json(Json& j, const KinematicTree& tree) {
    Json nodes = Json::array();
    for (const auto& n : tree.nodes)
        nodes.push_back({{"part_id", n.part_id}, {"motion", std::string(to_string(n.motion))}});
    Json edges = Json::array();
    for (const auto& e : tree.edges) edges.push_back({{"parent", e.parent}, {"child", e.child}, {"joint", e.joint}});
    j = Json{{"root", tree.root}, {"nodes", nodes}, {"edges", edges}};
}

void from_json(const Json& j, KinematicTree& tree) {
    tree = {};
    tree.root = j.at("root").get<int>();
    for (const auto& n : j.at("nodes"))
        tree.nodes.push_back({n.at("part_id").get<int>(), motion_type_from_string(n.at("motion").get<std::string>())});
    for (const auto& e : j.at("edges"))
        tree.edges.push_back({e.at("parent").get<int>(), e.at("child").get<int>(), e.at("joint").get<Joint>()});
}

void to_json(Json& j, const Primitive& p) {
    Json rot = Json::array();
    const Eigen::Matrix3d r = p.pose.linear();
    for (int row = 0; row < 3; ++row)
        for (int col = 0; col < 3; ++col) rot.push_back(r(row, col));
    j = Json{{"part_id", p.part_id}, {"translation", vec3_to_json(p.pose.translation())}, {"rotation", rot}};
    if (p.shape == PrimitiveShape::Box) {
        j["shape"] = "box";
        j["half_extents"] = vec3_to_json(p.half_extents);
    } else {
        j["shape"] = "cylinder";
        j["radius"] = p.radius;
        j["half_height"] = p.half_height;
    }
}

void from_json(const Json& j, Primitive& p) {
    p = {};
    p.part_id = j.at("part_id").get<int>();
    const auto shape = j.at("shape").get<std::string>();
    Eigen::Matrix3d r;
    const auto& rot = j.at("rotation");
    if (!rot.is_array() || rot.size() != 9) throw SchemaError("primitive rotation must have 9 entries");
    for (int row = 0; row < 3; ++row)
        for (int col = 0; col < 3; ++col) r(row, col) = rot[static_cast<std::size_t>(row * 3 + col)].get<double>();
    p.pose = Isometry::Identity();
    p.pose.linear() = r;
    p.pose.translation() = vec3_from_json(j.at("translation"));
    if (shape == "box") {
        p.shape = PrimitiveShape::Box;
        p.half_extents = vec3_from_json(j.at("half_extents"));
    } else if (shape == "cylinder") {
        p.shape = PrimitiveShape::Cylinder;
        p.radius = j.at("radius").get<double>();
        p.half_height = j.at("half_height").get<double>();
    } else {
        throw SchemaError("unknown primitive shape '" + shape + "'");
    }
}

void to_json(Json& j, const GroundTruthObject& o) {
    j = Json{{"category", std::string(to_string(o.category))},
             {"seed", o.seed},
             {"primitives", o.primitives},
             {"tree", o.tree}};
}

void from_json(const Json& j, GroundTruthObject& o) {
    o.category = category_from_string(j.at("category").get<std::string>());
    o.seed = j.at("seed").get<std::uint64_t>();
    o.primitives = j.at("primitives").get<std::vector<Primitive>>();
    o.tree = j.at("tree").get<KinematicTree>();
}

void to_json(Json& j, const JointPose& pose) {
    j = Json::array();
    for (const auto& [part, value] : pose.values) j.push_back({{"part_id", part}, {"value", value}});
}

void from_json(const Json& j, JointPose& pose) {
    pose = {};
    for (const auto& e : j) pose.values[e.at("part_id").get<int>()] = e.at("value").get<double>();
}

Json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return Json::parse(text);
    } catch (const Json::exception& e) {
        throw CorruptDataError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing", path.string());
    os << text;
    if (!os) throw IoError("write failed", path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading", path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

namespace io {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading", path.string());
    return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing", path.string());
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw IoError("write failed", path.string());
}

} // namespace io

} // namespace kinehier
