#pragma once

#include "kinehier/kinecore/types.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace kinehier {

using Json = nlohmann::json;

void to_json(Json& j, const Joint& joint);
void from_json(const Json& j, Joint& joint);
void to_json(Json& j, const KinematicTree& tree);
void from_json(const Json& j, KinematicTree& tree);
void to_json(Json& j, const Primitive& primitive);
void from_json(const Json& j, Primitive& primitive);
void to_json(Json& j, const GroundTruthObject& object);
void from_json(const Json& j, GroundTruthObject& object);
void to_json(Json& j, const JointPose& pose);
void from_json(const Json& j, JointPose& pose);

Json vec3_to_json(const Vec3& v);
Vec3 vec3_from_json(const Json& j);

/// Reads and parses a JSON file. IoError when unreadable, CorruptDataError
/// when malformed.
Json read_json_file(const std::filesystem::path& path);

/// Writes `j.dump(2)` plus a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

} // namespace kinehier
