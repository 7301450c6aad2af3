#include "kinehier/synthgen/dataset.hpp"

#include "kinehier/errors.hpp"
#include "kinehier/io/binary.hpp"
#include "kinehier/io/files.hpp"
#include "kinehier/random.hpp"

#include <fmt/format.h>

#include <limits>

namespace kinehier::synthgen {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kPoseTag = 0x706f7365;
constexpr std::uint64_t kCleanTag = 0x636c65616e;
constexpr std::uint64_t kNoisyTag = 0x6e6f697379;

Json scan_to_json(const ScanConfig& c) {
    return Json{{"n_points", c.n_points},     {"viewpoints", c.viewpoints},
                {"width", c.width},           {"height", c.height},
                {"sigma0", c.sigma0},         {"sigma1", c.sigma1},
                {"dropout", c.dropout},       {"quantization", c.quantization},
                {"elevation_deg", c.elevation_deg}, {"distance_factor", c.distance_factor},
                {"fov_y_deg", c.fov_y_deg}};
}

ScanConfig scan_from_json(const Json& j) {
    ScanConfig c;
    c.n_points = j.value("n_points", c.n_points);
    c.viewpoints = j.value("viewpoints", c.viewpoints);
    c.width = j.value("width", c.width);
    c.height = j.value("height", c.height);
    c.sigma0 = j.value("sigma0", c.sigma0);
    c.sigma1 = j.value("sigma1", c.sigma1);
    c.dropout = j.value("dropout", c.dropout);
    c.quantization = j.value("quantization", c.quantization);
    c.elevation_deg = j.value("elevation_deg", c.elevation_deg);
    c.distance_factor = j.value("distance_factor", c.distance_factor);
    c.fov_y_deg = j.value("fov_y_deg", c.fov_y_deg);
    return c;
}

std::string record_stem(Split split, std::uint64_t seed, int pose, Condition condition) {
    return fmt::format("{}_{:07d}_{:02d}_{}", to_string(split), seed, pose, to_string(condition));
}

} // namespace

std::string_view to_string(Condition c) { return c == Condition::Clean ? "clean" : "noisy"; }

Condition condition_from_string(std::string_view name) {
    if (name == "clean") return Condition::Clean;
    if (name == "noisy") return Condition::Noisy;
    throw ConfigError("unknown condition '" + std::string(name) + "'");
}

std::string_view to_string(Split s) { return s == Split::Train ? "train" : "test"; }

Split split_from_string(std::string_view name) {
    if (name == "train") return Split::Train;
    if (name == "test") return Split::Test;
    throw ConfigError("unknown split '" + std::string(name) + "'");
}

std::vector<std::uint64_t> DatasetManifest::object_seeds(Split split) const {
    const SplitRange& r = split == Split::Train ? train : test;
    std::vector<std::uint64_t> out;
    for (int i = 0; i < r.count; ++i) out.push_back(r.seed_begin + static_cast<std::uint64_t>(i));
    return out;
}

void check_manifest(const DatasetManifest& m) {
    if (m.format_version != kDatasetFormatVersion)
        throw VersionMismatchError(fmt::format("dataset format version {} (supported: {})", m.format_version,
                                               kDatasetFormatVersion));
    if (m.train.count < 0 || m.test.count < 0) throw ConfigError("object counts must be >= 0");
    if (m.poses_per_object < 1) throw ConfigError("poses_per_object must be >= 1");
    if (m.conditions.empty()) throw ConfigError("at least one condition is required");
    if (!(m.tau_rel > 0.0)) throw ConfigError("tau_rel must be positive");
    check_scan_config(m.scan);
    const auto a0 = m.train.seed_begin, a1 = a0 + static_cast<std::uint64_t>(m.train.count);
    const auto b0 = m.test.seed_begin, b1 = b0 + static_cast<std::uint64_t>(m.test.count);
    if (m.train.count > 0 && m.test.count > 0 && a0 < b1 && b0 < a1)
        throw ConfigError("train and test object seed ranges overlap");
}

Json manifest_to_json(const DatasetManifest& m, bool with_records) {
    Json conditions = Json::array();
    for (auto c : m.conditions) conditions.push_back(std::string(to_string(c)));
    Json j{{"format_version", m.format_version},
           {"category", std::string(to_string(m.category))},
           {"seed", m.seed},
           {"train", {{"count", m.train.count}, {"seed_begin", m.train.seed_begin}}},
           {"test", {{"count", m.test.count}, {"seed_begin", m.test.seed_begin}}},
           {"poses_per_object", m.poses_per_object},
           {"conditions", conditions},
           {"scan", scan_to_json(m.scan)},
           {"generator", {{"part_gap", m.generator.part_gap}}},
           {"tau_rel", m.tau_rel}};
    if (with_records) {
        Json records = Json::array();
        for (const auto& r : m.records) {
            records.push_back({{"split", std::string(to_string(r.split))},
                               {"object_seed", r.object_seed},
                               {"pose_index", r.pose_index},
                               {"condition", std::string(to_string(r.condition))},
                               {"header", r.header},
                               {"blob", r.blob}});
        }
        j["records"] = records;
    }
    return j;
}

DatasetManifest manifest_from_json(const Json& j) {
    DatasetManifest m;
    try {
        m.format_version = j.value("format_version", kDatasetFormatVersion);
        m.category = category_from_string(j.at("category").get<std::string>());
        m.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("train")) {
            m.train.count = j["train"].value("count", 0);
            m.train.seed_begin = j["train"].value("seed_begin", std::uint64_t{0});
        }
        if (j.contains("test")) {
            m.test.count = j["test"].value("count", 0);
            m.test.seed_begin = j["test"].value("seed_begin", std::uint64_t{1'000'000});
        }
        m.poses_per_object = j.value("poses_per_object", 18);
        if (j.contains("conditions")) {
            m.conditions.clear();
            for (const auto& c : j["conditions"]) m.conditions.push_back(condition_from_string(c.get<std::string>()));
        }
        if (j.contains("scan")) m.scan = scan_from_json(j["scan"]);
        if (j.contains("generator")) m.generator.part_gap = j["generator"].value("part_gap", 0.0);
        m.tau_rel = j.value("tau_rel", graphbuild::kDefaultTauRel);
        if (j.contains("records")) {
            for (const auto& r : j["records"]) {
                m.records.push_back({split_from_string(r.at("split").get<std::string>()),
                                     r.at("object_seed").get<std::uint64_t>(), r.at("pose_index").get<int>(),
                                     condition_from_string(r.at("condition").get<std::string>()),
                                     r.at("header").get<std::string>(), r.at("blob").get<std::string>()});
            }
        }
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("invalid dataset manifest: ") + e.what());
    }
    return m;
}

std::vector<std::pair<int, int>> candidate_edges(const PointCloud& cloud, double tau_rel) {
    if (cloud.points.empty()) return {};
    auto [compact, ids] = graphbuild::compact_labels(cloud);
    const auto graph = graphbuild::build_graph(compact, tau_rel);
    std::vector<std::pair<int, int>> out;
    for (const auto& e : graph.edges) out.emplace_back(ids[static_cast<std::size_t>(e.u)], ids[static_cast<std::size_t>(e.v)]);
    return out;
}

DatasetRecord make_record(const DatasetManifest& m, const GroundTruthObject& object, Split split, int pose_index,
                          Condition condition) {
    DatasetRecord rec;
    rec.split = split;
    rec.object_seed = object.seed;
    rec.pose_index = pose_index;
    rec.condition = condition;
    rec.object = object;
    rec.tau_rel = m.tau_rel;
    const auto pose_idx = static_cast<std::uint64_t>(pose_index);
    rec.pose = sample_pose(object, derive_seed({m.seed, object.seed, pose_idx, kPoseTag}));
    if (condition == Condition::Clean)
        rec.cloud = scan_clean(object, rec.pose, m.scan.n_points, derive_seed({m.seed, object.seed, pose_idx, kCleanTag}));
    else
        rec.cloud = scan_noisy(object, rec.pose, m.scan, derive_seed({m.seed, object.seed, pose_idx, kNoisyTag}));
    rec.candidate_edges = candidate_edges(rec.cloud, m.tau_rel);
    return rec;
}

std::vector<DatasetRecord> generate_records(const DatasetManifest& m, Split split, Condition condition) {
    check_manifest(m);
    std::vector<DatasetRecord> out;
    for (auto seed : m.object_seeds(split)) {
        const auto object = generate_object(m.category, seed, m.generator);
        for (int p = 0; p < m.poses_per_object; ++p) out.push_back(make_record(m, object, split, p, condition));
    }
    return out;
}

void write_record(const DatasetRecord& rec, const fs::path& header, const fs::path& blob) {
    const std::size_t n = rec.cloud.points.size();
    if (!rec.cloud.labels || rec.cloud.labels->size() != n) throw SchemaError("records need a labeled cloud");
    io::ByteWriter w;
    for (const auto& p : rec.cloud.points) {
        w.f32(static_cast<float>(p.x()));
        w.f32(static_cast<float>(p.y()));
        w.f32(static_cast<float>(p.z()));
    }
    for (int l : *rec.cloud.labels) {
        if (l < 0 || l > std::numeric_limits<std::uint16_t>::max()) throw SchemaError("label out of u16 range");
        w.u16(static_cast<std::uint16_t>(l));
    }
    io::write_bytes(blob, w.buffer());

    Json edges = Json::array();
    for (const auto& [u, v] : rec.candidate_edges) edges.push_back({u, v});
    Json j{{"format_version", kDatasetFormatVersion},
           {"split", std::string(to_string(rec.split))},
           {"object_seed", rec.object_seed},
           {"pose_index", rec.pose_index},
           {"condition", std::string(to_string(rec.condition))},
           {"object", rec.object},
           {"pose", rec.pose},
           {"point_count", n},
           {"blob",
            {{"file", blob.filename().string()},
             {"encoding", "f32le_xyz,u16le_label"},
             {"points_offset", 0},
             {"labels_offset", 12 * n}}},
           {"candidate_graph", {{"tau_rel", rec.tau_rel}, {"edges", edges}}}};
    write_json_file(header, j);
}

DatasetRecord read_record(const fs::path& header) {
    const Json j = read_json_file(header);
    DatasetRecord rec;
    try {
        const int version = j.at("format_version").get<int>();
        if (version != kDatasetFormatVersion)
            throw VersionMismatchError(fmt::format("record {} has format version {}", header.string(), version));
        rec.split = split_from_string(j.at("split").get<std::string>());
        rec.object_seed = j.at("object_seed").get<std::uint64_t>();
        rec.pose_index = j.at("pose_index").get<int>();
        rec.condition = condition_from_string(j.at("condition").get<std::string>());
        rec.object = j.at("object").get<GroundTruthObject>();
        rec.pose = j.at("pose").get<JointPose>();
        const auto& cg = j.at("candidate_graph");
        rec.tau_rel = cg.at("tau_rel").get<double>();
        for (const auto& e : cg.at("edges")) rec.candidate_edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());

        const auto n = j.at("point_count").get<std::size_t>();
        const auto& blob = j.at("blob");
        const auto bytes = io::read_bytes(header.parent_path() / blob.at("file").get<std::string>());
        const auto points_offset = blob.at("points_offset").get<std::size_t>();
        const auto labels_offset = blob.at("labels_offset").get<std::size_t>();
        if (bytes.size() < labels_offset + 2 * n || bytes.size() < points_offset + 12 * n)
            throw CorruptDataError("record blob truncated: " + header.string());
        std::vector<unsigned char> pts(bytes.begin() + static_cast<long>(points_offset),
                                       bytes.begin() + static_cast<long>(points_offset + 12 * n));
        std::vector<unsigned char> lbl(bytes.begin() + static_cast<long>(labels_offset),
                                       bytes.begin() + static_cast<long>(labels_offset + 2 * n));
        io::ByteReader pr(pts);
        io::ByteReader lr(lbl);
        rec.cloud.points.resize(n);
        rec.cloud.labels.emplace(n);
        for (std::size_t i = 0; i < n; ++i) {
            float x = 0, y = 0, z = 0;
            std::uint16_t l = 0;
            pr.f32(x);
            pr.f32(y);
            pr.f32(z);
            lr.u16(l);
            rec.cloud.points[i] = Vec3(x, y, z);
            (*rec.cloud.labels)[i] = l;
        }
    } catch (const Json::exception& e) {
        throw CorruptDataError("malformed record " + header.string() + ": " + e.what());
    } catch (const SchemaError& e) {
        throw CorruptDataError("malformed record " + header.string() + ": " + e.what());
    }
    return rec;
}

DatasetManifest build_dataset(const DatasetManifest& manifest, const fs::path& root) {
    check_manifest(manifest);
    DatasetManifest out = manifest;
    out.records.clear();
    std::error_code ec;
    fs::create_directories(root / "records", ec);
    if (ec) throw IoError("cannot create dataset directory", (root / "records").string());

    for (Split split : {Split::Train, Split::Test}) {
        for (auto seed : manifest.object_seeds(split)) {
            const auto object = generate_object(manifest.category, seed, manifest.generator);
            for (int p = 0; p < manifest.poses_per_object; ++p) {
                for (Condition c : manifest.conditions) {
                    const auto rec = make_record(manifest, object, split, p, c);
                    const std::string stem = record_stem(split, seed, p, c);
                    RecordEntry entry{split, seed, p, c, "records/" + stem + ".json", "records/" + stem + ".bin"};
                    write_record(rec, root / entry.header, root / entry.blob);
                    out.records.push_back(entry);
                }
            }
        }
    }
    write_json_file(root / "manifest.json", manifest_to_json(out));
    return out;
}

DatasetManifest read_manifest(const fs::path& root) {
    const auto m = manifest_from_json(read_json_file(root / "manifest.json"));
    if (m.format_version != kDatasetFormatVersion)
        throw VersionMismatchError(fmt::format("dataset format version {} (supported: {})", m.format_version,
                                               kDatasetFormatVersion));
    return m;
}

std::vector<DatasetRecord> load_records(const fs::path& root, const DatasetManifest& m, Split split,
                                        Condition condition) {
    std::vector<DatasetRecord> out;
    for (std::size_t i = 0; i < m.records.size(); ++i) {
        const auto& e = m.records[i];
        if (e.split != split || e.condition != condition) continue;
        try {
            out.push_back(read_record(root / e.header));
        } catch (const CorruptDataError& err) {
            throw CorruptDataError(err.what(), static_cast<long>(i));
        }
    }
    return out;
}

} // namespace kinehier::synthgen
