#pragma once

#include "kinehier/graphbuild/part_graph.hpp"
#include "kinehier/io/json_io.hpp"
#include "kinehier/kinecore/types.hpp"
#include "kinehier/synthgen/generator.hpp"
#include "kinehier/synthgen/scan.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace kinehier::synthgen {

/// Bumped whenever a manifest or record field changes meaning.
inline constexpr int kDatasetFormatVersion = 1;

enum class Condition : std::uint8_t { Clean, Noisy };
enum class Split : std::uint8_t { Train, Test };

std::string_view to_string(Condition condition);
Condition condition_from_string(std::string_view name);
std::string_view to_string(Split split);
Split split_from_string(std::string_view name);

struct SplitRange {
    int count = 0;
    std::uint64_t seed_begin = 0;
};

struct RecordEntry {
    Split split = Split::Train;
    std::uint64_t object_seed = 0;
    int pose_index = 0;
    Condition condition = Condition::Clean;
    std::string header;  // relative to the dataset root
    std::string blob;
};

struct DatasetManifest {
    int format_version = kDatasetFormatVersion;
    Category category = Category::Cabinet;
    std::uint64_t seed = 0;
    SplitRange train{0, 0};
    SplitRange test{0, 1'000'000};
    int poses_per_object = 18;
    std::vector<Condition> conditions{Condition::Clean, Condition::Noisy};
    ScanConfig scan;
    GeneratorOptions generator;
    double tau_rel = graphbuild::kDefaultTauRel;
    std::vector<RecordEntry> records;  // filled by build_dataset

    std::vector<std::uint64_t> object_seeds(Split split) const;
};

/// One (object, pose, condition) sample. Cloud labels are object part ids;
/// parts that no view observed are simply absent.
struct DatasetRecord {
    Split split = Split::Train;
    std::uint64_t object_seed = 0;
    int pose_index = 0;
    Condition condition = Condition::Clean;
    GroundTruthObject object;
    JointPose pose;
    PointCloud cloud;
    double tau_rel = graphbuild::kDefaultTauRel;
    std::vector<std::pair<int, int>> candidate_edges;  // object part ids, u < v
};

/// Throws ConfigError (bad counts, overlapping train/test seed ranges, scan
/// config) or VersionMismatchError.
void check_manifest(const DatasetManifest& manifest);

Json manifest_to_json(const DatasetManifest& manifest, bool with_records = true);
DatasetManifest manifest_from_json(const Json& j);

/// Generates one record in memory. `object` must be generate_object(category,
/// object_seed, manifest.generator).
DatasetRecord make_record(const DatasetManifest& manifest, const GroundTruthObject& object, Split split,
                          int pose_index, Condition condition);

/// All records of one split and condition, in (object seed, pose) order.
std::vector<DatasetRecord> generate_records(const DatasetManifest& manifest, Split split, Condition condition);

/// Writes manifest.json and records/ under `root`; returns the manifest with
/// its record table filled in.
DatasetManifest build_dataset(const DatasetManifest& manifest, const std::filesystem::path& root);

DatasetManifest read_manifest(const std::filesystem::path& root);

/// Header JSON + sidecar blob: f32le xyz interleaved, then one u16le label per point.
void write_record(const DatasetRecord& record, const std::filesystem::path& header,
                  const std::filesystem::path& blob);
DatasetRecord read_record(const std::filesystem::path& header);

/// Records of the manifest matching split/condition, loaded from disk.
std::vector<DatasetRecord> load_records(const std::filesystem::path& root, const DatasetManifest& manifest,
                                        Split split, Condition condition);

/// Candidate edges in object part ids for a cloud whose labels may be sparse.
std::vector<std::pair<int, int>> candidate_edges(const PointCloud& cloud, double tau_rel);

} // namespace kinehier::synthgen
