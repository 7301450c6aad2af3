#pragma once

#include "kinehier/io/json_io.hpp"
#include "kinehier/metrics/metrics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kinehier::metrics {

/// One evaluated (object, pose) instance.
struct ObjectRow {
    std::string condition;
    std::uint64_t object_seed = 0;
    int pose_index = 0;
    StructureErrors errors;
    double tree_f1 = 0.0;
    std::optional<double> segmentation_ap;
};

/// Plain means of the per-object rows of one condition.
struct Aggregate {
    std::string condition;
    std::size_t count = 0;
    double e_type = 0.0;
    double e_exist = 0.0;
    double e_dir = 0.0;
    double e_root = 0.0;
    double tree_f1 = 0.0;
    std::optional<double> segmentation_map;  // present when every row has an AP
};

Aggregate aggregate(const std::string& condition, const std::vector<ObjectRow>& rows);

Json row_to_json(const ObjectRow& row);
Json aggregate_to_json(const Aggregate& agg);
/// {"format_version", "aggregates": [...], "objects": [...]}.
Json report_to_json(const std::vector<Aggregate>& aggregates, const std::vector<ObjectRow>& rows);

/// Aligned text: a structure table (E_type, E_exist, E_dir, E_root, Tree F1)
/// and, when available, a segmentation table (mAP), one line per condition,
/// followed by the published real-scan reference line for orientation.
std::string report_table(const std::vector<Aggregate>& aggregates);

} // namespace kinehier::metrics
