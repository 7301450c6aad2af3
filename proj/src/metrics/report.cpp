#include "kinehier/metrics/report.hpp"

#include "kinehier/metrics/reference.hpp"

#include <fmt/format.h>

namespace kinehier::metrics {

Aggregate aggregate(const std::string& condition, const std::vector<ObjectRow>& rows) {
    Aggregate a;
    a.condition = condition;
    a.count = rows.size();
    if (rows.empty()) return a;
    bool all_seg = true;
    double seg = 0.0;
    for (const auto& r : rows) {
        a.e_type += r.errors.e_type;
        a.e_exist += r.errors.e_exist;
        a.e_dir += r.errors.e_dir;
        a.e_root += r.errors.e_root;
        a.tree_f1 += r.tree_f1;
        if (r.segmentation_ap) seg += *r.segmentation_ap;
        else all_seg = false;
    }
    const double n = static_cast<double>(rows.size());
    a.e_type /= n;
    a.e_exist /= n;
    a.e_dir /= n;
    a.e_root /= n;
    a.tree_f1 /= n;
    if (all_seg) a.segmentation_map = seg / n;
    return a;
}

Json row_to_json(const ObjectRow& r) {
    Json j{{"condition", r.condition},
           {"object_seed", r.object_seed},
           {"pose_index", r.pose_index},
           {"E_type", r.errors.e_type},
           {"E_exist", r.errors.e_exist},
           {"E_dir", r.errors.e_dir},
           {"E_root", r.errors.e_root},
           {"tree_f1", r.tree_f1},
           {"nodes", r.errors.nodes},
           {"candidate_edges", r.errors.candidate_edges},
           {"tree_edges", r.errors.tree_edges},
           {"uncovered_tree_edges", r.errors.uncovered_tree_edges}};
    if (r.segmentation_ap) j["segmentation_ap"] = *r.segmentation_ap;
    return j;
}

Json aggregate_to_json(const Aggregate& a) {
    Json j{{"condition", a.condition}, {"count", a.count},  {"E_type", a.e_type},  {"E_exist", a.e_exist},
           {"E_dir", a.e_dir},         {"E_root", a.e_root}, {"tree_f1", a.tree_f1}};
    if (a.segmentation_map) j["segmentation_map"] = *a.segmentation_map;
    return j;
}

Json report_to_json(const std::vector<Aggregate>& aggregates, const std::vector<ObjectRow>& rows) {
    Json j{{"format_version", 1}, {"aggregates", Json::array()}, {"objects", Json::array()}};
    for (const auto& a : aggregates) j["aggregates"].push_back(aggregate_to_json(a));
    for (const auto& r : rows) j["objects"].push_back(row_to_json(r));
    return j;
}

std::string report_table(const std::vector<Aggregate>& aggregates) {
    std::string out = "Kinematic structure (percent errors, Tree F1 in [0, 100])\n";
    out += fmt::format("{:<28} {:>7} {:>8} {:>8} {:>8} {:>8} {:>8}\n", "condition", "count", "E_type", "E_exist",
                       "E_dir", "E_root", "TreeF1");
    for (const auto& a : aggregates)
        out += fmt::format("{:<28} {:>7} {:>8.2f} {:>8.2f} {:>8.2f} {:>8.2f} {:>8.2f}\n", a.condition, a.count,
                           a.e_type, a.e_exist, a.e_dir, a.e_root, a.tree_f1);
    out += fmt::format("{:<28} {:>7} {:>8.2f} {:>8.2f} {:>8.2f} {:>8.2f} {:>8.2f}\n", "reference: real, clean", "-",
                       reference::kStorageCleanTypeError, reference::kStorageCleanExistError,
                       reference::kStorageCleanDirError, reference::kStorageCleanRootError,
                       reference::kStorageCleanTreeF1);
    bool any_seg = false;
    for (const auto& a : aggregates) any_seg = any_seg || a.segmentation_map.has_value();
    if (any_seg) {
        out += "\nSegmentation (mAP at IoU 0.5)\n";
        out += fmt::format("{:<28} {:>7} {:>8}\n", "condition", "count", "mAP");
        for (const auto& a : aggregates)
            if (a.segmentation_map)
                out += fmt::format("{:<28} {:>7} {:>8.3f}\n", a.condition, a.count, *a.segmentation_map);
        out += fmt::format("{:<28} {:>7} {:>8.3f}\n", "reference: real, clean", "-",
                           reference::kStorageCleanSegmentationMap);
        out += fmt::format("{:<28} {:>7} {:>8.3f}\n", "reference: real, noisy", "-",
                           reference::kStorageNoisySegmentationMap);
    }
    out += "(reference rows: published learned pipeline on real scans; not comparable to synthetic runs)\n";
    return out;
}

} // namespace kinehier::metrics
