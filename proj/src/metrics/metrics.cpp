#include "kinehier/metrics/metrics.hpp"

#include "kinehier/errors.hpp"
#include "kinehier/treeextract/extract.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace kinehier::metrics {

namespace {

double percent(std::size_t bad, std::size_t total) {
    return total == 0 ? 0.0 : 100.0 * static_cast<double>(bad) / static_cast<double>(total);
}

} // namespace

StructureErrors structure_errors(const labelnet::LabeledGraph& pred, const KinematicTree& gt) {
    const std::size_t n = pred.base.nodes.size();
    if (gt.nodes.size() != n) throw SchemaError("structure_errors: node counts differ");
    StructureErrors r;
    r.nodes = n;
    std::size_t wrong_type = 0;
    for (const auto& node : gt.nodes) {
        if (node.part_id < 0 || static_cast<std::size_t>(node.part_id) >= n)
            throw SchemaError("structure_errors: ground-truth part id outside the graph");
        if (treeextract::argmax_motion(pred.motion[static_cast<std::size_t>(node.part_id)]) != node.motion) ++wrong_type;
    }
    r.e_type = percent(wrong_type, n);

    std::set<std::pair<int, int>> tree_pairs;
    for (const auto& e : gt.edges) tree_pairs.insert(std::minmax(e.parent, e.child));
    std::size_t wrong_exist = 0;
    r.candidate_edges = pred.base.edges.size();
    for (std::size_t k = 0; k < pred.base.edges.size(); ++k) {
        const auto& e = pred.base.edges[k];
        if ((pred.exist[k] > 0.5) != tree_pairs.contains({e.u, e.v})) ++wrong_exist;
    }
    r.e_exist = percent(wrong_exist, r.candidate_edges);

    std::size_t wrong_dir = 0;
    for (const auto& e : gt.edges) {
        const auto idx = pred.base.edge_index(e.parent, e.child);
        if (!idx) {
            ++r.uncovered_tree_edges;
            continue;
        }
        ++r.tree_edges;
        const bool forward = pred.base.edges[*idx].u == e.parent;
        if ((pred.direction[*idx] > 0.5) != forward) ++wrong_dir;
    }
    r.e_dir = percent(wrong_dir, r.tree_edges);
    r.e_root = n > 0 && treeextract::select_root(pred) != gt.root ? 100.0 : 0.0;
    return r;
}

std::vector<int> matched_nodes(const KinematicTree& pred, const KinematicTree& gt) {
    std::vector<int> matched;
    const auto* root = pred.node(pred.root);
    const auto* groot = gt.node(gt.root);
    if (!root || !groot || pred.root != gt.root || root->motion != groot->motion) return matched;
    std::vector<int> frontier{pred.root};
    while (!frontier.empty()) {
        const int p = frontier.back();
        frontier.pop_back();
        matched.push_back(p);
        for (int c : pred.children_of(p)) {
            const auto* gp = gt.parent_of(c) ? gt.node(c) : nullptr;
            if (!gp || *gt.parent_of(c) != p) continue;
            if (pred.node(c)->motion != gp->motion) continue;
            frontier.push_back(c);
        }
    }
    std::sort(matched.begin(), matched.end());
    return matched;
}

double tree_f1(const KinematicTree& pred, const KinematicTree& gt) {
    std::set<int> ids;
    for (const auto& n : gt.nodes) ids.insert(n.part_id);
    bool shared = false;
    for (const auto& n : pred.nodes) shared = shared || ids.contains(n.part_id);
    if (!shared) throw SchemaError("tree_f1: trees share no part id");
    const auto matched = matched_nodes(pred, gt).size();
    const double m = static_cast<double>(matched + (matched > 0 ? matched - 1 : 0));
    const double p = m / static_cast<double>(pred.nodes.size() + pred.edges.size());
    const double r = m / static_cast<double>(gt.nodes.size() + gt.edges.size());
    return p + r > 0 ? 200.0 * p * r / (p + r) : 0.0;
}

double segmentation_ap(const PointCloud& pred, const PointCloud& gt, double iou_threshold) {
    if (!pred.labeled() || !gt.labeled()) throw SchemaError("segmentation_ap: both clouds need labels");
    if (pred.size() != gt.size()) throw SchemaError("segmentation_ap: point counts differ");
    const auto& pl = *pred.labels;
    const auto& gl = *gt.labels;
    std::map<int, std::size_t> psize, gsize;
    std::map<std::pair<int, int>, std::size_t> inter;
    for (std::size_t i = 0; i < pl.size(); ++i) {
        ++psize[pl[i]];
        ++gsize[gl[i]];
        ++inter[{pl[i], gl[i]}];
    }
    if (gsize.empty()) return 0.0;
    std::vector<std::pair<int, std::size_t>> ranked(psize.begin(), psize.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

    std::set<int> claimed;
    std::size_t hits = 0;
    double ap = 0.0, prev_recall = 0.0;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
        const auto [label, size] = ranked[k];
        int best = -1;
        double best_iou = -1.0;
        for (const auto& [g, gs] : gsize) {
            const auto it = inter.find({label, g});
            const double in = it == inter.end() ? 0.0 : static_cast<double>(it->second);
            const double iou = in / static_cast<double>(size + gs - static_cast<std::size_t>(in));
            if (iou > best_iou) {
                best_iou = iou;
                best = g;
            }
        }
        if (best_iou > iou_threshold && !claimed.contains(best)) {
            claimed.insert(best);
            ++hits;
        }
        const double precision = static_cast<double>(hits) / static_cast<double>(k + 1);
        const double recall = static_cast<double>(hits) / static_cast<double>(gsize.size());
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return ap;
}

double mean_ap(const std::vector<double>& per_object) {
    if (per_object.empty()) return 0.0;
    return std::accumulate(per_object.begin(), per_object.end(), 0.0) / static_cast<double>(per_object.size());
}

} // namespace kinehier::metrics
