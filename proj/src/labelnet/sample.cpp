#include "kinehier/labelnet/sample.hpp"

#include "kinehier/errors.hpp"
#include "kinehier/random.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <map>

namespace kinehier::labelnet {

GraphSample prepare_input(const PointCloud& cloud, graphbuild::PartGraph graph, const ModelConfig& config,
                          std::uint64_t seed) {
    GraphSample s;
    const std::size_t parts = graph.nodes.size();
    const std::size_t n = config.samples_per_part;
    const Aabb box = bounding_box(cloud.points);
    const Vec3 center = box.center();
    const double diag = box.diagonal() > 0 ? box.diagonal() : 1.0;
    Rng rng(seed);
    s.points.resize(parts * n * 3);
    s.descriptors.resize(parts * 6);
    for (std::size_t p = 0; p < parts; ++p) {
        const auto& node = graph.nodes[p];
        if (node.point_indices.empty()) throw EmptyPartError("part " + std::to_string(p) + " has no points");
        std::uniform_int_distribution<std::size_t> pick(0, node.point_indices.size() - 1);
        for (std::size_t k = 0; k < n; ++k) {
            const Vec3 q = (cloud.points[node.point_indices[pick(rng)]] - center) / diag;
            for (int c = 0; c < 3; ++c) s.points[(p * n + k) * 3 + c] = static_cast<float>(q[c]);
        }
        const Vec3 centroid = (node.centroid - center) / diag;
        const Vec3 extents = node.bbox.extents() / diag;
        for (int c = 0; c < 3; ++c) {
            s.descriptors[p * 6 + c] = static_cast<float>(centroid[c]);
            s.descriptors[p * 6 + 3 + c] = static_cast<float>(extents[c]);
        }
    }
    s.part_ids.resize(parts);
    for (std::size_t p = 0; p < parts; ++p) s.part_ids[p] = static_cast<int>(p);
    s.graph = std::move(graph);
    return s;
}

KinematicTree contract_tree(const KinematicTree& tree, const std::vector<int>& present) {
    std::map<int, int> compact;
    for (std::size_t i = 0; i < present.size(); ++i) compact[present[i]] = static_cast<int>(i);
    auto depth = [&](int id) { return tree.path_from_root(id).size(); };

    KinematicTree out;
    for (std::size_t i = 0; i < present.size(); ++i) {
        const auto* node = tree.node(present[i]);
        if (!node) throw SchemaError("cloud label " + std::to_string(present[i]) + " is not a part of the object");
        out.nodes.push_back({static_cast<int>(i), node->motion});
    }
    if (present.empty()) return out;

    int root = present.front();
    if (compact.contains(tree.root)) {
        root = tree.root;
    } else {
        for (int id : present)
            if (depth(id) < depth(root)) root = id;
    }
    out.root = compact.at(root);
    for (int id : present) {
        if (id == root) continue;
        const auto* own = tree.parent_edge(id);
        std::optional<int> parent = tree.parent_of(id);
        while (parent && !compact.contains(*parent)) parent = tree.parent_of(*parent);
        TreeEdge e;
        e.parent = parent ? compact.at(*parent) : out.root;
        e.child = compact.at(id);
        if (own) e.joint = own->joint;
        out.edges.push_back(e);
    }
    return out;
}

GraphTargets make_targets(const graphbuild::PartGraph& graph, const KinematicTree& t) {
    GraphTargets g;
    g.tree = t;
    g.root = static_cast<std::size_t>(t.root);
    g.motion.resize(graph.nodes.size());
    for (const auto& node : t.nodes) g.motion.at(static_cast<std::size_t>(node.part_id)) = static_cast<std::size_t>(node.motion);
    g.exist.assign(graph.edges.size(), 0.0f);
    for (const auto& e : t.edges) {
        const auto idx = graph.edge_index(e.parent, e.child);
        if (!idx) {
            ++g.missing_edges;
            continue;
        }
        g.exist[*idx] = 1.0f;
        g.dir_edges.push_back(*idx);
        g.direction.push_back(graph.edges[*idx].u == e.parent ? 1.0f : 0.0f);
    }
    std::vector<std::size_t> order(g.dir_edges.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return g.dir_edges[a] < g.dir_edges[b]; });
    std::vector<std::size_t> edges;
    std::vector<float> dirs;
    for (auto i : order) {
        edges.push_back(g.dir_edges[i]);
        dirs.push_back(g.direction[i]);
    }
    g.dir_edges = std::move(edges);
    g.direction = std::move(dirs);
    return g;
}

std::uint64_t sample_seed(const ModelConfig& config, const synthgen::DatasetRecord& r) {
    return derive_seed({config.seed, r.object_seed, static_cast<std::uint64_t>(r.pose_index),
                        static_cast<std::uint64_t>(r.condition), static_cast<std::uint64_t>(r.split), 0x73616d70});
}

GraphSample prepare_sample(const synthgen::DatasetRecord& record, const ModelConfig& config) {
    auto [cloud, ids] = graphbuild::compact_labels(record.cloud);
    std::map<int, int> compact;
    for (std::size_t i = 0; i < ids.size(); ++i) compact[ids[i]] = static_cast<int>(i);

    graphbuild::PartGraph graph;
    graph.nodes = graphbuild::part_nodes(cloud);
    for (const auto& [a, b] : record.candidate_edges) {
        if (!compact.contains(a) || !compact.contains(b))
            throw CorruptDataError("candidate edge references a part absent from the cloud");
        int u = compact.at(a), v = compact.at(b);
        if (u > v) std::swap(u, v);
        graph.edges.push_back({u, v, false});
    }
    std::sort(graph.edges.begin(), graph.edges.end(),
              [](const auto& x, const auto& y) { return std::pair(x.u, x.v) < std::pair(y.u, y.v); });

    auto sample = prepare_input(cloud, std::move(graph), config, sample_seed(config, record));
    sample.part_ids = ids;
    sample.targets = make_targets(sample.graph, contract_tree(record.object.tree, ids));
    return sample;
}

std::vector<GraphSample> prepare_samples(const std::vector<synthgen::DatasetRecord>& records,
                                         const ModelConfig& config) {
    std::vector<GraphSample> out;
    out.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        out.push_back(prepare_sample(records[i], config));
        if (const auto missing = out.back().targets->missing_edges; missing > 0) {
            fmt::print(stderr, "warning: record {} (object {}, pose {}): {} tree edge(s) not in the candidate graph, skipped\n",
                       i, records[i].object_seed, records[i].pose_index, missing);
        }
    }
    return out;
}

} // namespace kinehier::labelnet
