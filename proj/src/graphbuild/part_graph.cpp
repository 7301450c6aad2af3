#include "kinehier/graphbuild/part_graph.hpp"

#include "kinehier/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace kinehier::graphbuild {

namespace {

using CellKey = std::array<std::int64_t, 3>;

struct CellHash {
    std::size_t operator()(const CellKey& k) const noexcept {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (auto v : k) h = (h ^ static_cast<std::uint64_t>(v)) * 0x100000001b3ULL;
        return static_cast<std::size_t>(h);
    }
};

CellKey cell_of(const Vec3& p, double h) {
    return {static_cast<std::int64_t>(std::floor(p.x() / h)), static_cast<std::int64_t>(std::floor(p.y() / h)),
            static_cast<std::int64_t>(std::floor(p.z() / h))};
}

/// Uniform hash grid over one part's points.
class PartGrid {
public:
    PartGrid(const std::vector<Vec3>& points, std::vector<std::size_t> indices, double cell)
        : points_(points), cell_(cell) {
        lo_.fill(std::numeric_limits<std::int64_t>::max());
        hi_.fill(std::numeric_limits<std::int64_t>::min());
        for (auto i : indices) {
            const CellKey k = cell_of(points[i], cell);
            cells_[k].push_back(i);
            for (int a = 0; a < 3; ++a) {
                lo_[a] = std::min(lo_[a], k[a]);
                hi_[a] = std::max(hi_[a], k[a]);
            }
            bbox_.extend(points[i]);
        }
    }

    const Aabb& bbox() const { return bbox_; }

    /// Lowers `best2` to the squared distance from p to the nearest grid
    /// point when that is smaller. Rings whose points are all at least
    /// sqrt(best2) away are never visited.
    void nearest(const Vec3& p, double& best2) const {
        const CellKey c = cell_of(p, cell_);
        std::int64_t k_max = 0;
        for (int a = 0; a < 3; ++a) k_max = std::max({k_max, std::abs(c[a] - lo_[a]), std::abs(c[a] - hi_[a])});
        for (std::int64_t k = 0; k <= k_max; ++k) {
            if (k > 0 && std::isfinite(best2)) {
                const double bound = static_cast<double>(k - 1) * cell_;
                if (bound > std::sqrt(best2) * (1.0 + 1e-9) + 1e-12) return;
            }
            visit_ring(c, k, p, best2);
        }
    }

private:
    void visit_cell(const CellKey& key, const Vec3& p, double& best2) const {
        auto it = cells_.find(key);
        if (it == cells_.end()) return;
        for (auto i : it->second) best2 = std::min(best2, squared_distance(p, points_[i]));
    }

    void visit_ring(const CellKey& c, std::int64_t k, const Vec3& p, double& best2) const {
        const std::int64_t x0 = std::max(c[0] - k, lo_[0]), x1 = std::min(c[0] + k, hi_[0]);
        const std::int64_t y0 = std::max(c[1] - k, lo_[1]), y1 = std::min(c[1] + k, hi_[1]);
        const std::int64_t z0 = std::max(c[2] - k, lo_[2]), z1 = std::min(c[2] + k, hi_[2]);
        for (std::int64_t x = x0; x <= x1; ++x) {
            for (std::int64_t y = y0; y <= y1; ++y) {
                const bool shell_xy = std::abs(x - c[0]) == k || std::abs(y - c[1]) == k;
                if (shell_xy) {
                    for (std::int64_t z = z0; z <= z1; ++z) visit_cell({x, y, z}, p, best2);
                } else {
                    if (c[2] - k >= z0 && c[2] - k <= z1) visit_cell({x, y, c[2] - k}, p, best2);
                    if (k > 0 && c[2] + k >= z0 && c[2] + k <= z1) visit_cell({x, y, c[2] + k}, p, best2);
                }
            }
        }
    }

    const std::vector<Vec3>& points_;
    double cell_;
    std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> cells_;
    CellKey lo_{};
    CellKey hi_{};
    Aabb bbox_;
};

double box_distance2(const Aabb& box, const Vec3& p) {
    const Vec3 d = (box.min - p).cwiseMax(p - box.max).cwiseMax(0.0);
    return d.squaredNorm();
}

std::vector<std::vector<std::size_t>> group_by_label(const PointCloud& cloud) {
    if (!cloud.labels) throw PreconditionError("cloud must be labeled");
    check_point_cloud(cloud);
    std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(cloud.part_count()));
    for (std::size_t i = 0; i < cloud.points.size(); ++i) groups[static_cast<std::size_t>((*cloud.labels)[i])].push_back(i);
    return groups;
}

struct UnionFind {
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (b < a) std::swap(a, b);
        parent[b] = a;
        return true;
    }
    std::vector<std::size_t> parent;
};

} // namespace

bool PartGraph::has_edge(int a, int b) const { return edge_index(a, b).has_value(); }

std::optional<std::size_t> PartGraph::edge_index(int a, int b) const {
    const GraphEdge key{std::min(a, b), std::max(a, b)};
    auto it = std::lower_bound(edges.begin(), edges.end(), key, [](const GraphEdge& x, const GraphEdge& y) {
        return std::pair(x.u, x.v) < std::pair(y.u, y.v);
    });
    if (it == edges.end() || it->u != key.u || it->v != key.v) return std::nullopt;
    return static_cast<std::size_t>(it - edges.begin());
}

void check_part_graph(const PartGraph& graph) {
    const int n = graph.node_count();
    for (int i = 0; i < n; ++i) {
        if (graph.nodes[static_cast<std::size_t>(i)].part_id != i) throw StructuralError("graph node ids must be dense");
    }
    UnionFind uf(static_cast<std::size_t>(n));
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
        const auto& edge = graph.edges[e];
        if (edge.u >= edge.v) throw StructuralError("graph edge not canonical (u < v)");
        if (edge.v >= n || edge.u < 0) throw StructuralError("graph edge endpoint out of range");
        if (e > 0 && std::pair(graph.edges[e - 1].u, graph.edges[e - 1].v) >= std::pair(edge.u, edge.v))
            throw StructuralError("graph edges unsorted or duplicated");
        uf.unite(static_cast<std::size_t>(edge.u), static_cast<std::size_t>(edge.v));
    }
    for (int i = 1; i < n; ++i) {
        if (uf.find(static_cast<std::size_t>(i)) != uf.find(0)) throw StructuralError("candidate graph is disconnected");
    }
}

Eigen::MatrixXd part_min_distances(const PointCloud& cloud, double cell_size) {
    const auto groups = group_by_label(cloud);
    const auto parts = groups.size();
    Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(parts), static_cast<Eigen::Index>(parts));
    if (parts < 2) return dist;
    if (!(cell_size > 0.0)) {
        cell_size = kDefaultTauRel * bounding_box(cloud.points).diagonal();
        if (!(cell_size > 0.0)) cell_size = 1.0;
    }

    std::vector<PartGrid> grids;
    grids.reserve(parts);
    for (const auto& g : groups) grids.emplace_back(cloud.points, g, cell_size);

    for (std::size_t i = 0; i < parts; ++i) {
        for (std::size_t j = i + 1; j < parts; ++j) {
            // Query from the smaller part into the larger part's grid.
            const bool swap = groups[i].size() > groups[j].size();
            const auto& queries = groups[swap ? j : i];
            const PartGrid& target = grids[swap ? i : j];

            // Visit query points nearest the target box first so the bound tightens early.
            std::vector<std::pair<double, std::size_t>> order;
            order.reserve(queries.size());
            for (auto q : queries) order.emplace_back(box_distance2(target.bbox(), cloud.points[q]), q);
            std::sort(order.begin(), order.end());

            double best2 = std::numeric_limits<double>::infinity();
            for (const auto& [lower2, q] : order) {
                if (lower2 > best2) break;
                target.nearest(cloud.points[q], best2);
            }
            const double d = std::sqrt(best2);
            dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = d;
            dist(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = d;
        }
    }
    return dist;
}

Eigen::MatrixXd part_min_distances_brute_force(const PointCloud& cloud) {
    const auto groups = group_by_label(cloud);
    const auto parts = static_cast<Eigen::Index>(groups.size());
    Eigen::MatrixXd best2 = Eigen::MatrixXd::Constant(parts, parts, std::numeric_limits<double>::infinity());
    const auto& labels = *cloud.labels;
    for (std::size_t a = 0; a < cloud.points.size(); ++a) {
        for (std::size_t b = a + 1; b < cloud.points.size(); ++b) {
            const int la = labels[a];
            const int lb = labels[b];
            if (la == lb) continue;
            const double d2 = squared_distance(cloud.points[a], cloud.points[b]);
            auto& slot = best2(std::min(la, lb), std::max(la, lb));
            slot = std::min(slot, d2);
        }
    }
    Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(parts, parts);
    for (Eigen::Index i = 0; i < parts; ++i) {
        for (Eigen::Index j = i + 1; j < parts; ++j) {
            dist(i, j) = dist(j, i) = std::sqrt(best2(i, j));
        }
    }
    return dist;
}

std::vector<PartNode> part_nodes(const PointCloud& cloud) {
    const auto groups = group_by_label(cloud);
    std::vector<PartNode> nodes(groups.size());
    for (std::size_t p = 0; p < groups.size(); ++p) {
        auto& node = nodes[p];
        node.part_id = static_cast<int>(p);
        node.point_indices = groups[p];
        Vec3 sum = Vec3::Zero();
        for (auto i : groups[p]) {
            sum += cloud.points[i];
            node.bbox.extend(cloud.points[i]);
        }
        node.centroid = sum / static_cast<double>(groups[p].size());
    }
    return nodes;
}

PartGraph build_graph(const PointCloud& cloud, double tau_rel) {
    if (!(tau_rel > 0.0)) throw PreconditionError("tau_rel must be positive");
    PartGraph graph;
    graph.nodes = part_nodes(cloud);
    const auto n = graph.nodes.size();
    if (n < 2) return graph;

    const double diag = bounding_box(cloud.points).diagonal();
    const double threshold = tau_rel * diag;
    const Eigen::MatrixXd dist = part_min_distances(cloud, threshold > 0.0 ? threshold : 0.0);

    UnionFind uf(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) < threshold) {
                graph.edges.push_back({static_cast<int>(i), static_cast<int>(j), false});
                uf.unite(i, j);
            }
        }
    }

    // Connectivity repair: globally shortest cross-component edge, ties by (i, j).
    while (true) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0;
        std::size_t bj = 0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (uf.find(i) == uf.find(j)) continue;
                const double d = dist(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (!std::isfinite(best)) break;
        graph.edges.push_back({static_cast<int>(bi), static_cast<int>(bj), true});
        uf.unite(bi, bj);
    }
    std::sort(graph.edges.begin(), graph.edges.end(),
              [](const GraphEdge& a, const GraphEdge& b) { return std::pair(a.u, a.v) < std::pair(b.u, b.v); });
    return graph;
}

std::pair<PointCloud, std::vector<int>> compact_labels(const PointCloud& cloud) {
    if (!cloud.labels) throw PreconditionError("cloud must be labeled");
    std::vector<int> ids(cloud.labels->begin(), cloud.labels->end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    PointCloud out;
    out.points = cloud.points;
    out.labels.emplace();
    out.labels->reserve(cloud.labels->size());
    for (int l : *cloud.labels)
        out.labels->push_back(static_cast<int>(std::lower_bound(ids.begin(), ids.end(), l) - ids.begin()));
    return {std::move(out), std::move(ids)};
}

} // namespace kinehier::graphbuild
