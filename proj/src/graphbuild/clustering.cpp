#include "kinehier/graphbuild/clustering.hpp"

#include "kinehier/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>

namespace kinehier::graphbuild {

PointCloud segment_clustering(const PointCloud& cloud, double radius) {
    if (!(radius > 0.0)) throw PreconditionError("clustering radius must be positive");
    const std::size_t n = cloud.points.size();
    const double r2 = radius * radius;

    using Key = std::array<std::int64_t, 3>;
    auto key_of = [&](const Vec3& p) {
        return Key{static_cast<std::int64_t>(std::floor(p.x() / radius)),
                   static_cast<std::int64_t>(std::floor(p.y() / radius)),
                   static_cast<std::int64_t>(std::floor(p.z() / radius))};
    };
    std::map<Key, std::vector<std::size_t>> cells;
    for (std::size_t i = 0; i < n; ++i) cells[key_of(cloud.points[i])].push_back(i);

    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };

    for (std::size_t i = 0; i < n; ++i) {
        const Key k = key_of(cloud.points[i]);
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy)
                for (std::int64_t dz = -1; dz <= 1; ++dz) {
                    auto it = cells.find({k[0] + dx, k[1] + dy, k[2] + dz});
                    if (it == cells.end()) continue;
                    for (auto j : it->second) {
                        if (j <= i) continue;
                        if (squared_distance(cloud.points[i], cloud.points[j]) < r2) {
                            auto a = find(i);
                            auto b = find(j);
                            if (a != b) parent[std::max(a, b)] = std::min(a, b);
                        }
                    }
                }
    }

    // Component root is its smallest member after union-by-min.
    std::vector<std::size_t> size(n, 0);
    for (std::size_t i = 0; i < n; ++i) ++size[find(i)];
    std::vector<std::size_t> roots;
    for (std::size_t i = 0; i < n; ++i) {
        if (find(i) == i) roots.push_back(i);
    }
    std::stable_sort(roots.begin(), roots.end(), [&](std::size_t a, std::size_t b) { return size[a] > size[b]; });
    std::vector<int> label_of_root(n, -1);
    for (std::size_t r = 0; r < roots.size(); ++r) label_of_root[roots[r]] = static_cast<int>(r);

    PointCloud out;
    out.points = cloud.points;
    out.labels.emplace(n);
    for (std::size_t i = 0; i < n; ++i) (*out.labels)[i] = label_of_root[find(i)];
    return out;
}

} // namespace kinehier::graphbuild
