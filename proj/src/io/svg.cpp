#include "kinehier/io/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>

namespace kinehier::io {

namespace {

constexpr std::array<const char*, 12> kPalette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
                                               "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939"};
constexpr int kPanel = 300;
constexpr int kMargin = 20;
constexpr int kHeader = 30;

} // namespace

std::string cloud_to_svg(const PointCloud& cloud, const std::vector<int>& color_keys,
                         const std::vector<std::string>& legend, const std::string& title) {
    const int legend_rows = static_cast<int>(legend.size());
    const int width = 3 * kPanel + 4 * kMargin;
    const int height = kHeader + kPanel + 2 * kMargin + 16 * legend_rows;
    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n", width,
        height, width, height);
    out += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", width, height);
    if (!title.empty()) out += fmt::format("<text x=\"{}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n", kMargin, title);

    const Aabb box = bounding_box(cloud.points);
    const Vec3 center = box.empty() ? Vec3::Zero() : box.center();
    const double span = box.empty() ? 1.0 : std::max(box.extents().maxCoeff(), 1e-9);
    const double scale = 0.9 * kPanel / span;
    constexpr std::array<std::array<int, 2>, 3> axes{{{0, 2}, {1, 2}, {0, 1}}};
    constexpr std::array<const char*, 3> names{"front (x, z)", "side (y, z)", "top (x, y)"};
    for (int v = 0; v < 3; ++v) {
        const int x0 = kMargin + v * (kPanel + kMargin);
        const int y0 = kHeader + kMargin;
        out += fmt::format("<g>\n<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#cccccc\"/>\n",
                           x0, y0, kPanel, kPanel);
        out += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n", x0 + 4,
                           y0 + 12, names[static_cast<std::size_t>(v)]);
        for (std::size_t i = 0; i < cloud.size(); ++i) {
            const Vec3 p = cloud.points[i] - center;
            const double px = x0 + kPanel / 2.0 + scale * p[axes[static_cast<std::size_t>(v)][0]];
            const double py = y0 + kPanel / 2.0 - scale * p[axes[static_cast<std::size_t>(v)][1]];
            int key = 0;
            if (cloud.labeled()) {
                const int label = (*cloud.labels)[i];
                key = label >= 0 && static_cast<std::size_t>(label) < color_keys.size()
                          ? color_keys[static_cast<std::size_t>(label)]
                          : label;
            }
            out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"1.2\" fill=\"{}\"/>\n", px, py,
                               kPalette[static_cast<std::size_t>(std::max(key, 0)) % kPalette.size()]);
        }
        out += "</g>\n";
    }
    for (int k = 0; k < legend_rows; ++k) {
        const int y = kHeader + kPanel + 2 * kMargin + 16 * k;
        out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n", kMargin, y,
                           kPalette[static_cast<std::size_t>(k) % kPalette.size()]);
        out += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
                           kMargin + 16, y + 9, legend[static_cast<std::size_t>(k)]);
    }
    out += "</svg>\n";
    return out;
}

std::string cloud_motion_svg(const PointCloud& cloud, const KinematicTree& tree, const std::string& title) {
    int max_label = -1;
    if (cloud.labeled())
        for (int l : *cloud.labels) max_label = std::max(max_label, l);
    std::vector<int> keys(static_cast<std::size_t>(max_label + 1), 0);
    for (const auto& n : tree.nodes)
        if (n.part_id >= 0 && n.part_id <= max_label) keys[static_cast<std::size_t>(n.part_id)] = static_cast<int>(n.motion);
    std::vector<std::string> legend;
    for (int k = 0; k < kMotionTypeCount; ++k) legend.emplace_back(to_string(static_cast<MotionType>(k)));
    return cloud_to_svg(cloud, keys, legend, title);
}

} // namespace kinehier::io
