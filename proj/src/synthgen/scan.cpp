#include "kinehier/synthgen/scan.hpp"

#include "kinehier/errors.hpp"
#include "kinehier/kinecore/articulation.hpp"
#include "kinehier/random.hpp"
#include "kinehier/synthgen/primitives.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace kinehier::synthgen {

void check_scan_config(const ScanConfig& c) {
    if (c.n_points <= 0) throw ConfigError("scan n_points must be positive");
    if (c.viewpoints < 1) throw ConfigError("scan needs at least one viewpoint");
    if (c.width < 1 || c.height < 1) throw ConfigError("scan image size must be positive");
    if (c.sigma0 < 0 || c.sigma1 < 0 || c.quantization < 0) throw ConfigError("scan noise terms must be >= 0");
    if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw ConfigError("scan dropout must lie in [0, 1)");
    if (!(c.fov_y_deg > 0.0 && c.fov_y_deg < 180.0)) throw ConfigError("scan fov must lie in (0, 180)");
    if (!(c.distance_factor > 0.0)) throw ConfigError("scan distance factor must be positive");
}

Camera Camera::look_at(const Vec3& eye, const Vec3& target, int width, int height, double fov_y_deg) {
    Camera cam;
    cam.eye = eye;
    cam.forward = (target - eye).normalized();
    Vec3 right = cam.forward.cross(Vec3::UnitZ());
    if (right.norm() < 1e-9) right = cam.forward.cross(Vec3::UnitX());
    cam.right = right.normalized();
    cam.up = cam.right.cross(cam.forward);
    cam.width = width;
    cam.height = height;
    cam.fy = 0.5 * height / std::tan(0.5 * fov_y_deg * std::numbers::pi / 180.0);
    cam.fx = cam.fy;
    cam.cx = 0.5 * width;
    cam.cy = 0.5 * height;
    return cam;
}

long Camera::pixel(const Vec3& p) const {
    const Vec3 d = p - eye;
    const double z = d.dot(forward);
    if (!(z > 0.0)) return -1;
    const double u = std::floor(cx + fx * d.dot(right) / z);
    const double v = std::floor(cy - fy * d.dot(up) / z);
    if (u < 0 || v < 0 || u >= width || v >= height) return -1;
    return static_cast<long>(v) * width + static_cast<long>(u);
}

std::vector<Camera> ring_cameras(const Aabb& bounds, const ScanConfig& config) {
    const Vec3 center = bounds.center();
    const double dist = config.distance_factor * std::max(bounds.diagonal(), 1e-6);
    const double el = config.elevation_deg * std::numbers::pi / 180.0;
    std::vector<Camera> cams;
    for (int k = 0; k < config.viewpoints; ++k) {
        const double az = 0.25 * std::numbers::pi + 2.0 * std::numbers::pi * k / config.viewpoints;
        const Vec3 eye = center + dist * Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
        cams.push_back(Camera::look_at(eye, center, config.width, config.height, config.fov_y_deg));
    }
    return cams;
}

std::vector<std::size_t> visible_points(std::span<const Vec3> points, const Camera& camera) {
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> owner(static_cast<std::size_t>(camera.width) * camera.height, kNone);
    std::vector<double> depth(owner.size(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const long px = camera.pixel(points[i]);
        if (px < 0) continue;
        const double z = camera.depth(points[i]);
        const auto slot = static_cast<std::size_t>(px);
        if (z < depth[slot]) {
            depth[slot] = z;
            owner[slot] = i;
        }
    }
    std::vector<std::size_t> out;
    for (auto o : owner) {
        if (o != kNone) out.push_back(o);
    }
    std::sort(out.begin(), out.end());
    return out;
}

PointCloud scan_clean(const GroundTruthObject& object, const JointPose& pose, int n_points, std::uint64_t seed) {
    if (n_points <= 0) throw PreconditionError("scan_clean needs n_points > 0");
    if (object.primitives.empty()) throw PreconditionError("object has no geometry");
    const auto transforms = part_transforms(object.tree, pose);

    std::vector<double> cumulative;
    double total = 0.0;
    for (const auto& p : object.primitives) {
        total += p.surface_area();
        cumulative.push_back(total);
    }

    Rng rng(derive_seed({0x636c65616eULL, object.seed, seed}));
    PointCloud cloud;
    cloud.points.reserve(static_cast<std::size_t>(n_points));
    cloud.labels.emplace();
    cloud.labels->reserve(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
        const double pick = uniform(rng, 0.0, total);
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
        if (it == cumulative.end()) --it;
        const auto& prim = object.primitives[static_cast<std::size_t>(it - cumulative.begin())];
        const Vec3 rest = sample_surface(prim, rng);
        cloud.points.push_back(transforms[static_cast<std::size_t>(prim.part_id)] * rest);
        cloud.labels->push_back(prim.part_id);
    }
    return cloud;
}

NoisyScan scan_noisy_traced(const GroundTruthObject& object, const JointPose& pose, const ScanConfig& config,
                            std::uint64_t seed) {
    check_scan_config(config);
    NoisyScan scan;
    scan.clean = scan_clean(object, pose, config.n_points, derive_seed({seed, 1}));
    scan.cameras = ring_cameras(bounding_box(scan.clean.points), config);
    scan.cloud.labels.emplace();

    const auto& clean_pts = scan.clean.points;
    for (std::size_t v = 0; v < scan.cameras.size(); ++v) {
        const Camera& cam = scan.cameras[v];
        Rng rng(derive_seed({0x6e6f697379ULL, object.seed, seed, v}));
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        for (std::size_t i : visible_points(clean_pts, cam)) {
            const Vec3& p = clean_pts[i];
            const double z = cam.depth(p);
            const double sigma = config.sigma0 + config.sigma1 * z * z;
            const double n = sigma * gauss(rng);
            const Vec3 ray = (p - cam.eye).normalized();
            Vec3 q = p + n * ray;
            if (config.quantization > 0.0) {
                const double zq_raw = cam.depth(q);
                const double zq = std::round(zq_raw / config.quantization) * config.quantization;
                if (zq > 0.0 && zq_raw > 0.0) q = cam.eye + (q - cam.eye) * (zq / zq_raw);
            }
            if (config.dropout > 0.0 && coin(rng) < config.dropout) continue;
            scan.cloud.points.push_back(q);
            scan.cloud.labels->push_back((*scan.clean.labels)[i]);
            scan.source.push_back(i);
            scan.view.push_back(static_cast<int>(v));
        }
    }
    return scan;
}

PointCloud scan_noisy(const GroundTruthObject& object, const JointPose& pose, const ScanConfig& config,
                      std::uint64_t seed) {
    return scan_noisy_traced(object, pose, config, seed).cloud;
}

} // namespace kinehier::synthgen
