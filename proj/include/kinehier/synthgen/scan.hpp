#pragma once

#include "kinehier/kinecore/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace kinehier::synthgen {

/// Depth-sensor stand-in. Defaults are desk-scale choices, not a calibrated
/// sensor model.
struct ScanConfig {
    int n_points = 4096;
    int viewpoints = 4;
    int width = 160;
    int height = 120;
    double sigma0 = 0.003;      // m
    double sigma1 = 0.002;      // 1/m, multiplies depth^2
    double dropout = 0.05;
    double quantization = 0.002;  // m, 0 disables
    double elevation_deg = 30.0;
    double distance_factor = 2.2;  // camera distance in bbox diagonals
    double fov_y_deg = 40.0;
};

/// Throws ConfigError for a degenerate configuration.
void check_scan_config(const ScanConfig& config);

/// Pinhole camera looking from `eye` at a target.
struct Camera {
    Vec3 eye;
    Vec3 forward;
    Vec3 right;
    Vec3 up;
    double fx = 0;
    double fy = 0;
    double cx = 0;
    double cy = 0;
    int width = 0;
    int height = 0;

    static Camera look_at(const Vec3& eye, const Vec3& target, int width, int height, double fov_y_deg);
    /// Depth along the optical axis.
    double depth(const Vec3& p) const { return (p - eye).dot(forward); }
    /// Pixel index (row-major) or -1 when the point falls outside the image.
    long pixel(const Vec3& p) const;
};

/// Cameras on a ring around `bounds` (azimuths pi/4 + 2*pi*k/V).
std::vector<Camera> ring_cameras(const Aabb& bounds, const ScanConfig& config);

/// Point-based visibility: indices (ascending) of the nearest point on every
/// occupied pixel; ties go to the lower index.
std::vector<std::size_t> visible_points(std::span<const Vec3> points, const Camera& camera);

/// Area-proportional surface samples of the posed object, labeled by part.
PointCloud scan_clean(const GroundTruthObject& object, const JointPose& pose, int n_points,
                      std::uint64_t seed);

struct NoisyScan {
    PointCloud cloud;
    PointCloud clean;                  // the samples every view projects
    std::vector<std::size_t> source;   // clean index of each output point
    std::vector<int> view;             // camera index of each output point
    std::vector<Camera> cameras;
};

/// Full trace of the simulated multi-view scan.
NoisyScan scan_noisy_traced(const GroundTruthObject& object, const JointPose& pose,
                            const ScanConfig& config, std::uint64_t seed);

/// Visibility, along-ray Gaussian noise (std sigma0 + sigma1 z^2), depth
/// quantization and dropout per view, merged in view order.
PointCloud scan_noisy(const GroundTruthObject& object, const JointPose& pose,
                      const ScanConfig& config, std::uint64_t seed);

} // namespace kinehier::synthgen
