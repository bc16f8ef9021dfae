#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "loggpis/map.hpp"
#include "loggpis/scene.hpp"
#include "loggpis/types.hpp"

namespace loggpis {

/// Planar lidar scan. Beam i points at angle_min + i * angle_step in the
/// sensor frame; NaN ranges are beams without a return.
struct Scan2D {
    Pose pose = Pose::Identity(2);
    double angle_min = -0.75 * M_PI;
    double angle_max = 0.75 * M_PI;
    double angle_step = M_PI / 180.0;
    std::vector<double> ranges;
    double range_noise = 0.01;
    double max_range = std::numeric_limits<double>::infinity();

    [[nodiscard]] std::size_t BeamCount() const;
    [[nodiscard]] double Angle(std::size_t beam) const { return angle_min + beam * angle_step; }
    void Validate() const;
};

/// Pinhole intrinsics; pixel (u, v) is column u, row v, centre at integers.
struct Intrinsics {
    int width = 64;
    int height = 48;
    double fx = 55.0;
    double fy = 55.0;
    double cx = 31.5;
    double cy = 23.5;
};

struct DepthFrame {
    Pose pose = Pose::Identity(3);
    Intrinsics intrinsics;
    Matrix depth;  // height x width, metres along the optical axis; 0 or NaN invalid
    double depth_noise = 0.005;  // std at 1 m, grows linearly with depth

    void Validate() const;
};

Eigen::Vector3d BackProject(const Intrinsics &k, double u, double v, double depth);
Eigen::Vector2d Project(const Intrinsics &k, const Eigen::Vector3d &p_cam);

/// Ray-casts every beam of `templ` from `pose` and adds Gaussian range noise
/// from a generator seeded with `seed`.
Scan2D SimulateScan(const AnalyticScene &scene, const Pose &pose, const Scan2D &templ,
                    std::uint64_t seed);

struct ScanIngestOptions {
    int max_neighbor_beams = 3;
    /// Neighbouring hits farther apart than factor * range * step * beams
    /// (plus six noise std) belong to different surfaces.
    double max_gap_factor = 10.0;
};

/// Hit points in the world frame with polyline normals facing the sensor.
std::vector<SurfacePoint> ScanToPoints(const Scan2D &scan, const ScanIngestOptions &options = {});

DepthFrame SimulateDepth(const AnalyticScene &scene, const Pose &pose, const DepthFrame &templ,
                         std::uint64_t seed);

struct DepthIngestOptions {
    int window = 5;
    int min_neighbors = 8;
    /// Plane-fit RMS residual threshold in units of the per-pixel noise std.
    double residual_factor = 2.0;
};

/// Back-projects every stride-th pixel and estimates normals by windowed
/// plane fits. Pixels across depth discontinuities fail the residual test.
std::vector<SurfacePoint> DepthToPoints(const DepthFrame &frame, int stride,
                                        const DepthIngestOptions &options = {});

}  // namespace loggpis
