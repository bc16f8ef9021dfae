#include "loggpis/sensor.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <spdlog/spdlog.h>

#include "loggpis/error.hpp"

namespace loggpis {

namespace {

constexpr double kMinNoise = 1e-6;

}  // namespace

std::size_t Scan2D::BeamCount() const {
    return static_cast<std::size_t>(std::floor((angle_max - angle_min) / angle_step + 1e-9)) + 1;
}

void Scan2D::Validate() const {
    pose.Validate();
    if (pose.dim() != 2) throw Error(ErrorCode::kDimensionMismatch, "scan pose must be 2D");
    if (!(angle_step > 0.0) || !(angle_max >= angle_min)) {
        throw Error(ErrorCode::kInvalidInput, "scan angles must satisfy min <= max, step > 0");
    }
    if (ranges.size() != BeamCount()) {
        throw Error(ErrorCode::kInvalidInput, "scan has " + std::to_string(ranges.size()) +
                                                  " ranges, expected " +
                                                  std::to_string(BeamCount()));
    }
    for (double r : ranges) {
        if (!std::isnan(r) && !(r > 0.0)) throw Error(ErrorCode::kInvalidInput, "ranges must be > 0");
    }
    if (!(range_noise >= 0.0)) throw Error(ErrorCode::kInvalidInput, "range noise must be >= 0");
}

void DepthFrame::Validate() const {
    pose.Validate();
    if (pose.dim() != 3) throw Error(ErrorCode::kDimensionMismatch, "depth pose must be 3D");
    if (!(intrinsics.fx > 0.0) || !(intrinsics.fy > 0.0)) {
        throw Error(ErrorCode::kInvalidInput, "focal lengths must be positive");
    }
    if (depth.rows() != intrinsics.height || depth.cols() != intrinsics.width) {
        throw Error(ErrorCode::kDimensionMismatch, "depth image size does not match intrinsics");
    }
    if ((depth.array() < 0.0).any()) throw Error(ErrorCode::kInvalidInput, "negative depth");
    if (!(depth_noise >= 0.0)) throw Error(ErrorCode::kInvalidInput, "depth noise must be >= 0");
}

Eigen::Vector3d BackProject(const Intrinsics &k, double u, double v, double depth) {
    return {(u - k.cx) * depth / k.fx, (v - k.cy) * depth / k.fy, depth};
}

Eigen::Vector2d Project(const Intrinsics &k, const Eigen::Vector3d &p_cam) {
    return {k.fx * p_cam.x() / p_cam.z() + k.cx, k.fy * p_cam.y() / p_cam.z() + k.cy};
}

Scan2D SimulateScan(const AnalyticScene &scene, const Pose &pose, const Scan2D &templ,
                    std::uint64_t seed) {
    scene.Validate();
    pose.Validate();
    Scan2D scan = templ;
    scan.pose = pose;
    const std::size_t n = scan.BeamCount();
    scan.ranges.assign(n, std::numeric_limits<double>::quiet_NaN());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = scan.Angle(i);
        const Vector dir = pose.rotation * Eigen::Vector2d(std::cos(a), std::sin(a));
        // One draw per beam keeps the noise stream aligned with beam indices.
        const double eps = noise(rng) * scan.range_noise;
        const auto hit = scene.Intersect(pose.translation, dir);
        if (!hit || hit->t > scan.max_range) continue;
        const double r = hit->t + eps;
        if (r > 0.0) scan.ranges[i] = r;
    }
    return scan;
}

std::vector<SurfacePoint> ScanToPoints(const Scan2D &scan, const ScanIngestOptions &options) {
    scan.Validate();
    const std::size_t n = scan.ranges.size();
    std::vector<Vector> hits(n);
    std::vector<bool> valid(n, false);
    std::size_t valid_count = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = scan.ranges[i];
        if (!std::isfinite(r)) continue;
        const double a = scan.Angle(i);
        hits[i] = scan.pose.Apply(Eigen::Vector2d(r * std::cos(a), r * std::sin(a)));
        valid[i] = true;
        ++valid_count;
    }
    std::vector<SurfacePoint> out;
    if (valid_count < 2) {
        spdlog::warn("scan has {} valid returns; no surface points", valid_count);
        return out;
    }
    const Vector &sensor = scan.pose.translation;
    const double noise = std::max(scan.range_noise, kMinNoise);

    auto neighbour = [&](std::size_t i, int direction) -> int {
        for (int k = 1; k <= options.max_neighbor_beams; ++k) {
            const long j = static_cast<long>(i) + direction * k;
            if (j < 0 || j >= static_cast<long>(n)) return -1;
            if (!valid[static_cast<std::size_t>(j)]) continue;
            const double gap = (hits[static_cast<std::size_t>(j)] - hits[i]).norm();
            const double allowed =
                options.max_gap_factor * scan.ranges[i] * scan.angle_step * k + 6.0 * noise;
            return gap <= allowed ? static_cast<int>(j) : -1;
        }
        return -1;
    };

    for (std::size_t i = 0; i < n; ++i) {
        if (!valid[i]) continue;
        const int prev = neighbour(i, -1);
        const int next = neighbour(i, +1);
        if (prev < 0 && next < 0) continue;
        const Vector &a = prev >= 0 ? hits[static_cast<std::size_t>(prev)] : hits[i];
        const Vector &b = next >= 0 ? hits[static_cast<std::size_t>(next)] : hits[i];
        const Eigen::Vector2d tangent = b - a;
        Eigen::Vector2d normal(-tangent.y(), tangent.x());
        if (!(normal.norm() > 0.0)) continue;
        normal.normalize();
        const double facing = normal.dot(sensor - hits[i]);
        if (facing == 0.0) continue;
        if (facing < 0.0) normal = -normal;
        out.push_back({hits[i], normal, noise, 1});
    }
    return out;
}

DepthFrame SimulateDepth(const AnalyticScene &scene, const Pose &pose, const DepthFrame &templ,
                         std::uint64_t seed) {
    scene.Validate();
    pose.Validate();
    DepthFrame frame = templ;
    frame.pose = pose;
    const Intrinsics &k = frame.intrinsics;
    frame.depth = Matrix::Constant(k.height, k.width, std::numeric_limits<double>::quiet_NaN());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (int v = 0; v < k.height; ++v) {
        for (int u = 0; u < k.width; ++u) {
            const double eps = noise(rng);
            const Eigen::Vector3d ray_cam = BackProject(k, u, v, 1.0);
            const Vector dir = pose.rotation * ray_cam.normalized();
            const auto hit = scene.Intersect(pose.translation, dir);
            if (!hit) continue;
            const double z = hit->t / ray_cam.norm();
            const double d = z + eps * frame.depth_noise * z;
            if (d > 0.0) frame.depth(v, u) = d;
        }
    }
    return frame;
}

std::vector<SurfacePoint> DepthToPoints(const DepthFrame &frame, int stride,
                                        const DepthIngestOptions &options) {
    if (stride < 1) throw Error(ErrorCode::kInvalidInput, "stride must be >= 1");
    frame.Validate();
    const Intrinsics &k = frame.intrinsics;
    const int half = options.window / 2;
    auto valid = [&](int v, int u) {
        const double d = frame.depth(v, u);
        return std::isfinite(d) && d > 0.0;
    };

    std::vector<SurfacePoint> out;
    bool any_valid = false;
    std::vector<Eigen::Vector3d> window;
    for (int v = 0; v < k.height; v += stride) {
        for (int u = 0; u < k.width; u += stride) {
            if (!valid(v, u)) continue;
            any_valid = true;
            const double z = frame.depth(v, u);
            const Eigen::Vector3d p = BackProject(k, u, v, z);
            window.clear();
            for (int dv = -half; dv <= half; ++dv) {
                for (int du = -half; du <= half; ++du) {
                    const int vv = v + dv;
                    const int uu = u + du;
                    if ((dv == 0 && du == 0) || vv < 0 || uu < 0 || vv >= k.height ||
                        uu >= k.width || !valid(vv, uu)) {
                        continue;
                    }
                    window.push_back(BackProject(k, uu, vv, frame.depth(vv, uu)));
                }
            }
            if (static_cast<int>(window.size()) < options.min_neighbors) continue;
            window.push_back(p);

            Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
            for (const auto &q : window) centroid += q;
            centroid /= static_cast<double>(window.size());
            Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
            for (const auto &q : window) cov += (q - centroid) * (q - centroid).transpose();
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
            Eigen::Vector3d normal = eig.eigenvectors().col(0);
            double ss = 0.0;
            for (const auto &q : window) {
                const double r = normal.dot(q - centroid);
                ss += r * r;
            }
            const double rms = std::sqrt(ss / static_cast<double>(window.size()));
            const double sigma = frame.depth_noise * z;
            if (rms > std::max(options.residual_factor * sigma, 1e-6 * z)) continue;
            if (normal.dot(-p) < 0.0) normal = -normal;
            if (normal.dot(-p) == 0.0) continue;

            SurfacePoint sp;
            sp.position = frame.pose.Apply(p);
            sp.normal = frame.pose.rotation * normal;
            sp.pos_noise = std::max(sigma, kMinNoise);
            out.push_back(std::move(sp));
        }
    }
    if (!any_valid) spdlog::warn("depth frame has no valid pixels; no surface points");
    return out;
}

}  // namespace loggpis
