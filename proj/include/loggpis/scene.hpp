#pragma once

#include <optional>
#include <vector>

#include "loggpis/types.hpp"

namespace loggpis {

/// Rigid transform from a sensor frame to the world frame.
struct Pose {
    Matrix rotation;
    Vector translation;

    static Pose Identity(int dim);
    static Pose FromHeading(double tx, double ty, double heading);
    /// Unit quaternion (w, x, y, z); normalised on input.
    static Pose FromQuaternion(const Eigen::Ref<const Vector> &translation, double qw, double qx,
                               double qy, double qz);
    /// Camera at `eye` looking at `target` with the optical axis as +z, image
    /// x to the right and image y pointing down (world `up` projects upward).
    static Pose LookAt(const Eigen::Ref<const Vector> &eye, const Eigen::Ref<const Vector> &target,
                       const Eigen::Ref<const Vector> &up);

    [[nodiscard]] int dim() const { return static_cast<int>(translation.size()); }
    [[nodiscard]] Vector Apply(const Eigen::Ref<const Vector> &p) const {
        return rotation * p + translation;
    }
    [[nodiscard]] double Heading() const;                   // 2D only
    [[nodiscard]] Eigen::Vector4d Quaternion() const;       // 3D only, (w, x, y, z)
    void Validate() const;
};

struct Circle {
    Vector center;  // 2D
    double radius = 1.0;
};

/// Axis-aligned box given by its center and full edge lengths.
struct Box {
    Vector center;  // 3D
    Vector size;
};

struct RayHit {
    double t = 0.0;
    Vector normal;  // outward normal of the primitive at the hit
};

/// Closed-form scene made of disjoint primitives: circles in 2D, axis-aligned
/// boxes in 3D. Disjointness keeps min-over-primitives exact inside objects.
class AnalyticScene {
public:
    AnalyticScene() = default;
    explicit AnalyticScene(int dim) : dim_(dim) {}

    void AddCircle(const Eigen::Ref<const Vector> &center, double radius);
    void AddBox(const Eigen::Ref<const Vector> &center, const Eigen::Ref<const Vector> &size);

    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] bool empty() const { return circles_.empty() && boxes_.empty(); }
    [[nodiscard]] const std::vector<Circle> &circles() const { return circles_; }
    [[nodiscard]] const std::vector<Box> &boxes() const { return boxes_; }
    void Validate() const;

    /// Nearest intersection with t > 1e-9 along a unit direction.
    [[nodiscard]] std::optional<RayHit> Intersect(const Eigen::Ref<const Vector> &origin,
                                                  const Eigen::Ref<const Vector> &direction) const;
    /// Exact unsigned distance to the nearest primitive boundary.
    [[nodiscard]] double Distance(const Eigen::Ref<const Vector> &x) const;
    [[nodiscard]] bool Inside(const Eigen::Ref<const Vector> &x) const;
    /// Closest boundary point and its outward normal.
    [[nodiscard]] std::pair<Vector, Vector> ClosestPoint(const Eigen::Ref<const Vector> &x) const;

    /// Boundary samples at roughly `spacing` with outward normals, appended
    /// row-wise to `positions` and `normals`.
    void SampleSurface(double spacing, Points &positions, Points &normals) const;

private:
    int dim_ = 2;
    std::vector<Circle> circles_;
    std::vector<Box> boxes_;
};

}  // namespace loggpis
