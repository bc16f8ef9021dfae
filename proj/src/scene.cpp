#include "loggpis/scene.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Geometry>

#include "loggpis/error.hpp"

namespace loggpis {

Pose Pose::Identity(int dim) {
    return {Matrix::Identity(dim, dim), Vector::Zero(dim)};
}

Pose Pose::FromHeading(double tx, double ty, double heading) {
    Pose pose;
    pose.rotation = Eigen::Rotation2Dd(heading).toRotationMatrix();
    pose.translation = Eigen::Vector2d(tx, ty);
    return pose;
}

Pose Pose::FromQuaternion(const Eigen::Ref<const Vector> &translation, double qw, double qx,
                          double qy, double qz) {
    if (translation.size() != 3) throw Error(ErrorCode::kDimensionMismatch, "quaternion pose is 3D");
    Eigen::Quaterniond q(qw, qx, qy, qz);
    if (!(q.norm() > 0.0)) throw Error(ErrorCode::kInvalidInput, "zero quaternion");
    q.normalize();
    return {q.toRotationMatrix(), translation};
}

Pose Pose::LookAt(const Eigen::Ref<const Vector> &eye, const Eigen::Ref<const Vector> &target,
                  const Eigen::Ref<const Vector> &up) {
    if (eye.size() != 3 || target.size() != 3 || up.size() != 3) {
        throw Error(ErrorCode::kDimensionMismatch, "LookAt is 3D");
    }
    const Eigen::Vector3d z = (target - eye).normalized();
    Eigen::Vector3d x = z.cross(Eigen::Vector3d(up)).normalized();
    if (!x.allFinite() || x.norm() < 0.5) {
        throw Error(ErrorCode::kInvalidInput, "LookAt: up vector parallel to viewing direction");
    }
    const Eigen::Vector3d y = z.cross(x);
    Pose pose;
    pose.rotation.resize(3, 3);
    pose.rotation.col(0) = x;
    pose.rotation.col(1) = y;
    pose.rotation.col(2) = z;
    pose.translation = eye;
    return pose;
}

double Pose::Heading() const {
    return std::atan2(rotation(1, 0), rotation(0, 0));
}

Eigen::Vector4d Pose::Quaternion() const {
    Eigen::Quaterniond q{Eigen::Matrix3d(rotation)};
    q.normalize();
    if (q.w() < 0.0) q.coeffs() *= -1.0;
    return {q.w(), q.x(), q.y(), q.z()};
}

void Pose::Validate() const {
    const int d = dim();
    if (!IsSupportedDim(d) || rotation.rows() != d || rotation.cols() != d) {
        throw Error(ErrorCode::kDimensionMismatch, "pose rotation must be D x D with D in {2, 3}");
    }
    if (!(rotation.transpose() * rotation - Matrix::Identity(d, d)).isZero(1e-9) ||
        std::abs(rotation.determinant() - 1.0) > 1e-9) {
        throw Error(ErrorCode::kInvalidInput, "pose rotation is not a proper rotation");
    }
}

void AnalyticScene::AddCircle(const Eigen::Ref<const Vector> &center, double radius) {
    if (dim_ != 2 || center.size() != 2) throw Error(ErrorCode::kDimensionMismatch, "circles are 2D");
    if (!(radius > 0.0)) throw Error(ErrorCode::kInvalidInput, "circle radius must be positive");
    circles_.push_back({center, radius});
}

void AnalyticScene::AddBox(const Eigen::Ref<const Vector> &center,
                           const Eigen::Ref<const Vector> &size) {
    if (dim_ != 3 || center.size() != 3 || size.size() != 3) {
        throw Error(ErrorCode::kDimensionMismatch, "boxes are 3D");
    }
    if ((size.array() <= 0.0).any()) throw Error(ErrorCode::kInvalidInput, "box size must be positive");
    boxes_.push_back({center, size});
}

void AnalyticScene::Validate() const {
    if (empty()) throw Error(ErrorCode::kInvalidInput, "scene has no primitives");
}

namespace {

std::optional<RayHit> IntersectCircle(const Circle &c, const Eigen::Ref<const Vector> &o,
                                      const Eigen::Ref<const Vector> &d) {
    const Eigen::Vector2d oc = o - c.center;
    const double b = oc.dot(d);
    const double cc = oc.squaredNorm() - c.radius * c.radius;
    const double disc = b * b - cc;
    if (disc < 0.0) return std::nullopt;
    const double s = std::sqrt(disc);
    for (double t : {-b - s, -b + s}) {
        if (t > 1e-9) {
            Vector n = (o + t * d - c.center) / c.radius;
            return RayHit{t, n};
        }
    }
    return std::nullopt;
}

std::optional<RayHit> IntersectBox(const Box &box, const Eigen::Ref<const Vector> &o,
                                   const Eigen::Ref<const Vector> &d) {
    double t_near = -std::numeric_limits<double>::infinity();
    double t_far = std::numeric_limits<double>::infinity();
    int axis_near = -1;
    int axis_far = -1;
    for (int a = 0; a < 3; ++a) {
        const double lo = box.center(a) - 0.5 * box.size(a);
        const double hi = box.center(a) + 0.5 * box.size(a);
        if (d(a) == 0.0) {
            if (o(a) < lo || o(a) > hi) return std::nullopt;
            continue;
        }
        double t0 = (lo - o(a)) / d(a);
        double t1 = (hi - o(a)) / d(a);
        if (t0 > t1) std::swap(t0, t1);
        if (t0 > t_near) {
            t_near = t0;
            axis_near = a;
        }
        if (t1 < t_far) {
            t_far = t1;
            axis_far = a;
        }
    }
    if (t_near > t_far) return std::nullopt;
    double t;
    int axis;
    if (t_near > 1e-9) {
        t = t_near;
        axis = axis_near;
    } else if (t_far > 1e-9) {
        t = t_far;
        axis = axis_far;
    } else {
        return std::nullopt;
    }
    Vector n = Vector::Zero(3);
    const double hit = o(axis) + t * d(axis);
    n(axis) = hit > box.center(axis) ? 1.0 : -1.0;
    return RayHit{t, n};
}

// Signed distance to an axis-aligned box (negative inside) and its gradient.
double BoxSdf(const Box &box, const Eigen::Ref<const Vector> &x, Vector *closest, Vector *normal) {
    const Eigen::Vector3d half = 0.5 * box.size;
    const Eigen::Vector3d local = x - box.center;
    const Eigen::Vector3d q = local.cwiseAbs() - half;
    if ((q.array() > 0.0).any()) {
        const Eigen::Vector3d outside = q.cwiseMax(0.0);
        Eigen::Vector3d c = local.cwiseMax(-half).cwiseMin(half);
        if (closest) *closest = c + Eigen::Vector3d(box.center);
        if (normal) *normal = (local - c).normalized();
        return outside.norm();
    }
    int axis = 0;
    q.maxCoeff(&axis);
    if (closest) {
        Eigen::Vector3d c = local;
        c(axis) = local(axis) >= 0.0 ? half(axis) : -half(axis);
        *closest = c + Eigen::Vector3d(box.center);
    }
    if (normal) {
        *normal = Vector::Zero(3);
        (*normal)(axis) = local(axis) >= 0.0 ? 1.0 : -1.0;
    }
    return q(axis);
}

}  // namespace

std::optional<RayHit> AnalyticScene::Intersect(const Eigen::Ref<const Vector> &origin,
                                               const Eigen::Ref<const Vector> &direction) const {
    std::optional<RayHit> best;
    for (const auto &c : circles_) {
        auto hit = IntersectCircle(c, origin, direction);
        if (hit && (!best || hit->t < best->t)) best = std::move(hit);
    }
    for (const auto &b : boxes_) {
        auto hit = IntersectBox(b, origin, direction);
        if (hit && (!best || hit->t < best->t)) best = std::move(hit);
    }
    return best;
}

double AnalyticScene::Distance(const Eigen::Ref<const Vector> &x) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto &c : circles_) best = std::min(best, std::abs((x - c.center).norm() - c.radius));
    for (const auto &b : boxes_) best = std::min(best, std::abs(BoxSdf(b, x, nullptr, nullptr)));
    return best;
}

bool AnalyticScene::Inside(const Eigen::Ref<const Vector> &x) const {
    for (const auto &c : circles_) {
        if ((x - c.center).norm() < c.radius) return true;
    }
    for (const auto &b : boxes_) {
        if (BoxSdf(b, x, nullptr, nullptr) < 0.0) return true;
    }
    return false;
}

std::pair<Vector, Vector> AnalyticScene::ClosestPoint(const Eigen::Ref<const Vector> &x) const {
    double best = std::numeric_limits<double>::infinity();
    std::pair<Vector, Vector> out;
    for (const auto &c : circles_) {
        const Vector rel = x - c.center;
        const double d = std::abs(rel.norm() - c.radius);
        if (d < best) {
            best = d;
            const Vector dir = rel.norm() > 0.0 ? Vector(rel.normalized()) : Vector::Unit(2, 0);
            out = {c.center + c.radius * dir, dir};
        }
    }
    for (const auto &b : boxes_) {
        Vector closest, normal;
        const double d = std::abs(BoxSdf(b, x, &closest, &normal));
        if (d < best) {
            best = d;
            out = {closest, normal};
        }
    }
    return out;
}

void AnalyticScene::SampleSurface(double spacing, Points &positions, Points &normals) const {
    if (!(spacing > 0.0)) throw Error(ErrorCode::kInvalidInput, "sample spacing must be positive");
    std::vector<Vector> pos, nor;
    for (const auto &c : circles_) {
        const int n = std::max(8, static_cast<int>(std::ceil(2.0 * M_PI * c.radius / spacing)));
        for (int i = 0; i < n; ++i) {
            const double a = 2.0 * M_PI * i / n;
            const Eigen::Vector2d dir(std::cos(a), std::sin(a));
            pos.emplace_back(c.center + c.radius * dir);
            nor.emplace_back(dir);
        }
    }
    for (const auto &b : boxes_) {
        for (int axis = 0; axis < 3; ++axis) {
            const int u = (axis + 1) % 3;
            const int v = (axis + 2) % 3;
            const int nu = std::max(2, static_cast<int>(std::ceil(b.size(u) / spacing)));
            const int nv = std::max(2, static_cast<int>(std::ceil(b.size(v) / spacing)));
            for (double side : {-1.0, 1.0}) {
                // Cell-centred samples keep edges shared by two faces unsampled.
                for (int i = 0; i < nu; ++i) {
                    for (int j = 0; j < nv; ++j) {
                        Vector p = b.center;
                        p(axis) += side * 0.5 * b.size(axis);
                        p(u) += ((i + 0.5) / nu - 0.5) * b.size(u);
                        p(v) += ((j + 0.5) / nv - 0.5) * b.size(v);
                        Vector n = Vector::Zero(3);
                        n(axis) = side;
                        pos.push_back(std::move(p));
                        nor.push_back(std::move(n));
                    }
                }
            }
        }
    }
    const Eigen::Index base = positions.rows();
    positions.conservativeResize(base + static_cast<Eigen::Index>(pos.size()), dim_);
    normals.conservativeResize(base + static_cast<Eigen::Index>(nor.size()), dim_);
    for (std::size_t i = 0; i < pos.size(); ++i) {
        positions.row(base + static_cast<Eigen::Index>(i)) = pos[i].transpose();
        normals.row(base + static_cast<Eigen::Index>(i)) = nor[i].transpose();
    }
}

}  // namespace loggpis
