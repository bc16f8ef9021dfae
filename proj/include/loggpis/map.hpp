#pragma once

#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "loggpis/field.hpp"
#include "loggpis/gp.hpp"
#include "loggpis/types.hpp"

namespace loggpis {

struct SurfacePoint {
    Vector position;
    Vector normal;  // unit, pointing toward the observing sensor
    double pos_noise = 0.01;
    int obs_count = 1;
};

enum class Method { kLogGpis, kStandardGpis };
std::string_view ToString(Method method);
Method MethodFromString(std::string_view name);

/// Gradient observations attached to each surface point. kUnitNormal uses -n
/// for Log-GPIS and n for standard GPIS. kScaledNormal uses -lambda * n, kept
/// for ablation: it drives the latent mean negative on the normal side.
enum class GradientTarget { kUnitNormal, kScaledNormal, kNone };
std::string_view ToString(GradientTarget target);
GradientTarget GradientTargetFromString(std::string_view name);

/// How overlapping leaves combine. kVariance weights whole-leaf predictions
/// by inverse latent variance. kAdditive sums the terms of each leaf's own
/// points for the mean and gradient and keeps the variance-weighted variance.
enum class BlendMode { kVariance, kAdditive };
std::string_view ToString(BlendMode mode);
BlendMode BlendModeFromString(std::string_view name);

struct MapConfig {
    int dim = 2;
    Vector arena_min;
    Vector arena_max;
    KernelParams kernel;
    Method method = Method::kLogGpis;
    GradientTarget gradient_target = GradientTarget::kUnitNormal;
    FieldOptions field;
    int leaf_capacity = 40;
    double support_margin = 0.0;  // <= 0 selects 3 / lambda
    double fuse_radius = 0.015;   // 0.5 * 3 * sensor noise for 1 cm noise
    double max_fuse_angle = M_PI / 3.0;
    double min_leaf_size = 1e-3;
    BlendMode blend = BlendMode::kVariance;
    double additive_cutoff = 0.0;  // <= 0 selects 15 / lambda

    [[nodiscard]] double SupportMargin() const {
        return support_margin > 0.0 ? support_margin : 3.0 / kernel.lambda;
    }
    [[nodiscard]] double AdditiveCutoff() const {
        return additive_cutoff > 0.0 ? additive_cutoff : 15.0 / kernel.lambda;
    }
    [[nodiscard]] bool UsesGradients() const {
        return gradient_target != GradientTarget::kNone && kernel.SupportsGradients();
    }
    void Validate() const;
};

/// Inverse-variance fusion of two observations of one surface point. Returns
/// nullopt when the normals differ by more than `max_angle` (both are kept).
std::optional<SurfacePoint> FusePoint(const SurfacePoint &existing, const SurfacePoint &incoming,
                                      double max_angle = M_PI / 3.0);

struct InsertReport {
    int inserted = 0;
    int fused = 0;
    int rejected = 0;  // outside the arena or non-finite
};

struct RefitReport {
    int refit = 0;
    int failed = 0;
};

struct HealthReport {
    int leaves = 0;
    int usable = 0;
    int dirty = 0;
    int failed = 0;
    std::vector<std::string> errors;
};

/// Read-only view of one tree leaf.
struct LeafView {
    Vector box_min;
    Vector box_max;
    std::vector<int> point_ids;
    bool dirty = false;
    bool usable = false;
    std::shared_ptr<const GpModel> model;
};

/// Quadtree (2D) or octree (3D) of local GPs over a fixed arena. Writers
/// (Insert, RefitDirty) are serialised against readers by an internal
/// shared mutex; queries from many threads may run together.
class ClusterMap {
public:
    explicit ClusterMap(MapConfig config);
    ClusterMap(ClusterMap &&) noexcept;
    ClusterMap &operator=(ClusterMap &&) noexcept;
    ~ClusterMap();

    InsertReport Insert(std::span<const SurfacePoint> points);
    RefitReport RefitDirty();

    /// Blended field estimate. Throws kEmptyMap when no leaf has a model.
    [[nodiscard]] FieldEstimate Query(const Eigen::Ref<const Vector> &x,
                                      const std::optional<Vector> &sensor = std::nullopt) const;
    [[nodiscard]] LatentPrediction QueryLatent(const Eigen::Ref<const Vector> &x) const;

    /// OpenMP-parallel batch query; rows of `queries` are points.
    [[nodiscard]] std::vector<FieldEstimate> QueryBatch(const Eigen::Ref<const Points> &queries) const;
    /// Serial reference for QueryBatch.
    [[nodiscard]] std::vector<FieldEstimate> QueryBatchSerial(
        const Eigen::Ref<const Points> &queries) const;

    [[nodiscard]] const MapConfig &config() const { return config_; }
    [[nodiscard]] const std::vector<SurfacePoint> &points() const { return points_; }
    [[nodiscard]] std::vector<LeafView> Leaves() const;
    [[nodiscard]] HealthReport Health() const;
    [[nodiscard]] bool HasUsableLeaf() const;

    /// Training data a leaf model is fitted on: points inside the leaf box
    /// inflated by the support margin, sorted by position.
    [[nodiscard]] std::vector<int> SupportSet(const Eigen::Ref<const Vector> &box_min,
                                              const Eigen::Ref<const Vector> &box_max) const;
    [[nodiscard]] TrainingBlock MakeTrainingBlock(std::span<const int> ids) const;

    /// Flat text record of the config and surface points. Models are refit
    /// on load.
    void Save(const std::string &path) const;
    static ClusterMap Load(const std::string &path);
    /// Map over an already fused point set (no fusion on insert), refit.
    static ClusterMap FromPoints(MapConfig config, std::span<const SurfacePoint> points);

private:
    struct Node;
    struct Impl;

    LatentPrediction QueryLatentUnlocked(const Eigen::Ref<const Vector> &x) const;
    FieldEstimate QueryUnlocked(const Eigen::Ref<const Vector> &x,
                                const std::optional<Vector> &sensor) const;

    MapConfig config_;
    std::vector<SurfacePoint> points_;
    std::unique_ptr<Impl> impl_;
    std::unique_ptr<std::shared_mutex> mutex_;
};

}  // namespace loggpis
