#pragma once

#include <limits>
#include <memory>
#include <span>
#include <optional>
#include <string>
#include <vector>

#include "loggpis/map.hpp"
#include "loggpis/point_index.hpp"
#include "loggpis/scene.hpp"
#include "loggpis/surface.hpp"
#include "loggpis/types.hpp"

namespace loggpis {

/// Exact closed-form distance from each query row to the scene boundary.
std::vector<double> OracleEdf(const AnalyticScene &scene, const Eigen::Ref<const Points> &queries);

/// Exact nearest-neighbour distance to a dense point cloud (R-tree search).
class CloudOracle {
public:
    explicit CloudOracle(Points cloud);
    CloudOracle(CloudOracle &&) noexcept;
    CloudOracle &operator=(CloudOracle &&) noexcept;
    ~CloudOracle();

    [[nodiscard]] int dim() const { return index_->dim(); }
    [[nodiscard]] double Distance(const Eigen::Ref<const Vector> &x) const;
    [[nodiscard]] std::vector<double> Distances(const Eigen::Ref<const Points> &queries) const;
    /// Pairwise scan over the whole cloud, the reference for Distance.
    [[nodiscard]] double BruteForce(const Eigen::Ref<const Vector> &x) const;

private:
    std::unique_ptr<PointIndex> index_;
};

/// Standard GPIS over the same surface points: targets 0 and n, raw
/// predictive mean as the distance.
ClusterMap MakeStandardGpis(const ClusterMap &reference);
std::vector<double> StandardGpisBaseline(std::span<const SurfacePoint> points, const MapConfig &config,
                                         const Eigen::Ref<const Points> &queries);

struct MetricsReport {
    std::string method;
    double rmse = 0.0;
    double mean_abs_err = 0.0;
    double eikonal_p95 = 0.0;  // 95th percentile of | |grad d| - 1 |
    double clamp_fraction = 0.0;
    std::size_t nodes = 0;
    std::size_t evaluated = 0;  // nodes entering the error metrics
    double build_seconds = 0.0;
    double query_us_per_point = 0.0;
    std::string csv_path;
};

struct NodeRecord {
    Vector position;
    double truth = 0.0;
    double estimate = 0.0;
    double variance = 0.0;
    double grad_norm = 0.0;  // |grad d| by finite differences, NaN where unavailable
    bool clamped = false;
    bool used = false;
};

struct SliceOptions {
    /// Restricts the metrics to these nodes when set (same order as the grid).
    std::optional<std::vector<bool>> mask;
    /// Only nodes whose true distance is at most this enter the metrics.
    double max_truth = std::numeric_limits<double>::infinity();
    double min_truth = 0.0;
    /// Central-difference step for |grad d|; <= 0 differences grid neighbours.
    double eikonal_step = 0.01;
    std::string csv_path;  // per-node CSV, skipped when empty
};

struct SliceResult {
    MetricsReport report;
    std::vector<NodeRecord> nodes;
};

/// Queries every grid node and compares |distance| with the exact EDF.
/// Clamped nodes are excluded from the errors and counted in clamp_fraction.
SliceResult EvaluateSlice(const ClusterMap &map, const AnalyticScene &scene, const GridSpec &grid,
                          const SliceOptions &options = {});

/// Finite-difference gradient norms of the estimated distance at interior
/// nodes where the node and its axis neighbours are all unclamped; NaN
/// elsewhere. Axes with a single node are ignored.
std::vector<double> GradientNorms(const GridSpec &grid, const std::vector<NodeRecord> &nodes);

/// |grad d| by central differences of the map distance with the given step
/// on every axis; NaN where any stencil sample is clamped.
std::vector<double> StencilGradientNorms(const ClusterMap &map, const Eigen::Ref<const Points> &queries,
                                         double step);

struct MeshErrorReport {
    std::vector<double> errors;
    std::vector<std::size_t> histogram;  // 1 mm bins
    double median = 0.0;
    double p95 = 0.0;
    double spearman = 0.0;  // vertex variance against error
};

MeshErrorReport MeshError(const Mesh &mesh, const AnalyticScene &truth);
MeshErrorReport MeshError(const Mesh &mesh, const CloudOracle &truth);

/// Spearman rank correlation with average ranks for ties.
double Spearman(const std::vector<double> &a, const std::vector<double> &b);
double Percentile(std::vector<double> values, double q);

/// Symmetric Hausdorff distance between the segments of a 2D contour and a
/// circle, the circle side sampled every 0.1 mrad.
double HausdorffToCircle(const Mesh &mesh, const Eigen::Ref<const Vector> &center, double radius);

void WriteReportJson(const std::string &path, const std::vector<MetricsReport> &reports);
void WriteHistogramCsv(const std::string &path, const MeshErrorReport &report);

}  // namespace loggpis
