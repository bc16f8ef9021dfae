#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "loggpis/field.hpp"
#include "loggpis/map.hpp"
#include "loggpis/point_index.hpp"
#include "loggpis/scene.hpp"
#include "loggpis/types.hpp"

namespace loggpis {

/// Regular lattice of sample nodes; node (i, j[, k]) sits at
/// origin + cell_size * (i, j[, k]).
struct GridSpec {
    Vector origin;
    double cell_size = 0.1;
    std::vector<int> counts;

    [[nodiscard]] int dim() const { return static_cast<int>(counts.size()); }
    [[nodiscard]] std::size_t NodeCount() const;
    [[nodiscard]] Vector NodePosition(std::size_t linear) const;
    [[nodiscard]] std::array<int, 3> NodeIndex(std::size_t linear) const;
    [[nodiscard]] std::size_t Linear(int i, int j, int k = 0) const;
    /// All node positions, one per row, x fastest.
    [[nodiscard]] Points NodePositions() const;
    /// `require_cells` asks for at least two nodes per axis.
    void Validate(bool require_cells = true) const;
};

/// One signed-field sample. `gradient` is the signed-distance gradient,
/// pointing toward the positive (free-space) side.
struct SignedSample {
    double distance = 0.0;  // magnitude, >= 0
    Sign sign = Sign::kUnknown;
    Vector gradient;
    bool gradient_defined = false;
    double variance = 0.0;

    [[nodiscard]] double value() const { return sign == Sign::kNegative ? -distance : distance; }
};

class SignedField {
public:
    virtual ~SignedField() = default;
    [[nodiscard]] virtual int dim() const = 0;
    [[nodiscard]] virtual SignedSample Sample(const Eigen::Ref<const Vector> &x) const = 0;
    /// Defaults to an OpenMP loop over Sample.
    [[nodiscard]] virtual std::vector<SignedSample> SampleBatch(const Points &xs) const;
};

/// Signed view of a map. The sign at x is the side of the nearest stored
/// surface point p, sign((x - p) . n_p), normals pointing at the observing
/// sensor. When that is inconclusive the sensor nearest to the estimated
/// foot point x - d * grad d decides. Clamped samples get no sign. Where the
/// latent mean exceeds one (just behind the observed surface) the value is
/// -ln(f) / lambda.
class MapSignedField : public SignedField {
public:
    MapSignedField(const ClusterMap &map, std::vector<Vector> sensors);
    [[nodiscard]] int dim() const override { return map_.config().dim; }
    [[nodiscard]] SignedSample Sample(const Eigen::Ref<const Vector> &x) const override;
    [[nodiscard]] std::vector<SignedSample> SampleBatch(const Points &xs) const override;

private:
    [[nodiscard]] SignedSample FromEstimate(const Eigen::Ref<const Vector> &x,
                                            const FieldEstimate &est) const;

    const ClusterMap &map_;
    std::vector<Vector> sensors_;
    std::unique_ptr<PointIndex> points_;
};

/// Exact signed distance of an analytic scene (negative inside primitives).
class SceneSignedField : public SignedField {
public:
    explicit SceneSignedField(const AnalyticScene &scene) : scene_(scene) {}
    [[nodiscard]] int dim() const override { return scene_.dim(); }
    [[nodiscard]] SignedSample Sample(const Eigen::Ref<const Vector> &x) const override;

private:
    const AnalyticScene &scene_;
};

/// Adapter for closed-form fields given as value and gradient callbacks.
class FunctionSignedField : public SignedField {
public:
    using ValueFn = std::function<double(const Vector &)>;
    using GradFn = std::function<Vector(const Vector &)>;
    FunctionSignedField(int dim, ValueFn value, GradFn gradient)
        : dim_(dim), value_(std::move(value)), gradient_(std::move(gradient)) {}
    [[nodiscard]] int dim() const override { return dim_; }
    [[nodiscard]] SignedSample Sample(const Eigen::Ref<const Vector> &x) const override;

private:
    int dim_;
    ValueFn value_;
    GradFn gradient_;
};

struct SignedGrid {
    GridSpec grid;
    std::vector<SignedSample> samples;  // every sign resolved
    std::size_t propagated = 0;         // signs taken from neighbours
    std::size_t defaulted = 0;          // signs left unknown, set positive

    [[nodiscard]] double Value(std::size_t linear) const { return samples[linear].value(); }
};

/// Samples every node and resolves unknown signs by the majority of defined
/// axis neighbours, iterated synchronously to a fixpoint.
SignedGrid SampleSignedGrid(const SignedField &field, const GridSpec &grid);
SignedGrid SampleSignedGrid(const ClusterMap &map, const GridSpec &grid,
                            const std::vector<Pose> &sensor_track);

struct Mesh {
    Points vertices;
    std::vector<std::array<int, 3>> faces;     // 3D triangles
    std::vector<std::array<int, 2>> segments;  // 2D polyline pieces
    Vector vertex_variance;

    [[nodiscard]] int dim() const { return static_cast<int>(vertices.cols()); }
    [[nodiscard]] bool empty() const { return faces.empty() && segments.empty(); }
};

struct ExtractOptions {
    /// One Newton step along each crossing edge using the sampled gradient.
    bool hermite = true;
};

/// Zero-level set of a signed field: marching squares in 2D, marching cubes
/// in 3D. Ambiguous faces are split with the asymptotic decider, so adjacent
/// cells agree and closed surfaces come out watertight.
Mesh ExtractIso(const SignedField &field, const GridSpec &grid, const ExtractOptions &options = {});
Mesh ExtractIso(const ClusterMap &map, const GridSpec &grid, const std::vector<Pose> &sensor_track,
                const ExtractOptions &options = {});

/// Chains 2D segments into polylines of vertex indices.
std::vector<std::vector<int>> ChainPolylines(const Mesh &mesh);

void WriteContourCsv(const std::string &path, const Mesh &mesh);
void WriteMeshPly(const std::string &path, const Mesh &mesh);

}  // namespace loggpis
