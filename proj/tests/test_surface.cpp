#include <doctest.h>

#include <map>

#include <Eigen/Geometry>

#include "loggpis/scenario.hpp"
#include "loggpis/surface.hpp"

using namespace loggpis;

namespace {

FunctionSignedField Sphere(int dim, double radius) {
    return FunctionSignedField(
        dim, [radius](const Vector &x) { return x.norm() - radius; },
        [](const Vector &x) -> Vector { return x.normalized(); });
}

GridSpec CubeGrid(int dim, double half, double cell) {
    GridSpec g;
    g.origin = Vector::Constant(dim, -half);
    g.cell_size = cell;
    const int n = static_cast<int>(std::lround(2 * half / cell)) + 1;
    g.counts.assign(static_cast<std::size_t>(dim), n);
    return g;
}

double MaxRadiusError(const Mesh &mesh, double radius) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < mesh.vertices.rows(); ++i)
        worst = std::max(worst, std::abs(mesh.vertices.row(i).norm() - radius));
    return worst;
}

}  // namespace

TEST_CASE("grid indexing") {
    GridSpec g;
    g.origin = Vector::Zero(3);
    g.cell_size = 0.5;
    g.counts = {3, 4, 5};
    CHECK(g.NodeCount() == 60);
    const std::size_t lin = g.Linear(2, 1, 3);
    CHECK(lin == 2 + 3 * (1 + 4 * 3));
    CHECK(g.NodeIndex(lin) == std::array<int, 3>{2, 1, 3});
    CHECK(g.NodePosition(lin)(2) == doctest::Approx(1.5));
    CHECK(g.NodePositions().rows() == 60);
}

TEST_CASE("sphere mesh") {
    const double radius = 0.73;
    const double cell = 0.1;
    const auto field = Sphere(3, radius);
    const GridSpec grid = CubeGrid(3, 1.0, cell);
    const Mesh mesh = ExtractIso(field, grid);
    REQUIRE_FALSE(mesh.empty());
    CHECK(MaxRadiusError(mesh, radius) < 0.1 * cell);

    // watertight: every undirected edge is used by exactly two triangles,
    // once in each direction
    std::map<std::pair<int, int>, int> directed;
    for (const auto &f : mesh.faces) {
        for (int e = 0; e < 3; ++e) ++directed[{f[e], f[(e + 1) % 3]}];
    }
    bool closed = true;
    for (const auto &[edge, count] : directed) {
        if (count != 1) closed = false;
        const auto it = directed.find({edge.second, edge.first});
        if (it == directed.end() || it->second != 1) closed = false;
    }
    CHECK(closed);

    // outward orientation
    int outward = 0;
    for (const auto &f : mesh.faces) {
        const Eigen::Vector3d a = mesh.vertices.row(f[0]).transpose();
        const Eigen::Vector3d b = mesh.vertices.row(f[1]).transpose();
        const Eigen::Vector3d c = mesh.vertices.row(f[2]).transpose();
        if ((b - a).cross(c - a).dot(a + b + c) > 0.0) ++outward;
    }
    CHECK(outward == static_cast<int>(mesh.faces.size()));
}

TEST_CASE("hermite refinement is not worse than linear") {
    const auto field = Sphere(3, 0.61);
    const GridSpec grid = CubeGrid(3, 1.0, 0.2);
    ExtractOptions linear;
    linear.hermite = false;
    const double e_lin = MaxRadiusError(ExtractIso(field, grid, linear), 0.61);
    const double e_her = MaxRadiusError(ExtractIso(field, grid), 0.61);
    CHECK(e_her <= e_lin + 1e-12);
}

TEST_CASE("circle contour") {
    const auto field = Sphere(2, 0.55);
    const Mesh mesh = ExtractIso(field, CubeGrid(2, 1.0, 0.1));
    REQUIRE_FALSE(mesh.segments.empty());
    CHECK(mesh.faces.empty());
    CHECK(MaxRadiusError(mesh, 0.55) < 0.01);
    const auto loops = ChainPolylines(mesh);
    REQUIRE(loops.size() == 1);
    CHECK(loops[0].front() == loops[0].back());
}

TEST_CASE("extraction is deterministic") {
    const auto field = Sphere(3, 0.47);
    const GridSpec grid = CubeGrid(3, 0.8, 0.1);
    const Mesh a = ExtractIso(field, grid);
    const Mesh b = ExtractIso(field, grid);
    CHECK(a.vertices == b.vertices);
    CHECK(a.faces == b.faces);
}

TEST_CASE("no crossing gives an empty mesh") {
    const FunctionSignedField positive(
        3, [](const Vector &x) { return 1.0 + x.squaredNorm(); },
        [](const Vector &x) -> Vector { return 2.0 * x; });
    CHECK(ExtractIso(positive, CubeGrid(3, 0.5, 0.25)).empty());
}

TEST_CASE("sign propagation fills unknown nodes") {
    // Unknown signs inside the unit disc take the neighbours' sign.
    class Holey : public SignedField {
    public:
        [[nodiscard]] int dim() const override { return 2; }
        [[nodiscard]] SignedSample Sample(const Eigen::Ref<const Vector> &x) const override {
            SignedSample s;
            s.distance = std::abs(x.norm() - 2.0);
            s.sign = x.norm() < 1.0 ? Sign::kUnknown : (x.norm() < 2.0 ? Sign::kNegative : Sign::kPositive);
            s.gradient = Vector::Zero(2);
            return s;
        }
    };
    const SignedGrid g = SampleSignedGrid(Holey{}, CubeGrid(2, 3.0, 0.25));
    CHECK(g.propagated > 0);
    CHECK(g.defaulted == 0);
    for (std::size_t i = 0; i < g.samples.size(); ++i) {
        if (g.grid.NodePosition(i).norm() < 1.0) CHECK(g.samples[i].sign == Sign::kNegative);
    }
}

TEST_CASE("map signs on the circle scenario") {
    ScenarioConfig cfg = LoadScenario(LOGGPIS_SOURCE_DIR "/configs/circle.cfg");
    const FrameSet frames = SimulateFrames(cfg);
    const ClusterMap map = BuildMap(cfg.map, FramePoints(cfg, frames), false);
    const SignedGrid sg = SampleSignedGrid(map, cfg.grid, cfg.poses);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < sg.samples.size(); ++i) {
        const bool inside = cfg.scene.Inside(sg.grid.NodePosition(i));
        if (inside == (sg.samples[i].sign == Sign::kNegative)) ++agree;
    }
    CHECK(static_cast<double>(agree) >= 0.99 * static_cast<double>(sg.samples.size()));
}
