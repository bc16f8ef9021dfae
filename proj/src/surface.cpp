#include "loggpis/surface.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <unordered_map>

#include <Eigen/Geometry>

#include "loggpis/error.hpp"
#include "loggpis/ply.hpp"

namespace loggpis {

std::size_t GridSpec::NodeCount() const {
    std::size_t n = 1;
    for (int c : counts) n *= static_cast<std::size_t>(std::max(c, 0));
    return n;
}

std::array<int, 3> GridSpec::NodeIndex(std::size_t linear) const {
    std::array<int, 3> idx{0, 0, 0};
    for (int a = 0; a < dim(); ++a) {
        const auto c = static_cast<std::size_t>(counts[static_cast<std::size_t>(a)]);
        idx[static_cast<std::size_t>(a)] = static_cast<int>(linear % c);
        linear /= c;
    }
    return idx;
}

std::size_t GridSpec::Linear(int i, int j, int k) const {
    const auto nx = static_cast<std::size_t>(counts[0]);
    const auto ny = static_cast<std::size_t>(counts[1]);
    return static_cast<std::size_t>(i) +
           nx * (static_cast<std::size_t>(j) + ny * static_cast<std::size_t>(k));
}

Vector GridSpec::NodePosition(std::size_t linear) const {
    const auto idx = NodeIndex(linear);
    Vector p(dim());
    for (int a = 0; a < dim(); ++a) p(a) = origin(a) + cell_size * idx[static_cast<std::size_t>(a)];
    return p;
}

Points GridSpec::NodePositions() const {
    const std::size_t n = NodeCount();
    Points out(static_cast<Eigen::Index>(n), dim());
    for (std::size_t i = 0; i < n; ++i) out.row(static_cast<Eigen::Index>(i)) = NodePosition(i);
    return out;
}

void GridSpec::Validate(bool require_cells) const {
    if (!IsSupportedDim(dim())) {
        throw Error(ErrorCode::kDimensionMismatch, "grid must be 2D or 3D");
    }
    if (origin.size() != dim()) {
        throw Error(ErrorCode::kDimensionMismatch, "grid origin does not match grid dimension");
    }
    if (!origin.allFinite() || !(cell_size > 0.0) || !std::isfinite(cell_size)) {
        throw Error(ErrorCode::kInvalidInput, "grid needs a finite origin and cell size > 0");
    }
    for (int c : counts) {
        if (c < (require_cells ? 2 : 1)) {
            throw Error(ErrorCode::kInvalidInput, "grid needs at least two nodes per axis");
        }
    }
}

std::vector<SignedSample> SignedField::SampleBatch(const Points &xs) const {
    std::vector<SignedSample> out(static_cast<std::size_t>(xs.rows()));
    const auto n = static_cast<long>(xs.rows());
#pragma omp parallel for schedule(dynamic, 64)
    for (long i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = Sample(xs.row(i).transpose());
    }
    return out;
}

MapSignedField::MapSignedField(const ClusterMap &map, std::vector<Vector> sensors)
    : map_(map), sensors_(std::move(sensors)) {
    for (const Vector &s : sensors_) {
        if (s.size() != map_.config().dim) {
            throw Error(ErrorCode::kDimensionMismatch, "sensor position dimension mismatch");
        }
    }
    const auto &pts = map_.points();
    if (!pts.empty()) {
        Points cloud(static_cast<Eigen::Index>(pts.size()), map_.config().dim);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            cloud.row(static_cast<Eigen::Index>(i)) = pts[i].position.transpose();
        }
        points_ = std::make_unique<PointIndex>(std::move(cloud));
    }
}

SignedSample MapSignedField::FromEstimate(const Eigen::Ref<const Vector> &x,
                                          const FieldEstimate &est) const {
    SignedSample s;
    s.variance = est.variance;
    s.gradient_defined = est.gradient_defined;
    if (map_.config().method == Method::kStandardGpis) {
        s.distance = est.distance;
        s.sign = est.sign;
        s.gradient = est.sign == Sign::kNegative ? Vector(-est.gradient) : est.gradient;
        if (s.sign == Sign::kUnknown) s.sign = Sign::kPositive;  // mean exactly zero
        return s;
    }
    if (est.latent_mean > 1.0) {
        // Behind the observed surface the latent overshoots its surface value.
        s.distance = std::log(est.latent_mean) / map_.config().kernel.lambda;
        s.sign = Sign::kNegative;
        s.gradient = est.gradient;
        return s;
    }
    s.distance = est.distance;
    s.gradient = est.gradient;
    // Below the latent floor the gradient direction carries no signal; the
    // sign is left to neighbour propagation.
    if (est.clamped) return s;
    if (points_) {
        const SurfacePoint &p = map_.points()[static_cast<std::size_t>(points_->Nearest(x))];
        const Vector offset = x - p.position;
        const double side = offset.dot(p.normal);
        // Off the normal axis, past convex edges, the side test is unreliable.
        if (std::abs(side) > 1e-9 && std::abs(side) >= 0.5 * offset.norm()) {
            s.sign = side > 0.0 ? Sign::kPositive : Sign::kNegative;
            if (s.sign == Sign::kNegative) s.gradient = -s.gradient;
            return s;
        }
    }
    if (!est.gradient_defined || sensors_.empty()) return s;
    const Vector foot = x - est.distance * est.gradient;
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sensors_.size(); ++i) {
        const double d2 = (sensors_[i] - foot).squaredNorm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    // Tested at the foot point, so queries beyond the sensor keep their side.
    s.sign = RecoverSign(foot, est.gradient, sensors_[best]);
    if (s.sign == Sign::kNegative) s.gradient = -s.gradient;
    return s;
}

SignedSample MapSignedField::Sample(const Eigen::Ref<const Vector> &x) const {
    return FromEstimate(x, map_.Query(x));
}

std::vector<SignedSample> MapSignedField::SampleBatch(const Points &xs) const {
    const std::vector<FieldEstimate> est = map_.QueryBatch(xs);
    std::vector<SignedSample> out(est.size());
    for (std::size_t i = 0; i < est.size(); ++i) {
        out[i] = FromEstimate(xs.row(static_cast<Eigen::Index>(i)).transpose(), est[i]);
    }
    return out;
}

SignedSample SceneSignedField::Sample(const Eigen::Ref<const Vector> &x) const {
    SignedSample s;
    s.distance = scene_.Distance(x);
    s.sign = scene_.Inside(x) ? Sign::kNegative : Sign::kPositive;
    auto [closest, normal] = scene_.ClosestPoint(x);
    (void)closest;
    s.gradient = normal;
    s.gradient_defined = normal.size() == x.size() && normal.norm() > 0.0;
    return s;
}

SignedSample FunctionSignedField::Sample(const Eigen::Ref<const Vector> &x) const {
    const Vector p = x;
    const double v = value_(p);
    SignedSample s;
    s.distance = std::abs(v);
    s.sign = v < 0.0 ? Sign::kNegative : Sign::kPositive;
    if (gradient_) {
        s.gradient = gradient_(p);
        s.gradient_defined = s.gradient.size() == dim_ && s.gradient.allFinite();
    }
    return s;
}

namespace {

std::vector<Vector> SensorPositions(const std::vector<Pose> &track) {
    std::vector<Vector> out;
    out.reserve(track.size());
    for (const Pose &p : track) out.push_back(p.translation);
    return out;
}

// Calls fn(neighbour) for every axis neighbour of node `linear`.
template <typename Fn>
void ForEachNeighbour(const GridSpec &grid, std::size_t linear, Fn &&fn) {
    const auto idx = grid.NodeIndex(linear);
    std::size_t stride = 1;
    for (int a = 0; a < grid.dim(); ++a) {
        const int i = idx[static_cast<std::size_t>(a)];
        if (i > 0) fn(linear - stride);
        if (i + 1 < grid.counts[static_cast<std::size_t>(a)]) fn(linear + stride);
        stride *= static_cast<std::size_t>(grid.counts[static_cast<std::size_t>(a)]);
    }
}

bool Negative(double v) { return v < 0.0; }

}  // namespace

SignedGrid SampleSignedGrid(const SignedField &field, const GridSpec &grid) {
    grid.Validate(false);
    if (field.dim() != grid.dim()) {
        throw Error(ErrorCode::kDimensionMismatch, "field and grid dimensions differ");
    }
    SignedGrid out;
    out.grid = grid;
    out.samples = field.SampleBatch(grid.NodePositions());

    const std::size_t n = out.samples.size();
    std::vector<std::size_t> unknown;
    for (std::size_t i = 0; i < n; ++i) {
        if (out.samples[i].sign == Sign::kUnknown) unknown.push_back(i);
    }
    // Synchronous rounds keep the result independent of visiting order.
    while (!unknown.empty()) {
        std::vector<std::pair<std::size_t, Sign>> decided;
        std::vector<std::size_t> still;
        for (std::size_t u : unknown) {
            int votes = 0;
            int known = 0;
            ForEachNeighbour(grid, u, [&](std::size_t v) {
                const Sign s = out.samples[v].sign;
                if (s == Sign::kUnknown) return;
                ++known;
                votes += static_cast<int>(s);
            });
            if (known == 0) {
                still.push_back(u);
            } else {
                decided.emplace_back(u, votes < 0 ? Sign::kNegative : Sign::kPositive);
            }
        }
        if (decided.empty()) break;
        for (const auto &[u, s] : decided) out.samples[u].sign = s;
        out.propagated += decided.size();
        unknown = std::move(still);
    }
    for (std::size_t u : unknown) out.samples[u].sign = Sign::kPositive;
    out.defaulted = unknown.size();
    return out;
}

SignedGrid SampleSignedGrid(const ClusterMap &map, const GridSpec &grid,
                            const std::vector<Pose> &sensor_track) {
    MapSignedField field(map, SensorPositions(sensor_track));
    return SampleSignedGrid(field, grid);
}

namespace {

// Marching squares on one face. `corners` are node ids in counter-clockwise
// order seen from the side the face is viewed from; edge e joins corner e and
// corner e + 1. Emits (from_edge, to_edge) pairs with the negative region on
// the left of each segment.
void FaceSegments(const std::array<double, 4> &v, std::vector<std::array<int, 2>> &out) {
    std::array<int, 4> exits{};
    std::array<int, 4> entries{};
    int n_exit = 0;
    int n_entry = 0;
    for (int e = 0; e < 4; ++e) {
        const bool a = Negative(v[static_cast<std::size_t>(e)]);
        const bool b = Negative(v[static_cast<std::size_t>((e + 1) % 4)]);
        if (a && !b) exits[static_cast<std::size_t>(n_exit++)] = e;
        if (!a && b) entries[static_cast<std::size_t>(n_entry++)] = e;
    }
    if (n_exit == 0) return;
    if (n_exit == 1) {
        out.push_back({exits[0], entries[0]});
        return;
    }
    // Saddle: bilinear value at the asymptotic centre decides whether the
    // negative corners connect through the face.
    const double denom = v[0] + v[2] - v[1] - v[3];
    const double saddle = denom == 0.0 ? 0.25 * (v[0] + v[1] + v[2] + v[3])
                                       : (v[0] * v[2] - v[1] * v[3]) / denom;
    const bool connected = Negative(saddle);
    for (int k = 0; k < 2; ++k) {
        const int exit = exits[static_cast<std::size_t>(k)];
        // Entry edges lie one step before (cutting off the negative corner)
        // or one step after (cutting off the positive corner) the exit.
        const int entry = connected ? (exit + 1) % 4 : (exit + 3) % 4;
        out.push_back({exit, entry});
    }
}

struct EdgeVertex {
    std::size_t a = 0;  // lower node
    std::size_t b = 0;  // upper node
};

}  // namespace

Mesh ExtractIso(const SignedField &field, const GridSpec &grid, const ExtractOptions &options) {
    grid.Validate(true);
    const SignedGrid sg = SampleSignedGrid(field, grid);
    const int dim = grid.dim();
    const std::size_t n_nodes = grid.NodeCount();
    auto value = [&](std::size_t node) { return sg.Value(node); };

    // Crossing edges, id = lower node * dim + axis, in increasing id order.
    std::vector<std::size_t> edge_ids;
    std::vector<std::size_t> strides(static_cast<std::size_t>(dim));
    {
        std::size_t s = 1;
        for (int a = 0; a < dim; ++a) {
            strides[static_cast<std::size_t>(a)] = s;
            s *= static_cast<std::size_t>(grid.counts[static_cast<std::size_t>(a)]);
        }
    }
    for (std::size_t node = 0; node < n_nodes; ++node) {
        const auto idx = grid.NodeIndex(node);
        for (int a = 0; a < dim; ++a) {
            if (idx[static_cast<std::size_t>(a)] + 1 >= grid.counts[static_cast<std::size_t>(a)]) {
                continue;
            }
            const std::size_t other = node + strides[static_cast<std::size_t>(a)];
            if (Negative(value(node)) != Negative(value(other))) {
                edge_ids.push_back(node * static_cast<std::size_t>(dim) + static_cast<std::size_t>(a));
            }
        }
    }
    std::unordered_map<std::size_t, int> vertex_of;
    vertex_of.reserve(edge_ids.size() * 2);
    for (std::size_t i = 0; i < edge_ids.size(); ++i) vertex_of[edge_ids[i]] = static_cast<int>(i);

    Mesh mesh;
    mesh.vertices.resize(static_cast<Eigen::Index>(edge_ids.size()), dim);
    mesh.vertex_variance.resize(static_cast<Eigen::Index>(edge_ids.size()));

    // Linear crossing first, then one Newton step along the edge.
    Points linear_pts(static_cast<Eigen::Index>(edge_ids.size()), dim);
    std::vector<EdgeVertex> ends(edge_ids.size());
    std::vector<double> t_lin(edge_ids.size());
    for (std::size_t i = 0; i < edge_ids.size(); ++i) {
        const std::size_t node = edge_ids[i] / static_cast<std::size_t>(dim);
        const auto axis = static_cast<std::size_t>(edge_ids[i] % static_cast<std::size_t>(dim));
        ends[i] = {node, node + strides[axis]};
        const double va = value(ends[i].a);
        const double vb = value(ends[i].b);
        const double t = std::clamp(va / (va - vb), 0.0, 1.0);
        t_lin[i] = t;
        linear_pts.row(static_cast<Eigen::Index>(i)) =
            (grid.NodePosition(ends[i].a) * (1.0 - t) + grid.NodePosition(ends[i].b) * t).transpose();
    }
    const std::vector<SignedSample> at_linear = field.SampleBatch(linear_pts);
    std::vector<bool> moved(edge_ids.size(), false);
    for (std::size_t i = 0; i < edge_ids.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        mesh.vertices.row(row) = linear_pts.row(row);
        mesh.vertex_variance(row) = at_linear[i].variance;
        if (!options.hermite) continue;
        const SignedSample &s = at_linear[i];
        if (!s.gradient_defined || s.sign == Sign::kUnknown) continue;
        const auto axis = static_cast<Eigen::Index>(edge_ids[i] % static_cast<std::size_t>(dim));
        const double slope = s.gradient(axis) * grid.cell_size;  // d value / d t
        if (!(std::abs(slope) > 1e-9)) continue;
        const double t = t_lin[i] - s.value() / slope;
        if (!(t >= 0.0 && t <= 1.0)) continue;
        Vector p = grid.NodePosition(ends[i].a);
        p(axis) += t * grid.cell_size;
        mesh.vertices.row(row) = p.transpose();
        moved[i] = true;
    }
    {
        std::vector<std::size_t> redo;
        for (std::size_t i = 0; i < moved.size(); ++i) {
            if (moved[i]) redo.push_back(i);
        }
        Points q(static_cast<Eigen::Index>(redo.size()), dim);
        for (std::size_t k = 0; k < redo.size(); ++k) {
            q.row(static_cast<Eigen::Index>(k)) = mesh.vertices.row(static_cast<Eigen::Index>(redo[k]));
        }
        const std::vector<SignedSample> again = field.SampleBatch(q);
        for (std::size_t k = 0; k < redo.size(); ++k) {
            mesh.vertex_variance(static_cast<Eigen::Index>(redo[k])) = again[k].variance;
        }
    }

    auto edge_vertex = [&](std::size_t a, std::size_t b) {
        const std::size_t lo = std::min(a, b);
        const std::size_t diff = std::max(a, b) - lo;
        std::size_t axis = 0;
        while (strides[axis] != diff) ++axis;
        return vertex_of.at(lo * static_cast<std::size_t>(dim) + axis);
    };

    if (dim == 2) {
        const int nx = grid.counts[0];
        const int ny = grid.counts[1];
        std::vector<std::array<int, 2>> local;
        for (int j = 0; j + 1 < ny; ++j) {
            for (int i = 0; i + 1 < nx; ++i) {
                const std::array<std::size_t, 4> c{grid.Linear(i, j), grid.Linear(i + 1, j),
                                                   grid.Linear(i + 1, j + 1),
                                                   grid.Linear(i, j + 1)};
                const std::array<double, 4> v{value(c[0]), value(c[1]), value(c[2]), value(c[3])};
                local.clear();
                FaceSegments(v, local);
                for (const auto &seg : local) {
                    const auto e0 = static_cast<std::size_t>(seg[0]);
                    const auto e1 = static_cast<std::size_t>(seg[1]);
                    const int a = edge_vertex(c[e0], c[(e0 + 1) % 4]);
                    const int b = edge_vertex(c[e1], c[(e1 + 1) % 4]);
                    if ((mesh.vertices.row(a) - mesh.vertices.row(b)).norm() <= 1e-12) continue;
                    mesh.segments.push_back({a, b});
                }
            }
        }
        return mesh;
    }

    // 3D: corner bit 0 = +x, bit 1 = +y, bit 2 = +z.
    struct Face {
        std::array<int, 4> corners;
    };
    std::array<Face, 6> faces{};
    for (int axis = 0; axis < 3; ++axis) {
        const int u = (axis + 1) % 3;
        const int w = (axis + 2) % 3;
        for (int side = 0; side < 2; ++side) {
            const int base = side << axis;
            std::array<int, 4> cyc{base, base | (1 << u), base | (1 << u) | (1 << w), base | (1 << w)};
            // (u, w, axis) is right-handed, so this order is counter-clockwise
            // seen from +axis; reverse it for the face looking toward -axis.
            if (side == 0) std::swap(cyc[1], cyc[3]);
            faces[static_cast<std::size_t>(axis * 2 + side)] = {cyc};
        }
    }

    const int nx = grid.counts[0];
    const int ny = grid.counts[1];
    const int nz = grid.counts[2];
    const long n_cells = static_cast<long>(nx - 1) * (ny - 1) * (nz - 1);
    std::vector<std::vector<std::array<int, 3>>> per_cell(static_cast<std::size_t>(n_cells));

#pragma omp parallel for schedule(dynamic, 256)
    for (long cell = 0; cell < n_cells; ++cell) {
        const int i = static_cast<int>(cell % (nx - 1));
        const int j = static_cast<int>((cell / (nx - 1)) % (ny - 1));
        const int k = static_cast<int>(cell / (static_cast<long>(nx - 1) * (ny - 1)));
        std::array<std::size_t, 8> node{};
        std::array<double, 8> val{};
        bool any_neg = false;
        bool any_pos = false;
        for (int b = 0; b < 8; ++b) {
            node[static_cast<std::size_t>(b)] =
                grid.Linear(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1));
            val[static_cast<std::size_t>(b)] = value(node[static_cast<std::size_t>(b)]);
            (Negative(val[static_cast<std::size_t>(b)]) ? any_neg : any_pos) = true;
        }
        if (!any_neg || !any_pos) continue;

        // Segment map: vertex where a segment starts -> vertex where it ends.
        std::map<int, int> next;
        std::vector<std::array<int, 2>> local;
        for (const Face &f : faces) {
            std::array<double, 4> v{};
            for (int c = 0; c < 4; ++c) {
                v[static_cast<std::size_t>(c)] =
                    val[static_cast<std::size_t>(f.corners[static_cast<std::size_t>(c)])];
            }
            local.clear();
            FaceSegments(v, local);
            for (const auto &seg : local) {
                auto vert = [&](int e) {
                    const auto ca = static_cast<std::size_t>(f.corners[static_cast<std::size_t>(e)]);
                    const auto cb =
                        static_cast<std::size_t>(f.corners[static_cast<std::size_t>((e + 1) % 4)]);
                    return edge_vertex(node[ca], node[cb]);
                };
                next[vert(seg[0])] = vert(seg[1]);
            }
        }
        auto &tris = per_cell[static_cast<std::size_t>(cell)];
        while (!next.empty()) {
            std::vector<int> loop;
            int cur = next.begin()->first;
            while (true) {
                auto it = next.find(cur);
                if (it == next.end()) break;
                loop.push_back(cur);
                cur = it->second;
                next.erase(it);
            }
            for (std::size_t t = 1; t + 1 < loop.size(); ++t) {
                tris.push_back({loop[0], loop[t + 1], loop[t]});
            }
        }
    }

    for (const auto &tris : per_cell) {
        for (const auto &t : tris) {
            const Eigen::Vector3d p0 = mesh.vertices.row(t[0]).transpose();
            const Eigen::Vector3d p1 = mesh.vertices.row(t[1]).transpose();
            const Eigen::Vector3d p2 = mesh.vertices.row(t[2]).transpose();
            if (0.5 * (p1 - p0).cross(p2 - p0).norm() <= 1e-12) continue;
            mesh.faces.push_back(t);
        }
    }
    return mesh;
}

Mesh ExtractIso(const ClusterMap &map, const GridSpec &grid, const std::vector<Pose> &sensor_track,
                const ExtractOptions &options) {
    MapSignedField field(map, SensorPositions(sensor_track));
    return ExtractIso(field, grid, options);
}

std::vector<std::vector<int>> ChainPolylines(const Mesh &mesh) {
    std::multimap<int, std::size_t> starts;
    std::vector<int> in_degree(static_cast<std::size_t>(mesh.vertices.rows()), 0);
    for (std::size_t s = 0; s < mesh.segments.size(); ++s) {
        starts.emplace(mesh.segments[s][0], s);
        ++in_degree[static_cast<std::size_t>(mesh.segments[s][1])];
    }
    std::vector<bool> used(mesh.segments.size(), false);
    std::vector<std::vector<int>> out;
    auto trace = [&](std::size_t first) {
        std::vector<int> line{mesh.segments[first][0]};
        std::size_t s = first;
        while (true) {
            used[s] = true;
            const int end = mesh.segments[s][1];
            line.push_back(end);
            bool found = false;
            auto [lo, hi] = starts.equal_range(end);
            for (auto it = lo; it != hi; ++it) {
                if (!used[it->second]) {
                    s = it->second;
                    found = true;
                    break;
                }
            }
            if (!found) break;
        }
        out.push_back(std::move(line));
    };
    // Open chains start where nothing flows in; the rest are closed loops.
    for (std::size_t s = 0; s < mesh.segments.size(); ++s) {
        if (!used[s] && in_degree[static_cast<std::size_t>(mesh.segments[s][0])] == 0) trace(s);
    }
    for (std::size_t s = 0; s < mesh.segments.size(); ++s) {
        if (!used[s]) trace(s);
    }
    return out;
}

void WriteContourCsv(const std::string &path, const Mesh &mesh) {
    if (mesh.vertices.rows() > 0 && mesh.dim() != 2) {
        throw Error(ErrorCode::kDimensionMismatch, "contour CSV needs a 2D mesh");
    }
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::kIo, "cannot write " + path);
    os.precision(10);
    os << "polyline,x,y,variance\n";
    const auto lines = ChainPolylines(mesh);
    for (std::size_t l = 0; l < lines.size(); ++l) {
        for (int v : lines[l]) {
            os << l << ',' << mesh.vertices(v, 0) << ',' << mesh.vertices(v, 1) << ','
               << mesh.vertex_variance(v) << '\n';
        }
    }
    if (!os) throw Error(ErrorCode::kIo, "write failed for " + path);
}

void WriteMeshPly(const std::string &path, const Mesh &mesh) {
    if (mesh.vertices.rows() > 0 && mesh.dim() != 3) {
        throw Error(ErrorCode::kDimensionMismatch, "PLY export needs a 3D mesh");
    }
    PlyData data;
    data.positions = mesh.vertices.rows() > 0 ? mesh.vertices : Points(0, 3);
    data.quality = mesh.vertex_variance;
    data.faces = mesh.faces;
    SavePly(path, data);
}

}  // namespace loggpis
