#include "loggpis/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "loggpis/error.hpp"

namespace loggpis {

std::vector<double> OracleEdf(const AnalyticScene &scene, const Eigen::Ref<const Points> &queries) {
    scene.Validate();
    if (queries.rows() > 0 && queries.cols() != scene.dim()) {
        throw Error(ErrorCode::kDimensionMismatch, "query dimension does not match the scene");
    }
    std::vector<double> out(static_cast<std::size_t>(queries.rows()));
    for (Eigen::Index i = 0; i < queries.rows(); ++i) {
        out[static_cast<std::size_t>(i)] = scene.Distance(queries.row(i).transpose());
    }
    return out;
}

CloudOracle::CloudOracle(Points cloud) : index_(std::make_unique<PointIndex>(std::move(cloud))) {}

CloudOracle::CloudOracle(CloudOracle &&) noexcept = default;
CloudOracle &CloudOracle::operator=(CloudOracle &&) noexcept = default;
CloudOracle::~CloudOracle() = default;

double CloudOracle::Distance(const Eigen::Ref<const Vector> &x) const {
    return (index_->points().row(index_->Nearest(x)).transpose() - x).norm();
}

std::vector<double> CloudOracle::Distances(const Eigen::Ref<const Points> &queries) const {
    std::vector<double> out(static_cast<std::size_t>(queries.rows()));
    const auto n = static_cast<long>(queries.rows());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = Distance(queries.row(i).transpose());
    return out;
}

double CloudOracle::BruteForce(const Eigen::Ref<const Vector> &x) const {
    if (x.size() != dim()) throw Error(ErrorCode::kDimensionMismatch, "query dimension mismatch");
    return (index_->points().row(index_->NearestBruteForce(x)).transpose() - x).norm();
}

ClusterMap MakeStandardGpis(const ClusterMap &reference) {
    MapConfig config = reference.config();
    config.method = Method::kStandardGpis;
    if (config.gradient_target == GradientTarget::kScaledNormal) {
        config.gradient_target = GradientTarget::kUnitNormal;
    }
    return ClusterMap::FromPoints(config, reference.points());
}

std::vector<double> StandardGpisBaseline(std::span<const SurfacePoint> points, const MapConfig &config,
                                         const Eigen::Ref<const Points> &queries) {
    MapConfig c = config;
    c.method = Method::kStandardGpis;
    if (c.gradient_target == GradientTarget::kScaledNormal) c.gradient_target = GradientTarget::kUnitNormal;
    ClusterMap map(c);
    map.Insert(points);
    map.RefitDirty();
    std::vector<double> out(static_cast<std::size_t>(queries.rows()));
    const Points q = queries;
    const auto est = map.QueryBatch(q);
    for (std::size_t i = 0; i < est.size(); ++i) out[i] = est[i].latent_mean;
    return out;
}

double Percentile(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

std::vector<double> GradientNorms(const GridSpec &grid, const std::vector<NodeRecord> &nodes) {
    const std::size_t n = grid.NodeCount();
    if (nodes.size() != n) throw Error(ErrorCode::kDimensionMismatch, "node count does not match grid");
    std::vector<double> out(n, std::numeric_limits<double>::quiet_NaN());
    std::vector<std::size_t> strides(static_cast<std::size_t>(grid.dim()));
    std::size_t s = 1;
    for (int a = 0; a < grid.dim(); ++a) {
        strides[static_cast<std::size_t>(a)] = s;
        s *= static_cast<std::size_t>(grid.counts[static_cast<std::size_t>(a)]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (nodes[i].clamped) continue;
        const auto idx = grid.NodeIndex(i);
        double sq = 0.0;
        bool ok = true;
        bool any_axis = false;
        for (int a = 0; a < grid.dim() && ok; ++a) {
            const int count = grid.counts[static_cast<std::size_t>(a)];
            if (count == 1) continue;
            const int k = idx[static_cast<std::size_t>(a)];
            if (k == 0 || k + 1 >= count) {
                ok = false;
                break;
            }
            const NodeRecord &lo = nodes[i - strides[static_cast<std::size_t>(a)]];
            const NodeRecord &hi = nodes[i + strides[static_cast<std::size_t>(a)]];
            if (lo.clamped || hi.clamped) {
                ok = false;
                break;
            }
            const double g = (hi.estimate - lo.estimate) / (2.0 * grid.cell_size);
            sq += g * g;
            any_axis = true;
        }
        if (ok && any_axis) out[i] = std::sqrt(sq);
    }
    return out;
}

std::vector<double> StencilGradientNorms(const ClusterMap &map, const Eigen::Ref<const Points> &queries,
                                         double step) {
    if (!(step > 0.0)) throw Error(ErrorCode::kInvalidInput, "stencil step must be positive");
    const auto n = queries.rows();
    const auto dim = queries.cols();
    Points stencil(2 * dim * n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index a = 0; a < dim; ++a) {
            stencil.row((i * dim + a) * 2) = queries.row(i);
            stencil.row((i * dim + a) * 2 + 1) = queries.row(i);
            stencil((i * dim + a) * 2, a) += step;
            stencil((i * dim + a) * 2 + 1, a) -= step;
        }
    }
    const std::vector<FieldEstimate> est = map.QueryBatch(stencil);
    std::vector<double> out(static_cast<std::size_t>(n), std::numeric_limits<double>::quiet_NaN());
    for (Eigen::Index i = 0; i < n; ++i) {
        double sq = 0.0;
        bool ok = true;
        for (Eigen::Index a = 0; a < dim && ok; ++a) {
            const FieldEstimate &hi = est[static_cast<std::size_t>((i * dim + a) * 2)];
            const FieldEstimate &lo = est[static_cast<std::size_t>((i * dim + a) * 2 + 1)];
            ok = !hi.clamped && !lo.clamped;
            const double g = (hi.distance - lo.distance) / (2.0 * step);
            sq += g * g;
        }
        if (ok) out[static_cast<std::size_t>(i)] = std::sqrt(sq);
    }
    return out;
}

SliceResult EvaluateSlice(const ClusterMap &map, const AnalyticScene &scene, const GridSpec &grid,
                          const SliceOptions &options) {
    grid.Validate(false);
    if (grid.dim() != map.config().dim || scene.dim() != grid.dim()) {
        throw Error(ErrorCode::kDimensionMismatch, "map, scene and grid dimensions differ");
    }
    const std::size_t n = grid.NodeCount();
    if (n == 0) throw Error(ErrorCode::kInvalidInput, "empty evaluation grid");
    if (options.mask && options.mask->size() != n) {
        throw Error(ErrorCode::kDimensionMismatch, "mask size does not match grid");
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Vector p = grid.NodePosition(i);
        for (int a = 0; a < grid.dim(); ++a) {
            if (p(a) < map.config().arena_min(a) - 1e-9 || p(a) > map.config().arena_max(a) + 1e-9) {
                throw Error(ErrorCode::kInvalidInput, "evaluation grid leaves the arena");
            }
        }
    }
    const Points queries = grid.NodePositions();
    const std::vector<double> truth = OracleEdf(scene, queries);

    const auto t0 = std::chrono::steady_clock::now();
    const std::vector<FieldEstimate> est = map.QueryBatch(queries);
    const auto t1 = std::chrono::steady_clock::now();

    SliceResult result;
    MetricsReport &r = result.report;
    r.method = std::string(ToString(map.config().method));
    r.nodes = n;
    r.query_us_per_point =
        std::chrono::duration<double, std::micro>(t1 - t0).count() / static_cast<double>(n);
    result.nodes.resize(n);
    std::size_t clamped = 0;
    double sum_sq = 0.0;
    double sum_abs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        NodeRecord &rec = result.nodes[i];
        rec.position = queries.row(static_cast<Eigen::Index>(i)).transpose();
        rec.truth = truth[i];
        rec.estimate = std::abs(est[i].distance);
        rec.variance = est[i].variance;
        rec.clamped = est[i].clamped;
        if (rec.clamped) ++clamped;
        rec.used = !rec.clamped && (!options.mask || (*options.mask)[i]) &&
                   rec.truth <= options.max_truth && rec.truth >= options.min_truth;
        if (!rec.used) continue;
        const double e = rec.estimate - rec.truth;
        sum_sq += e * e;
        sum_abs += std::abs(e);
        ++r.evaluated;
    }
    r.clamp_fraction = static_cast<double>(clamped) / static_cast<double>(n);
    if (r.evaluated > 0) {
        r.rmse = std::sqrt(sum_sq / static_cast<double>(r.evaluated));
        r.mean_abs_err = sum_abs / static_cast<double>(r.evaluated);
    }
    const std::vector<double> norms = options.eikonal_step > 0.0
                                          ? StencilGradientNorms(map, queries, options.eikonal_step)
                                          : GradientNorms(grid, result.nodes);
    for (std::size_t i = 0; i < n; ++i) result.nodes[i].grad_norm = norms[i];
    std::vector<double> dev;
    for (std::size_t i = 0; i < n; ++i) {
        if (result.nodes[i].used && std::isfinite(norms[i])) dev.push_back(std::abs(norms[i] - 1.0));
    }
    r.eikonal_p95 = Percentile(dev, 0.95);

    if (!options.csv_path.empty()) {
        std::ofstream os(options.csv_path);
        if (!os) throw Error(ErrorCode::kIo, "cannot write " + options.csv_path);
        os.precision(10);
        const char *axes[] = {"x", "y", "z"};
        for (int a = 0; a < grid.dim(); ++a) os << axes[a] << ',';
        os << "truth,estimate,abs_err,variance,grad_norm,clamped,used\n";
        for (const NodeRecord &rec : result.nodes) {
            for (int a = 0; a < grid.dim(); ++a) os << rec.position(a) << ',';
            os << rec.truth << ',' << rec.estimate << ',' << std::abs(rec.estimate - rec.truth) << ','
               << rec.variance << ',' << rec.grad_norm << ',' << (rec.clamped ? 1 : 0) << ',' << (rec.used ? 1 : 0) << '\n';
        }
        r.csv_path = options.csv_path;
    }
    return result;
}

namespace {

MeshErrorReport Summarise(const Mesh &mesh, std::vector<double> errors) {
    MeshErrorReport r;
    r.errors = std::move(errors);
    const double max_err = r.errors.empty() ? 0.0 : *std::max_element(r.errors.begin(), r.errors.end());
    r.histogram.assign(static_cast<std::size_t>(std::floor(max_err / 1e-3)) + 1, 0);
    for (double e : r.errors) ++r.histogram[static_cast<std::size_t>(std::floor(e / 1e-3))];
    r.median = Percentile(r.errors, 0.5);
    r.p95 = Percentile(r.errors, 0.95);
    std::vector<double> var(mesh.vertex_variance.data(),
                            mesh.vertex_variance.data() + mesh.vertex_variance.size());
    r.spearman = Spearman(var, r.errors);
    return r;
}

void RequireMesh(const Mesh &mesh) {
    if (mesh.vertices.rows() == 0) throw Error(ErrorCode::kInvalidInput, "mesh has no vertices");
}

}  // namespace

MeshErrorReport MeshError(const Mesh &mesh, const AnalyticScene &truth) {
    RequireMesh(mesh);
    return Summarise(mesh, OracleEdf(truth, mesh.vertices));
}

MeshErrorReport MeshError(const Mesh &mesh, const CloudOracle &truth) {
    RequireMesh(mesh);
    return Summarise(mesh, truth.Distances(mesh.vertices));
}

double Spearman(const std::vector<double> &a, const std::vector<double> &b) {
    if (a.size() != b.size()) throw Error(ErrorCode::kDimensionMismatch, "rank inputs differ in size");
    const std::size_t n = a.size();
    if (n < 2) return 0.0;
    auto ranks = [n](const std::vector<double> &v) {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
        Vector r(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n;) {
            std::size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r(static_cast<Eigen::Index>(order[k])) = avg;
            i = j + 1;
        }
        return r;
    };
    Vector ra = ranks(a);
    Vector rb = ranks(b);
    ra.array() -= ra.mean();
    rb.array() -= rb.mean();
    const double denom = std::sqrt(ra.squaredNorm() * rb.squaredNorm());
    return denom > 0.0 ? ra.dot(rb) / denom : 0.0;
}

double HausdorffToCircle(const Mesh &mesh, const Eigen::Ref<const Vector> &center, double radius) {
    if (mesh.segments.empty()) throw Error(ErrorCode::kInvalidInput, "contour has no segments");
    if (mesh.dim() != 2 || center.size() != 2) {
        throw Error(ErrorCode::kDimensionMismatch, "Hausdorff to a circle needs a 2D contour");
    }
    double worst = 0.0;
    // Contour to circle: a segment's farthest point from a circle is an end
    // point or its closest approach to the centre.
    for (const auto &s : mesh.segments) {
        const Eigen::Vector2d a = mesh.vertices.row(s[0]).transpose();
        const Eigen::Vector2d b = mesh.vertices.row(s[1]).transpose();
        const Eigen::Vector2d ab = b - a;
        const double len2 = ab.squaredNorm();
        const double t = len2 > 0.0 ? std::clamp((center - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
        for (const Eigen::Vector2d &p : {a, b, Eigen::Vector2d(a + t * ab)}) {
            worst = std::max(worst, std::abs((p - center).norm() - radius));
        }
    }
    // Circle to contour.
    const int samples = static_cast<int>(std::ceil(2.0 * M_PI / 1e-4));
    std::vector<double> best(static_cast<std::size_t>(samples), std::numeric_limits<double>::infinity());
#pragma omp parallel for schedule(static)
    for (int k = 0; k < samples; ++k) {
        const double th = 2.0 * M_PI * k / samples;
        const Eigen::Vector2d p = center + radius * Eigen::Vector2d(std::cos(th), std::sin(th));
        double d = std::numeric_limits<double>::infinity();
        for (const auto &s : mesh.segments) {
            const Eigen::Vector2d a = mesh.vertices.row(s[0]).transpose();
            const Eigen::Vector2d ab = mesh.vertices.row(s[1]).transpose() - a;
            const double len2 = ab.squaredNorm();
            const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
            d = std::min(d, (a + t * ab - p).norm());
        }
        best[static_cast<std::size_t>(k)] = d;
    }
    for (double d : best) worst = std::max(worst, d);
    return worst;
}

void WriteReportJson(const std::string &path, const std::vector<MetricsReport> &reports) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const MetricsReport &r : reports) {
        arr.push_back({{"method", r.method},
                       {"rmse", r.rmse},
                       {"mean_abs_err", r.mean_abs_err},
                       {"eikonal_p95", r.eikonal_p95},
                       {"clamp_fraction", r.clamp_fraction},
                       {"nodes", r.nodes},
                       {"evaluated", r.evaluated},
                       {"csv", r.csv_path},
                       {"runtime", {{"build_s", r.build_seconds}, {"query_us_per_point", r.query_us_per_point}}}});
    }
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::kIo, "cannot write " + path);
    os << arr.dump(2) << '\n';
}

void WriteHistogramCsv(const std::string &path, const MeshErrorReport &report) {
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::kIo, "cannot write " + path);
    os << "bin_lo_m,bin_hi_m,count\n";
    for (std::size_t i = 0; i < report.histogram.size(); ++i) {
        os << i * 1e-3 << ',' << (i + 1) * 1e-3 << ',' << report.histogram[i] << '\n';
    }
}

}  // namespace loggpis
