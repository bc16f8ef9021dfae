#include "loggpis/map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>

#include <spdlog/spdlog.h>

#include "loggpis/error.hpp"

namespace loggpis {

std::string_view ToString(Method method) {
    return method == Method::kLogGpis ? "loggpis" : "gpis";
}

Method MethodFromString(std::string_view name) {
    if (name == "loggpis") return Method::kLogGpis;
    if (name == "gpis") return Method::kStandardGpis;
    throw Error(ErrorCode::kInvalidInput, "unknown method '" + std::string(name) + "'");
}

std::string_view ToString(GradientTarget target) {
    switch (target) {
        case GradientTarget::kUnitNormal: return "unit";
        case GradientTarget::kScaledNormal: return "scaled";
        case GradientTarget::kNone: return "none";
    }
    return "unit";
}

GradientTarget GradientTargetFromString(std::string_view name) {
    if (name == "unit") return GradientTarget::kUnitNormal;
    if (name == "scaled") return GradientTarget::kScaledNormal;
    if (name == "none") return GradientTarget::kNone;
    throw Error(ErrorCode::kInvalidInput, "unknown gradient target '" + std::string(name) + "'");
}

std::string_view ToString(BlendMode mode) {
    return mode == BlendMode::kAdditive ? "additive" : "variance";
}

BlendMode BlendModeFromString(std::string_view name) {
    if (name == "additive") return BlendMode::kAdditive;
    if (name == "variance") return BlendMode::kVariance;
    throw Error(ErrorCode::kInvalidInput, "unknown blend mode '" + std::string(name) + "'");
}

void MapConfig::Validate() const {
    if (!IsSupportedDim(dim)) throw Error(ErrorCode::kInvalidInput, "map dimension must be 2 or 3");
    if (arena_min.size() != dim || arena_max.size() != dim) {
        throw Error(ErrorCode::kDimensionMismatch, "arena bounds must have D entries");
    }
    if (!((arena_max - arena_min).array() > 0.0).all()) {
        throw Error(ErrorCode::kInvalidInput, "arena must have positive extent on every axis");
    }
    kernel.Validate();
    if (leaf_capacity < 1) throw Error(ErrorCode::kInvalidInput, "leaf capacity must be >= 1");
    if (fuse_radius < 0.0) throw Error(ErrorCode::kInvalidInput, "fuse radius must be >= 0");
    if (!(field.latent_floor > 0.0) || field.latent_floor >= 1.0) {
        throw Error(ErrorCode::kInvalidInput, "latent floor must lie in (0, 1)");
    }
}

std::optional<SurfacePoint> FusePoint(const SurfacePoint &existing, const SurfacePoint &incoming,
                                      double max_angle) {
    const double cos_angle = existing.normal.dot(incoming.normal);
    if (cos_angle < std::cos(max_angle)) return std::nullopt;
    if (!std::isfinite(incoming.pos_noise)) return existing;
    const double w0 = 1.0 / (existing.pos_noise * existing.pos_noise);
    const double w1 = 1.0 / (incoming.pos_noise * incoming.pos_noise);
    SurfacePoint fused;
    fused.position = (w0 * existing.position + w1 * incoming.position) / (w0 + w1);
    fused.normal = (w0 * existing.normal + w1 * incoming.normal).normalized();
    fused.pos_noise = std::sqrt(1.0 / (w0 + w1));
    fused.obs_count = existing.obs_count + incoming.obs_count;
    return fused;
}

struct ClusterMap::Node {
    Vector lo;
    Vector hi;
    int first_child = -1;
    std::vector<int> ids;
    bool dirty = false;
    std::shared_ptr<const GpModel> model;
    std::vector<int> own_rows;  // training rows of the model that lie in this leaf
    std::string error;

    [[nodiscard]] bool leaf() const { return first_child < 0; }
};

struct ClusterMap::Impl {
    std::vector<Node> nodes;
    std::vector<int> usable;  // leaf node indices with a fitted model
};

namespace {

bool InBox(const Eigen::Ref<const Vector> &p, const Vector &lo, const Vector &hi, double pad) {
    for (Eigen::Index a = 0; a < p.size(); ++a) {
        if (p(a) < lo(a) - pad || p(a) > hi(a) + pad) return false;
    }
    return true;
}

double BoxDistance(const Eigen::Ref<const Vector> &p, const Vector &lo, const Vector &hi) {
    double s = 0.0;
    for (Eigen::Index a = 0; a < p.size(); ++a) {
        const double d = std::max({lo(a) - p(a), 0.0, p(a) - hi(a)});
        s += d * d;
    }
    return std::sqrt(s);
}

bool LexLess(const Vector &a, const Vector &b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (a(i) != b(i)) return a(i) < b(i);
    }
    return false;
}

}  // namespace

ClusterMap::ClusterMap(MapConfig config)
    : config_(std::move(config)),
      impl_(std::make_unique<Impl>()),
      mutex_(std::make_unique<std::shared_mutex>()) {
    config_.Validate();
    Node root;
    root.lo = config_.arena_min;
    root.hi = config_.arena_max;
    impl_->nodes.push_back(std::move(root));
}

ClusterMap::ClusterMap(ClusterMap &&) noexcept = default;
ClusterMap &ClusterMap::operator=(ClusterMap &&) noexcept = default;
ClusterMap::~ClusterMap() = default;

InsertReport ClusterMap::Insert(std::span<const SurfacePoint> incoming) {
    std::unique_lock lock(*mutex_);
    auto &nodes = impl_->nodes;
    const int dim = config_.dim;
    const double margin = config_.SupportMargin();
    const int fanout = 1 << dim;

    auto locate = [&](const Vector &p) {
        int n = 0;
        while (!nodes[n].leaf()) {
            int child = 0;
            for (int a = 0; a < dim; ++a) {
                if (p(a) >= 0.5 * (nodes[n].lo(a) + nodes[n].hi(a))) child |= 1 << a;
            }
            n = nodes[n].first_child + child;
        }
        return n;
    };

    auto mark_dirty = [&](const Vector &p) {
        std::vector<int> stack{0};
        while (!stack.empty()) {
            const int n = stack.back();
            stack.pop_back();
            if (!InBox(p, nodes[n].lo, nodes[n].hi, margin)) continue;
            if (nodes[n].leaf()) {
                nodes[n].dirty = true;
            } else {
                for (int c = 0; c < fanout; ++c) stack.push_back(nodes[n].first_child + c);
            }
        }
    };

    auto nearest_within = [&](const Vector &p, double radius) {
        int best = -1;
        double best_d = radius;
        std::vector<int> stack{0};
        while (!stack.empty()) {
            const int n = stack.back();
            stack.pop_back();
            if (BoxDistance(p, nodes[n].lo, nodes[n].hi) > best_d) continue;
            if (nodes[n].leaf()) {
                for (int id : nodes[n].ids) {
                    const double d = (points_[id].position - p).norm();
                    if (d < best_d || (d == best_d && best >= 0 && id < best)) {
                        best_d = d;
                        best = id;
                    }
                }
            } else {
                for (int c = 0; c < fanout; ++c) stack.push_back(nodes[n].first_child + c);
            }
        }
        return best;
    };

    // Splits a leaf that exceeds capacity, recursing into crowded children.
    auto split = [&](int leaf_index) {
        std::vector<int> pending{leaf_index};
        while (!pending.empty()) {
            const int n = pending.back();
            pending.pop_back();
            if (static_cast<int>(nodes[n].ids.size()) <= config_.leaf_capacity) continue;
            if (0.5 * (nodes[n].hi - nodes[n].lo).maxCoeff() < config_.min_leaf_size) continue;
            const int first = static_cast<int>(nodes.size());
            const Vector lo = nodes[n].lo;
            const Vector hi = nodes[n].hi;
            const Vector mid = 0.5 * (lo + hi);
            for (int c = 0; c < fanout; ++c) {
                Node child;
                child.lo = lo;
                child.hi = hi;
                for (int a = 0; a < dim; ++a) {
                    if (c & (1 << a)) {
                        child.lo(a) = mid(a);
                    } else {
                        child.hi(a) = mid(a);
                    }
                }
                nodes.push_back(std::move(child));
            }
            Node &parent = nodes[n];
            parent.first_child = first;
            for (int id : parent.ids) {
                const Vector &p = points_[id].position;
                int child = 0;
                for (int a = 0; a < dim; ++a) {
                    if (p(a) >= mid(a)) child |= 1 << a;
                }
                nodes[first + child].ids.push_back(id);
            }
            parent.ids.clear();
            parent.ids.shrink_to_fit();
            parent.model.reset();
            parent.error.clear();
            parent.dirty = false;
            for (int c = 0; c < fanout; ++c) {
                nodes[first + c].dirty = true;
                pending.push_back(first + c);
            }
        }
    };

    InsertReport report;
    for (const SurfacePoint &raw : incoming) {
        if (raw.position.size() != dim || raw.normal.size() != dim || !raw.position.allFinite() ||
            !raw.normal.allFinite() || !(raw.normal.norm() > 0.0) || !(raw.pos_noise > 0.0) ||
            !InBox(raw.position, config_.arena_min, config_.arena_max, 0.0)) {
            ++report.rejected;
            continue;
        }
        SurfacePoint sp = raw;
        sp.normal.normalize();
        sp.obs_count = std::max(1, sp.obs_count);

        if (config_.fuse_radius > 0.0) {
            const int near = nearest_within(sp.position, config_.fuse_radius);
            if (near >= 0) {
                if (auto fused = FusePoint(points_[near], sp, config_.max_fuse_angle)) {
                    const Vector old_pos = points_[near].position;
                    const int old_leaf = locate(old_pos);
                    points_[near] = std::move(*fused);
                    const int new_leaf = locate(points_[near].position);
                    if (new_leaf != old_leaf) {
                        auto &ids = nodes[old_leaf].ids;
                        ids.erase(std::find(ids.begin(), ids.end(), near));
                        nodes[new_leaf].ids.push_back(near);
                    }
                    mark_dirty(old_pos);
                    mark_dirty(points_[near].position);
                    if (new_leaf != old_leaf) split(new_leaf);
                    ++report.fused;
                    continue;
                }
            }
        }

        const int id = static_cast<int>(points_.size());
        points_.push_back(std::move(sp));
        const int leaf = locate(points_[id].position);
        nodes[leaf].ids.push_back(id);
        mark_dirty(points_[id].position);
        split(leaf);
        ++report.inserted;
    }
    return report;
}

std::vector<int> ClusterMap::SupportSet(const Eigen::Ref<const Vector> &box_min,
                                        const Eigen::Ref<const Vector> &box_max) const {
    const auto &nodes = impl_->nodes;
    const double margin = config_.SupportMargin();
    const Vector lo = box_min.array() - margin;
    const Vector hi = box_max.array() + margin;
    const int fanout = 1 << config_.dim;
    std::vector<int> ids;
    std::vector<int> stack{0};
    while (!stack.empty()) {
        const int n = stack.back();
        stack.pop_back();
        bool overlap = true;
        for (int a = 0; a < config_.dim; ++a) {
            if (nodes[n].hi(a) < lo(a) || nodes[n].lo(a) > hi(a)) overlap = false;
        }
        if (!overlap) continue;
        if (nodes[n].leaf()) {
            for (int id : nodes[n].ids) {
                if (InBox(points_[id].position, lo, hi, 0.0)) ids.push_back(id);
            }
        } else {
            for (int c = 0; c < fanout; ++c) stack.push_back(nodes[n].first_child + c);
        }
    }
    std::sort(ids.begin(), ids.end(), [&](int a, int b) {
        if (LexLess(points_[a].position, points_[b].position)) return true;
        if (LexLess(points_[b].position, points_[a].position)) return false;
        return a < b;
    });
    return ids;
}

TrainingBlock ClusterMap::MakeTrainingBlock(std::span<const int> ids) const {
    const int dim = config_.dim;
    const auto n = static_cast<Eigen::Index>(ids.size());
    const double lambda = config_.kernel.lambda;
    const bool log_method = config_.method == Method::kLogGpis;
    TrainingBlock block;
    block.positions.resize(n, dim);
    block.values.resize(n);
    block.noise.resize(n);
    if (config_.UsesGradients()) block.grad_targets.resize(n, dim);
    const double noise_y2 = config_.kernel.noise_y * config_.kernel.noise_y;
    for (Eigen::Index i = 0; i < n; ++i) {
        const SurfacePoint &sp = points_[ids[static_cast<std::size_t>(i)]];
        block.positions.row(i) = sp.position.transpose();
        // Log-GPIS targets v = exp(-lambda d) = 1 on the surface; positional
        // noise maps to lambda * sigma in the latent.
        block.values(i) = log_method ? 1.0 : 0.0;
        const double pos = log_method ? lambda * sp.pos_noise : sp.pos_noise;
        block.noise(i) = std::sqrt(noise_y2 + pos * pos);
        if (config_.UsesGradients()) {
            // v = exp(-lambda d) falls off along n on the observed side, so the
            // log-domain targets point against n; standard GPIS follows n.
            double scale = log_method ? -1.0 : 1.0;
            if (config_.gradient_target == GradientTarget::kScaledNormal) scale = -lambda;
            block.grad_targets.row(i) = scale * sp.normal.transpose();
        }
    }
    return block;
}

RefitReport ClusterMap::RefitDirty() {
    std::unique_lock lock(*mutex_);
    auto &nodes = impl_->nodes;
    std::vector<int> todo;
    for (int n = 0; n < static_cast<int>(nodes.size()); ++n) {
        Node &node = nodes[n];
        if (!node.leaf() || !node.dirty) continue;
        if (node.ids.empty()) {
            node.model.reset();
            node.own_rows.clear();
            node.error.clear();
            node.dirty = false;
            continue;
        }
        todo.push_back(n);
    }

    std::vector<TrainingBlock> blocks(todo.size());
    std::vector<std::vector<int>> own_rows(todo.size());
    for (std::size_t i = 0; i < todo.size(); ++i) {
        const Node &node = nodes[todo[i]];
        const std::vector<int> support = SupportSet(node.lo, node.hi);
        std::vector<int> owned = node.ids;
        std::sort(owned.begin(), owned.end());
        for (int r = 0; r < static_cast<int>(support.size()); ++r) {
            if (std::binary_search(owned.begin(), owned.end(), support[r])) own_rows[i].push_back(r);
        }
        blocks[i] = MakeTrainingBlock(support);
    }

    std::vector<std::shared_ptr<const GpModel>> models(todo.size());
    std::vector<std::string> errors(todo.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < todo.size(); ++i) {
        try {
            models[i] = std::make_shared<const GpModel>(
                GpModel::Fit(std::move(blocks[i]), config_.kernel));
        } catch (const std::exception &e) {
            errors[i] = e.what();
        }
    }

    RefitReport report;
    for (std::size_t i = 0; i < todo.size(); ++i) {
        Node &node = nodes[todo[i]];
        node.dirty = false;
        node.model = models[i];
        node.own_rows = std::move(own_rows[i]);
        node.error = errors[i];
        if (node.model) {
            ++report.refit;
        } else {
            ++report.failed;
            spdlog::warn("leaf {} fit failed: {}", todo[i], node.error);
        }
    }
    impl_->usable.clear();
    for (int n = 0; n < static_cast<int>(nodes.size()); ++n) {
        if (nodes[n].leaf() && nodes[n].model) impl_->usable.push_back(n);
    }
    return report;
}

LatentPrediction ClusterMap::QueryLatentUnlocked(const Eigen::Ref<const Vector> &x) const {
    if (x.size() != config_.dim) throw Error(ErrorCode::kDimensionMismatch, "query dimension");
    const auto &nodes = impl_->nodes;
    if (impl_->usable.empty()) throw Error(ErrorCode::kEmptyMap, "no usable clusters");
    const double margin = config_.SupportMargin();
    const int fanout = 1 << config_.dim;

    std::vector<int> candidates;
    std::vector<int> stack{0};
    while (!stack.empty()) {
        const int n = stack.back();
        stack.pop_back();
        if (!InBox(x, nodes[n].lo, nodes[n].hi, margin)) continue;
        if (nodes[n].leaf()) {
            if (nodes[n].model) candidates.push_back(n);
        } else {
            for (int c = fanout - 1; c >= 0; --c) stack.push_back(nodes[n].first_child + c);
        }
    }
    if (candidates.empty()) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (int n : impl_->usable) {
            const double d = BoxDistance(x, nodes[n].lo, nodes[n].hi);
            if (d < best_d) {
                best_d = d;
                best = n;
            }
        }
        candidates.push_back(best);
    }
    std::sort(candidates.begin(), candidates.end());

    const PredictOptions options{.gradient_variance = false};
    LatentPrediction out;
    if (candidates.size() == 1) {
        out = nodes[candidates.front()].model->Predict(x, options);
    } else {
        std::vector<LatentPrediction> preds;
        preds.reserve(candidates.size());
        for (int n : candidates) preds.push_back(nodes[n].model->Predict(x, options));

        const double floor = 1e-12 * config_.kernel.sigma2;
        double wsum = 0.0;
        for (const auto &p : preds) wsum += 1.0 / (p.var + floor);
        out.grad_mean = Vector::Zero(preds.front().grad_mean.size());
        for (const auto &p : preds) {
            const double w = (1.0 / (p.var + floor)) / wsum;
            out.mean += w * p.mean;
            out.var += w * p.var;
            if (out.grad_mean.size() > 0) out.grad_mean += w * p.grad_mean;
            out.var_clamped = out.var_clamped || p.var_clamped;
        }
    }
    if (config_.blend == BlendMode::kVariance || impl_->usable.size() == 1) return out;

    // Additive: every leaf adds the kernel terms of the points it owns, with
    // weights solved on its support set. Leaves farther than the cutoff past
    // the nearest one contribute below exp(-cutoff * lambda) relative.
    std::vector<double> dist(impl_->usable.size());
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < impl_->usable.size(); ++i) {
        const int n = impl_->usable[i];
        dist[i] = BoxDistance(x, nodes[n].lo, nodes[n].hi);
        nearest = std::min(nearest, dist[i]);
    }
    const double reach = nearest + config_.AdditiveCutoff();
    double mean = 0.0;
    Vector grad = Vector::Zero(out.grad_mean.size());
    for (std::size_t i = 0; i < impl_->usable.size(); ++i) {
        if (dist[i] > reach) continue;
        const Node &node = nodes[impl_->usable[i]];
        node.model->AccumulatePartialMean(x, node.own_rows, mean, grad);
    }
    out.mean = mean;
    out.grad_mean = std::move(grad);
    return out;
}

FieldEstimate ClusterMap::QueryUnlocked(const Eigen::Ref<const Vector> &x,
                                        const std::optional<Vector> &sensor) const {
    const LatentPrediction latent = QueryLatentUnlocked(x);
    FieldEstimate est = config_.method == Method::kLogGpis
                            ? MakeLogEstimate(latent, config_.kernel, config_.field)
                            : MakeRawEstimate(latent);
    if (sensor && est.gradient_defined && config_.method == Method::kLogGpis) {
        est.sign = RecoverSign(x, est.gradient, *sensor);
    }
    return est;
}

LatentPrediction ClusterMap::QueryLatent(const Eigen::Ref<const Vector> &x) const {
    std::shared_lock lock(*mutex_);
    return QueryLatentUnlocked(x);
}

FieldEstimate ClusterMap::Query(const Eigen::Ref<const Vector> &x,
                                const std::optional<Vector> &sensor) const {
    std::shared_lock lock(*mutex_);
    return QueryUnlocked(x, sensor);
}

std::vector<FieldEstimate> ClusterMap::QueryBatch(const Eigen::Ref<const Points> &queries) const {
    std::shared_lock lock(*mutex_);
    if (impl_->usable.empty()) throw Error(ErrorCode::kEmptyMap, "no usable clusters");
    const Eigen::Index m = queries.rows();
    std::vector<FieldEstimate> out(static_cast<std::size_t>(m));
#pragma omp parallel for schedule(dynamic, 64)
    for (Eigen::Index i = 0; i < m; ++i) {
        const Vector q = queries.row(i).transpose();
        out[static_cast<std::size_t>(i)] = QueryUnlocked(q, std::nullopt);
    }
    return out;
}

std::vector<FieldEstimate> ClusterMap::QueryBatchSerial(
    const Eigen::Ref<const Points> &queries) const {
    std::shared_lock lock(*mutex_);
    if (impl_->usable.empty()) throw Error(ErrorCode::kEmptyMap, "no usable clusters");
    std::vector<FieldEstimate> out;
    out.reserve(static_cast<std::size_t>(queries.rows()));
    for (Eigen::Index i = 0; i < queries.rows(); ++i) {
        const Vector q = queries.row(i).transpose();
        out.push_back(QueryUnlocked(q, std::nullopt));
    }
    return out;
}

std::vector<LeafView> ClusterMap::Leaves() const {
    std::shared_lock lock(*mutex_);
    std::vector<LeafView> out;
    for (const Node &node : impl_->nodes) {
        if (!node.leaf()) continue;
        out.push_back({node.lo, node.hi, node.ids, node.dirty, node.model != nullptr, node.model});
    }
    return out;
}

HealthReport ClusterMap::Health() const {
    std::shared_lock lock(*mutex_);
    HealthReport report;
    for (const Node &node : impl_->nodes) {
        if (!node.leaf()) continue;
        ++report.leaves;
        if (node.model) ++report.usable;
        if (node.dirty) ++report.dirty;
        if (!node.error.empty()) {
            ++report.failed;
            report.errors.push_back(node.error);
        }
    }
    return report;
}

bool ClusterMap::HasUsableLeaf() const {
    std::shared_lock lock(*mutex_);
    return !impl_->usable.empty();
}

namespace {

void WriteVector(std::ostream &os, const Vector &v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << v(i);
}

Vector ReadVector(std::istringstream &is, int dim, int line) {
    Vector v(dim);
    for (int i = 0; i < dim; ++i) {
        if (!(is >> v(i))) throw Error(ErrorCode::kParse, "map file line " + std::to_string(line));
    }
    return v;
}

}  // namespace

void ClusterMap::Save(const std::string &path) const {
    std::shared_lock lock(*mutex_);
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::kIo, "cannot write " + path);
    os << std::setprecision(17);
    os << "loggpis-map 1\n";
    os << "dim " << config_.dim << "\n";
    os << "arena_min ";
    WriteVector(os, config_.arena_min);
    os << "\narena_max ";
    WriteVector(os, config_.arena_max);
    os << "\nlambda " << config_.kernel.lambda << "\n";
    os << "kernel " << ToString(config_.kernel.kind) << "\n";
    os << "sigma2 " << config_.kernel.sigma2 << "\n";
    os << "noise_y " << config_.kernel.noise_y << "\n";
    os << "noise_grad " << config_.kernel.noise_grad << "\n";
    os << "method " << ToString(config_.method) << "\n";
    os << "gradient_target " << ToString(config_.gradient_target) << "\n";
    os << "latent_floor " << config_.field.latent_floor << "\n";
    os << "leaf_capacity " << config_.leaf_capacity << "\n";
    os << "support_margin " << config_.support_margin << "\n";
    os << "fuse_radius " << config_.fuse_radius << "\n";
    os << "max_fuse_angle " << config_.max_fuse_angle << "\n";
    os << "min_leaf_size " << config_.min_leaf_size << "\n";
    os << "blend " << ToString(config_.blend) << "\n";
    os << "additive_cutoff " << config_.additive_cutoff << "\n";
    os << "points " << points_.size() << "\n";
    for (const SurfacePoint &sp : points_) {
        WriteVector(os, sp.position);
        os << " ";
        WriteVector(os, sp.normal);
        os << " " << sp.pos_noise << " " << sp.obs_count << "\n";
    }
    if (!os) throw Error(ErrorCode::kIo, "write failed for " + path);
}

ClusterMap ClusterMap::Load(const std::string &path) {
    std::ifstream is(path);
    if (!is) throw Error(ErrorCode::kIo, "cannot read " + path);
    std::string line;
    int line_no = 0;
    auto next = [&]() {
        if (!std::getline(is, line)) {
            throw Error(ErrorCode::kParse, path + ": unexpected end of file at line " +
                                               std::to_string(line_no + 1));
        }
        ++line_no;
        return std::istringstream(line);
    };
    {
        auto ls = next();
        std::string magic;
        int version = 0;
        ls >> magic >> version;
        if (magic != "loggpis-map" || version != 1) {
            throw Error(ErrorCode::kParse, path + ": not a loggpis map (line 1)");
        }
    }
    MapConfig config;
    std::size_t count = 0;
    for (;;) {
        auto ls = next();
        std::string key;
        ls >> key;
        auto fail = [&]() {
            return Error(ErrorCode::kParse, path + ": bad value for '" + key + "' at line " +
                                                std::to_string(line_no));
        };
        if (key == "points") {
            if (!(ls >> count)) throw fail();
            break;
        }
        if (key == "dim") {
            if (!(ls >> config.dim) || !IsSupportedDim(config.dim)) throw fail();
        } else if (key == "arena_min") {
            config.arena_min = ReadVector(ls, config.dim, line_no);
        } else if (key == "arena_max") {
            config.arena_max = ReadVector(ls, config.dim, line_no);
        } else if (key == "lambda") {
            if (!(ls >> config.kernel.lambda)) throw fail();
        } else if (key == "kernel") {
            std::string v;
            ls >> v;
            config.kernel.kind = KernelKindFromString(v);
        } else if (key == "sigma2") {
            if (!(ls >> config.kernel.sigma2)) throw fail();
        } else if (key == "noise_y") {
            if (!(ls >> config.kernel.noise_y)) throw fail();
        } else if (key == "noise_grad") {
            if (!(ls >> config.kernel.noise_grad)) throw fail();
        } else if (key == "method") {
            std::string v;
            ls >> v;
            config.method = MethodFromString(v);
        } else if (key == "gradient_target") {
            std::string v;
            ls >> v;
            config.gradient_target = GradientTargetFromString(v);
        } else if (key == "blend") {
            std::string v;
            ls >> v;
            config.blend = BlendModeFromString(v);
        } else if (key == "additive_cutoff") {
            if (!(ls >> config.additive_cutoff)) throw fail();
        } else if (key == "latent_floor") {
            if (!(ls >> config.field.latent_floor)) throw fail();
        } else if (key == "leaf_capacity") {
            if (!(ls >> config.leaf_capacity)) throw fail();
        } else if (key == "support_margin") {
            if (!(ls >> config.support_margin)) throw fail();
        } else if (key == "fuse_radius") {
            if (!(ls >> config.fuse_radius)) throw fail();
        } else if (key == "max_fuse_angle") {
            if (!(ls >> config.max_fuse_angle)) throw fail();
        } else if (key == "min_leaf_size") {
            if (!(ls >> config.min_leaf_size)) throw fail();
        } else {
            throw Error(ErrorCode::kParse,
                        path + ": unknown key '" + key + "' at line " + std::to_string(line_no));
        }
    }
    std::vector<SurfacePoint> points;
    points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto ls = next();
        SurfacePoint sp;
        sp.position = ReadVector(ls, config.dim, line_no);
        sp.normal = ReadVector(ls, config.dim, line_no);
        if (!(ls >> sp.pos_noise >> sp.obs_count)) {
            throw Error(ErrorCode::kParse, path + ": bad point record at line " +
                                               std::to_string(line_no));
        }
        points.push_back(std::move(sp));
    }
    return FromPoints(std::move(config), points);
}

ClusterMap ClusterMap::FromPoints(MapConfig config, std::span<const SurfacePoint> points) {
    // Stored points are already fused; replay them without fusion.
    const double fuse_radius = config.fuse_radius;
    config.fuse_radius = 0.0;
    ClusterMap map(std::move(config));
    map.Insert(points);
    map.config_.fuse_radius = fuse_radius;
    map.RefitDirty();
    return map;
}

}  // namespace loggpis
