#include "loggpis/point_index.hpp"

#include <limits>

#include <boost/geometry.hpp>
#include <boost/geometry/index/rtree.hpp>

#include "loggpis/error.hpp"

namespace loggpis {

namespace bg = boost::geometry;
namespace bgi = boost::geometry::index;

struct PointIndex::Tree {
    using P2 = bg::model::point<double, 2, bg::cs::cartesian>;
    using P3 = bg::model::point<double, 3, bg::cs::cartesian>;
    bgi::rtree<std::pair<P2, int>, bgi::rstar<16>> tree2;
    bgi::rtree<std::pair<P3, int>, bgi::rstar<16>> tree3;
};

PointIndex::PointIndex(Points cloud) : cloud_(std::move(cloud)), tree_(std::make_unique<Tree>()) {
    if (cloud_.rows() == 0) throw Error(ErrorCode::kInvalidInput, "point set is empty");
    if (!IsSupportedDim(cloud_.cols())) {
        throw Error(ErrorCode::kDimensionMismatch, "point set must be 2D or 3D");
    }
    if (!cloud_.allFinite()) throw Error(ErrorCode::kInvalidInput, "point set is not finite");
    const auto n = static_cast<int>(cloud_.rows());
    if (dim() == 2) {
        std::vector<std::pair<Tree::P2, int>> values;
        values.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) values.emplace_back(Tree::P2(cloud_(i, 0), cloud_(i, 1)), i);
        tree_->tree2 = decltype(tree_->tree2)(values);  // packing constructor
    } else {
        std::vector<std::pair<Tree::P3, int>> values;
        values.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            values.emplace_back(Tree::P3(cloud_(i, 0), cloud_(i, 1), cloud_(i, 2)), i);
        }
        tree_->tree3 = decltype(tree_->tree3)(values);
    }
}

PointIndex::PointIndex(PointIndex &&) noexcept = default;
PointIndex &PointIndex::operator=(PointIndex &&) noexcept = default;
PointIndex::~PointIndex() = default;

int PointIndex::Nearest(const Eigen::Ref<const Vector> &x) const {
    if (x.size() != dim()) throw Error(ErrorCode::kDimensionMismatch, "query dimension mismatch");
    constexpr unsigned kCandidates = 4;
    std::vector<int> ids;
    if (dim() == 2) {
        std::vector<std::pair<Tree::P2, int>> hits;
        tree_->tree2.query(bgi::nearest(Tree::P2(x(0), x(1)), kCandidates), std::back_inserter(hits));
        for (const auto &h : hits) ids.push_back(h.second);
    } else {
        std::vector<std::pair<Tree::P3, int>> hits;
        tree_->tree3.query(bgi::nearest(Tree::P3(x(0), x(1), x(2)), kCandidates),
                           std::back_inserter(hits));
        for (const auto &h : hits) ids.push_back(h.second);
    }
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int id : ids) {
        const double d = (cloud_.row(id).transpose() - x).norm();
        if (d < best_d || (d == best_d && id < best)) {
            best_d = d;
            best = id;
        }
    }
    return best;
}

int PointIndex::NearestBruteForce(const Eigen::Ref<const Vector> &x) const {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < cloud_.rows(); ++i) {
        const double d = (cloud_.row(i).transpose() - x).norm();
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

}  // namespace loggpis
