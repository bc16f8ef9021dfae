#pragma once

#include <memory>

#include "loggpis/types.hpp"

namespace loggpis {

/// Nearest-neighbour index over a fixed 2D or 3D point set (R-tree).
class PointIndex {
public:
    explicit PointIndex(Points cloud);
    PointIndex(PointIndex &&) noexcept;
    PointIndex &operator=(PointIndex &&) noexcept;
    ~PointIndex();

    [[nodiscard]] int dim() const { return static_cast<int>(cloud_.cols()); }
    [[nodiscard]] const Points &points() const { return cloud_; }
    /// Row of the nearest point; near-ties resolve to the exact minimum
    /// among a few R-tree candidates, lowest row first.
    [[nodiscard]] int Nearest(const Eigen::Ref<const Vector> &x) const;
    /// Pairwise scan over every point, the reference for Nearest.
    [[nodiscard]] int NearestBruteForce(const Eigen::Ref<const Vector> &x) const;

private:
    struct Tree;
    Points cloud_;
    std::unique_ptr<Tree> tree_;
};

}  // namespace loggpis
