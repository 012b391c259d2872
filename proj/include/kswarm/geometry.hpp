#pragma once

// Rectangular domains, covers, partitions of unity, fill distance and
// lawnmower trajectories.

#include <cstdint>
#include <map>
#include <vector>

#include "kswarm/types.hpp"

namespace kswarm {

/// Closed axis-aligned box [lo, hi].
struct Rect {
    Point lo;
    Point hi;

    Rect() = default;
    Rect(Point lo_, Point hi_);

    int dim() const { return static_cast<int>(lo.size()); }
    Point extent() const { return hi - lo; }
    Point center() const { return (lo + hi) / 2.0; }

    template <class Derived>
    bool contains(const Eigen::MatrixBase<Derived>& x) const {
        for (Eigen::Index k = 0; k < lo.size(); ++k)
            if (x(k) < lo(k) || x(k) > hi(k)) return false;
        return true;
    }

    bool contains(const Rect& other) const;
    Rect intersect(const Rect& other) const;  // may be degenerate; check with is_valid
    bool is_valid() const;

    friend bool operator==(const Rect& a, const Rect& b) { return a.lo == b.lo && a.hi == b.hi; }
};

/// Subdomains whose union is omega.
class Cover {
public:
    Cover() = default;
    Cover(Rect omega, std::vector<Rect> subdomains);

    /// 2^d orthant boxes of omega, each widened by overlap * (half width)
    /// per side and clipped to omega. Index bit k selects the upper half in
    /// dimension k, so for d = 2 the order is lower-left, lower-right,
    /// upper-left, upper-right.
    static Cover orthants(const Rect& omega, double overlap);

    const Rect& omega() const { return omega_; }
    const std::vector<Rect>& subdomains() const { return subdomains_; }
    int size() const { return static_cast<int>(subdomains_.size()); }
    int dim() const { return omega_.dim(); }

    /// Bit i set when x lies in subdomain i.
    template <class Derived>
    std::uint64_t membership(const Eigen::MatrixBase<Derived>& x) const {
        std::uint64_t m = 0;
        for (std::size_t i = 0; i < subdomains_.size(); ++i)
            if (subdomains_[i].contains(x)) m |= std::uint64_t{1} << i;
        return m;
    }

private:
    Rect omega_;
    std::vector<Rect> subdomains_;
};

enum class PouKind { overlap_average, custom_table };

/// Piecewise-constant partition of unity keyed by subdomain membership.
/// custom_table entries override the overlap average for the membership
/// patterns they list.
class PartitionOfUnity {
public:
    using Table = std::map<std::uint64_t, std::vector<double>>;

    PartitionOfUnity() = default;
    explicit PartitionOfUnity(Cover cover);
    PartitionOfUnity(Cover cover, Table table);

    const Cover& cover() const { return cover_; }
    PouKind kind() const { return kind_; }
    const Table& table() const { return table_; }

private:
    Cover cover_;
    PouKind kind_ = PouKind::overlap_average;
    Table table_;
};

struct PouWeights {
    Vector w;
    bool inside = true;  // false when x is outside omega; w is then all zero
};

PouWeights pou_weights(const PartitionOfUnity& pou, const Eigen::Ref<const Point>& x);

/// Uniform grid over a with n_k points per dimension (dimension 0 fastest).
PointSet grid_points(const Rect& a, const std::vector<Eigen::Index>& counts);

/// Uniform grid with spacing <= resolution that includes both faces.
PointSet grid_points(const Rect& a, double resolution);

/// Points per dimension of the resolution grid used by grid_points.
std::vector<Eigen::Index> grid_counts(const Rect& a, double resolution);

struct FillDistance {
    double value = 0.0;
    double grid_bound = 0.0;  // true sup is at most value + grid_bound
    bool empty = false;       // Z was empty; value is +inf
};

/// Grid lower estimate of sup_{x in A} min_{z in Z} |x - z|.
FillDistance fill_distance(const PointSet& z, const Rect& a, double resolution);

/// Boustrophedon sweep of a starting at lo: dimension 0 sweeps alternate
/// direction from row to row. Spacing is at most grid_resolution and the
/// faces of a are included.
PointSet lawnmower_path(const Rect& a, double grid_resolution);

/// Reflects every point through the center of a in each dimension whose bit
/// is set in mask. Used to start sweeps from corners other than lo.
PointSet reflect_path(const PointSet& path, const Rect& a, std::uint64_t mask);

struct Trajectory {
    PointSet points;
    std::vector<Eigen::Index> stage_ends;  // one past the last index of each stage
};

/// Lawnmower paths at each resolution, concatenated. Resolutions must be
/// strictly decreasing.
Trajectory refine_schedule(const Rect& a, const std::vector<double>& resolutions);

}  // namespace kswarm
