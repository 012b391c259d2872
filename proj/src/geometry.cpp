#include "kswarm/geometry.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

#include "kswarm/errors.hpp"

namespace kswarm {

Rect::Rect(Point lo_, Point hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
    if (lo.size() != hi.size() || lo.size() == 0) throw DimensionError("Rect: lo and hi dimensions differ");
    if (!is_valid()) throw InvalidArgument("Rect: require lo < hi in every dimension");
}

bool Rect::is_valid() const {
    if (lo.size() != hi.size() || lo.size() == 0) return false;
    for (Eigen::Index k = 0; k < lo.size(); ++k)
        if (!(lo(k) < hi(k)) || !std::isfinite(lo(k)) || !std::isfinite(hi(k))) return false;
    return true;
}

bool Rect::contains(const Rect& other) const {
    return contains(other.lo) && contains(other.hi);
}

Rect Rect::intersect(const Rect& other) const {
    Rect r;
    r.lo = lo.cwiseMax(other.lo);
    r.hi = hi.cwiseMin(other.hi);
    return r;
}

namespace {

std::vector<Eigen::Index> validation_counts(int dim) {
    const auto per_dim = static_cast<Eigen::Index>(std::lround(std::pow(40000.0, 1.0 / dim)));
    return std::vector<Eigen::Index>(dim, std::max<Eigen::Index>(2, per_dim));
}

}  // namespace

Cover::Cover(Rect omega, std::vector<Rect> subdomains)
    : omega_(std::move(omega)), subdomains_(std::move(subdomains)) {
    if (!omega_.is_valid()) throw InvalidArgument("cover: omega is not a valid box");
    if (subdomains_.empty()) throw InvalidArgument("cover: no subdomains");
    if (subdomains_.size() > 64) throw InvalidArgument("cover: at most 64 subdomains");
    for (std::size_t i = 0; i < subdomains_.size(); ++i) {
        const auto& s = subdomains_[i];
        if (s.dim() != omega_.dim() || !s.is_valid())
            throw InvalidArgument("cover: subdomain " + std::to_string(i + 1) + " is not a valid box");
        if (!omega_.contains(s))
            throw InvalidArgument("cover: subdomain " + std::to_string(i + 1) + " is not inside omega");
    }
    const PointSet probe = grid_points(omega_, validation_counts(omega_.dim()));
    for (Eigen::Index p = 0; p < probe.rows(); ++p) {
        if (membership(probe.row(p)) == 0)
            throw InvalidArgument("cover: subdomains do not cover omega (gap near validation point " +
                                  std::to_string(p) + ")");
    }
}

Cover Cover::orthants(const Rect& omega, double overlap) {
    if (!(overlap >= 0.0)) throw InvalidArgument("orthants: overlap must be non-negative");
    const int d = omega.dim();
    if (d > 6) throw InvalidArgument("orthants: dimension too large");
    const Point mid = omega.center();
    const Point pad = omega.extent() / 2.0 * overlap;
    std::vector<Rect> subs;
    for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << d); ++idx) {
        Point lo(d), hi(d);
        for (int k = 0; k < d; ++k) {
            const bool upper = (idx >> k) & 1u;
            lo(k) = upper ? mid(k) - pad(k) : omega.lo(k);
            hi(k) = upper ? omega.hi(k) : mid(k) + pad(k);
            lo(k) = std::max(lo(k), omega.lo(k));
            hi(k) = std::min(hi(k), omega.hi(k));
        }
        subs.emplace_back(lo, hi);
    }
    return Cover(omega, std::move(subs));
}

PartitionOfUnity::PartitionOfUnity(Cover cover) : cover_(std::move(cover)) {}

PartitionOfUnity::PartitionOfUnity(Cover cover, Table table)
    : cover_(std::move(cover)), kind_(PouKind::custom_table), table_(std::move(table)) {
    const int n = cover_.size();
    for (const auto& [mask, w] : table_) {
        const std::string label = "pou table entry for membership mask " + std::to_string(mask);
        if (mask == 0 || (n < 64 && (mask >> n) != 0)) throw InvalidArgument(label + ": invalid mask");
        if (static_cast<int>(w.size()) != n) throw InvalidArgument(label + ": needs one weight per subdomain");
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            if (!(w[i] >= 0.0 && w[i] <= 1.0)) throw InvalidArgument(label + ": weights must lie in [0,1]");
            if (w[i] != 0.0 && !((mask >> i) & 1u))
                throw InvalidArgument(label + ": weight on subdomain " + std::to_string(i + 1) +
                                      " outside its support");
            sum += w[i];
        }
        if (std::abs(sum - 1.0) > 1e-12) throw InvalidArgument(label + ": weights must sum to 1");
    }
}

PouWeights pou_weights(const PartitionOfUnity& pou, const Eigen::Ref<const Point>& x) {
    const Cover& cover = pou.cover();
    PouWeights out;
    out.w = Vector::Zero(cover.size());
    if (!cover.omega().contains(x)) {
        out.inside = false;
        return out;
    }
    const std::uint64_t mask = cover.membership(x);
    if (mask == 0) {
        out.inside = false;
        return out;
    }
    if (pou.kind() == PouKind::custom_table) {
        if (auto it = pou.table().find(mask); it != pou.table().end()) {
            for (int i = 0; i < cover.size(); ++i) out.w(i) = it->second[i];
            return out;
        }
    }
    const double share = 1.0 / static_cast<double>(std::popcount(mask));
    for (int i = 0; i < cover.size(); ++i)
        if ((mask >> i) & 1u) out.w(i) = share;
    return out;
}

std::vector<Eigen::Index> grid_counts(const Rect& a, double resolution) {
    if (!(resolution > 0.0)) throw InvalidArgument("grid resolution must be positive");
    std::vector<Eigen::Index> counts(a.dim());
    for (int k = 0; k < a.dim(); ++k) {
        const double cells = std::ceil((a.hi(k) - a.lo(k)) / resolution - 1e-9);
        counts[k] = static_cast<Eigen::Index>(std::max(1.0, cells)) + 1;
    }
    return counts;
}

namespace {

double grid_coord(const Rect& a, int k, Eigen::Index i, Eigen::Index n) {
    if (i == n - 1) return a.hi(k);
    return a.lo(k) + (a.hi(k) - a.lo(k)) * static_cast<double>(i) / static_cast<double>(n - 1);
}

}  // namespace

PointSet grid_points(const Rect& a, const std::vector<Eigen::Index>& counts) {
    const int d = a.dim();
    if (static_cast<int>(counts.size()) != d) throw DimensionError("grid_points: counts dimension mismatch");
    Eigen::Index total = 1;
    for (auto c : counts) {
        if (c < 2) throw InvalidArgument("grid_points: need at least 2 points per dimension");
        total *= c;
    }
    PointSet pts(total, d);
    std::vector<Eigen::Index> idx(d, 0);
    for (Eigen::Index p = 0; p < total; ++p) {
        for (int k = 0; k < d; ++k) pts(p, k) = grid_coord(a, k, idx[k], counts[k]);
        for (int k = 0; k < d; ++k) {
            if (++idx[k] < counts[k]) break;
            idx[k] = 0;
        }
    }
    return pts;
}

PointSet grid_points(const Rect& a, double resolution) { return grid_points(a, grid_counts(a, resolution)); }

FillDistance fill_distance(const PointSet& z, const Rect& a, double resolution) {
    FillDistance out;
    const auto counts = grid_counts(a, resolution);
    double spacing_sq = 0.0;
    for (int k = 0; k < a.dim(); ++k) {
        const double s = (a.hi(k) - a.lo(k)) / static_cast<double>(counts[k] - 1);
        spacing_sq += s * s;
    }
    out.grid_bound = std::sqrt(spacing_sq) / 2.0;
    if (z.rows() == 0) {
        out.value = std::numeric_limits<double>::infinity();
        out.empty = true;
        return out;
    }
    if (z.cols() != a.dim()) throw DimensionError("fill_distance: point dimension mismatch");
    const PointSet grid = grid_points(a, counts);
    // Max of mins: a grid point whose nearest-so-far is already below the
    // running max cannot raise it, so its scan stops early.
    double best_sq = 0.0;
    Eigen::Index start = 0;
    for (Eigen::Index p = 0; p < grid.rows(); ++p) {
        double nearest = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < z.rows(); ++j) {
            const Eigen::Index i = (start + j) % z.rows();
            const double d2 = (grid.row(p) - z.row(i)).squaredNorm();
            if (d2 < nearest) {
                nearest = d2;
                if (nearest <= best_sq) {
                    start = i;
                    break;
                }
            }
        }
        best_sq = std::max(best_sq, nearest);
    }
    out.value = std::sqrt(best_sq);
    return out;
}

namespace {

// Serpentine order over a multi-index grid: the sweep over dimensions < k
// reverses whenever the index in dimension k is odd.
void snake(const std::vector<Eigen::Index>& counts, int k, bool reversed, std::vector<Eigen::Index>& idx,
           std::vector<std::vector<Eigen::Index>>& out) {
    const Eigen::Index n = counts[k];
    for (Eigen::Index step = 0; step < n; ++step) {
        idx[k] = reversed ? n - 1 - step : step;
        if (k == 0) {
            out.push_back(idx);
        } else {
            snake(counts, k - 1, (step % 2) == 1, idx, out);
        }
    }
}

}  // namespace

PointSet lawnmower_path(const Rect& a, double grid_resolution) {
    const auto counts = grid_counts(a, grid_resolution);
    const int d = a.dim();
    std::vector<std::vector<Eigen::Index>> order;
    std::vector<Eigen::Index> idx(d, 0);
    snake(counts, d - 1, false, idx, order);
    PointSet path(static_cast<Eigen::Index>(order.size()), d);
    for (std::size_t p = 0; p < order.size(); ++p)
        for (int k = 0; k < d; ++k)
            path(static_cast<Eigen::Index>(p), k) = grid_coord(a, k, order[p][k], counts[k]);
    return path;
}

PointSet reflect_path(const PointSet& path, const Rect& a, std::uint64_t mask) {
    PointSet out = path;
    for (int k = 0; k < a.dim(); ++k) {
        if (!((mask >> k) & 1u)) continue;
        // Clamped: the mirror image can round past the faces.
        for (Eigen::Index p = 0; p < out.rows(); ++p)
            out(p, k) = std::clamp(a.hi(k) - (path(p, k) - a.lo(k)), a.lo(k), a.hi(k));
    }
    return out;
}

Trajectory refine_schedule(const Rect& a, const std::vector<double>& resolutions) {
    if (resolutions.empty()) throw InvalidArgument("refine_schedule: empty schedule");
    for (std::size_t s = 1; s < resolutions.size(); ++s)
        if (!(resolutions[s] < resolutions[s - 1]))
            throw InvalidArgument("refine_schedule: resolutions must be strictly decreasing");
    Trajectory t;
    t.points.resize(0, a.dim());
    for (double rho : resolutions) {
        const PointSet stage = lawnmower_path(a, rho);
        const Eigen::Index n = t.points.rows();
        t.points.conservativeResize(n + stage.rows(), a.dim());
        t.points.bottomRows(stage.rows()) = stage;
        t.stage_ends.push_back(t.points.rows());
    }
    return t;
}

}  // namespace kswarm
