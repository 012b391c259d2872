#pragma once

// Radial kernels, Gram matrices and symmetric positive definite solves.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <string_view>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "kswarm/errors.hpp"
#include "kswarm/types.hpp"

namespace kswarm {

enum class KernelFamily { matern52, gaussian, wendland_c2 };

inline std::string_view to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::matern52: return "matern52";
        case KernelFamily::gaussian: return "gaussian";
        case KernelFamily::wendland_c2: return "wendland_c2";
    }
    return "unknown";
}

inline std::optional<KernelFamily> parse_kernel_family(std::string_view name) {
    if (name == "matern52") return KernelFamily::matern52;
    if (name == "gaussian") return KernelFamily::gaussian;
    if (name == "wendland_c2") return KernelFamily::wendland_c2;
    return std::nullopt;
}

/// Isotropic kernel with output scale sigma and length scale ell.
/// For wendland_c2, ell is the support radius. Every family satisfies
/// k(x, x) = sigma^2.
template <class Scalar>
struct KernelSpecT {
    KernelFamily family = KernelFamily::matern52;
    Scalar sigma = Scalar(1);
    Scalar ell = Scalar(1);
    int dim = 2;

    KernelSpecT() = default;
    KernelSpecT(KernelFamily f, Scalar s, Scalar l, int d) : family(f), sigma(s), ell(l), dim(d) {
        validate();
    }

    void validate() const {
        if (!(sigma > Scalar(0)) || !std::isfinite(static_cast<double>(sigma)))
            throw InvalidArgument("kernel sigma must be positive and finite");
        if (!(ell > Scalar(0)) || !std::isfinite(static_cast<double>(ell)))
            throw InvalidArgument("kernel ell must be positive and finite");
        if (dim < 1) throw InvalidArgument("kernel dim must be >= 1");
    }

    Scalar variance() const { return sigma * sigma; }

    // Both hyperparameters multiplied by c.
    KernelSpecT scaled(Scalar c) const { return KernelSpecT(family, c * sigma, c * ell, dim); }

    friend bool operator==(const KernelSpecT&, const KernelSpecT&) = default;
};

using KernelSpec = KernelSpecT<double>;

/// Kernel value as a function of the distance r >= 0.
template <class Scalar>
Scalar eval_radial(const KernelSpecT<Scalar>& spec, Scalar r) {
    using std::exp;
    using std::sqrt;
    const Scalar s2 = spec.variance();
    switch (spec.family) {
        case KernelFamily::matern52: {
            const Scalar a = sqrt(Scalar(5)) * r / spec.ell;
            return s2 * (Scalar(1) + a + a * a / Scalar(3)) * exp(-a);
        }
        case KernelFamily::gaussian: {
            const Scalar u = r / spec.ell;
            return s2 * exp(-u * u / Scalar(2));
        }
        case KernelFamily::wendland_c2: {
            const Scalar u = r / spec.ell;
            if (u >= Scalar(1)) return Scalar(0);
            const Scalar v = Scalar(1) - u;
            const Scalar v2 = v * v;
            return s2 * v2 * v2 * (Scalar(4) * u + Scalar(1));
        }
    }
    return Scalar(0);
}

namespace detail {

template <class Scalar, class A, class B>
Scalar distance(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) {
    Scalar acc(0);
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const Scalar d = Scalar(x(k)) - Scalar(y(k));
        acc += d * d;
    }
    using std::sqrt;
    return sqrt(acc);
}

// Unchecked evaluation for inner loops whose inputs were validated upstream.
template <class Scalar, class A, class B>
Scalar eval_unchecked(const KernelSpecT<Scalar>& spec, const Eigen::MatrixBase<A>& x,
                      const Eigen::MatrixBase<B>& y) {
    return eval_radial(spec, distance<Scalar>(x, y));
}

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& x) {
    for (Eigen::Index k = 0; k < x.size(); ++k)
        if (!std::isfinite(static_cast<double>(x(k)))) return false;
    return true;
}

}  // namespace detail

template <class Scalar, class Derived>
void check_point(const KernelSpecT<Scalar>& spec, const Eigen::MatrixBase<Derived>& x) {
    if (x.size() != spec.dim)
        throw DimensionError("point has dimension " + std::to_string(x.size()) + ", kernel expects " +
                             std::to_string(spec.dim));
    if (!detail::all_finite(x)) throw InvalidArgument("point has non-finite coordinates");
}

template <class Scalar>
void check_points(const KernelSpecT<Scalar>& spec, const PointSetT<Scalar>& z) {
    if (z.rows() == 0) return;
    if (z.cols() != spec.dim)
        throw DimensionError("point set has dimension " + std::to_string(z.cols()) + ", kernel expects " +
                             std::to_string(spec.dim));
    if (!detail::all_finite(z)) throw InvalidArgument("point set has non-finite coordinates");
}

template <class Scalar, class A, class B>
Scalar eval(const KernelSpecT<Scalar>& spec, const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) {
    check_point(spec, x);
    check_point(spec, y);
    return detail::eval_unchecked(spec, x, y);
}

/// Gram matrix with entries k(z1_i, z2_j). Empty inputs give 0 x n or m x 0.
template <class Scalar>
MatrixT<Scalar> gram(const KernelSpecT<Scalar>& spec, const PointSetT<Scalar>& z1, const PointSetT<Scalar>& z2) {
    check_points(spec, z1);
    check_points(spec, z2);
    MatrixT<Scalar> g(z1.rows(), z2.rows());
    const bool symmetric = &z1 == &z2;
    for (Eigen::Index j = 0; j < z2.rows(); ++j) {
        for (Eigen::Index i = symmetric ? j : 0; i < z1.rows(); ++i) {
            g(i, j) = detail::eval_unchecked(spec, z1.row(i), z2.row(j));
            if (symmetric) g(j, i) = g(i, j);
        }
    }
    return g;
}

template <class Scalar>
MatrixT<Scalar> gram(const KernelSpecT<Scalar>& spec, const PointSetT<Scalar>& z) {
    return gram(spec, z, z);
}

/// The column k(Z, x).
template <class Scalar, class Derived>
VectorT<Scalar> kernel_column(const KernelSpecT<Scalar>& spec, const PointSetT<Scalar>& z,
                              const Eigen::MatrixBase<Derived>& x) {
    check_point(spec, x);
    check_points(spec, z);
    VectorT<Scalar> k(z.rows());
    for (Eigen::Index i = 0; i < z.rows(); ++i) k(i) = detail::eval_unchecked(spec, z.row(i), x);
    return k;
}

template <class Scalar>
struct SpdSolution {
    MatrixT<Scalar> x;
    Scalar jitter = Scalar(0);  // diagonal shift actually used
};

inline constexpr int kJitterEscalations = 8;

/// Cholesky factor of G + jI with the same jitter escalation as solve_spd.
template <class Scalar>
std::pair<Eigen::LLT<MatrixT<Scalar>>, Scalar> factor_spd(const MatrixT<Scalar>& g, Scalar jitter0,
                                                          std::string_view context = "Gram matrix") {
    if (g.rows() != g.cols()) throw DimensionError("factor_spd: matrix is not square");
    Scalar jitter(0);
    for (int attempt = 0; attempt <= kJitterEscalations + 1; ++attempt) {
        if (attempt == 1) jitter = jitter0;
        if (attempt > 1) jitter *= Scalar(10);
        if (attempt > 0 && jitter == Scalar(0)) break;
        MatrixT<Scalar> shifted = g;
        shifted.diagonal().array() += jitter;
        Eigen::LLT<MatrixT<Scalar>> llt(shifted);
        if (llt.info() == Eigen::Success) return {std::move(llt), jitter};
    }
    throw SingularGramError(std::string(context) + " (" + std::to_string(g.rows()) +
                            " centers) is not positive definite after jitter escalation");
}

/// Solves (G + jI) X = B with the smallest j in {0, j0, 10 j0, ..., 10^8 j0}
/// for which a Cholesky factorization succeeds.
template <class Scalar, class Derived>
SpdSolution<Scalar> solve_spd(const MatrixT<Scalar>& g, const Eigen::MatrixBase<Derived>& b, Scalar jitter0,
                              std::string_view context = "Gram matrix") {
    if (g.rows() != g.cols()) throw DimensionError("solve_spd: matrix is not square");
    if (b.rows() != g.rows()) throw DimensionError("solve_spd: right-hand side has wrong row count");
    if (jitter0 < Scalar(0)) throw InvalidArgument("solve_spd: jitter0 must be non-negative");
    SpdSolution<Scalar> out;
    if (g.rows() == 0) {
        out.x = MatrixT<Scalar>(0, b.cols());
        return out;
    }
    auto [llt, jitter] = factor_spd(g, jitter0, context);
    out.x = llt.solve(b.derived());
    out.jitter = jitter;
    return out;
}

template <class Scalar>
Scalar default_jitter(const KernelSpecT<Scalar>& spec) {
    return Scalar(1e-12) * spec.variance();
}

/// Cholesky factor of a Gram matrix that grows one center at a time.
/// Appending a center with kernel column k and self-value kxx adds the row
/// [w^T, sqrt(kxx - w^T w)] with w = L^{-1} k; the new pivot is exactly the
/// power function of the previous centers at the new point.
template <class Scalar>
class GramFactorT {
public:
    Eigen::Index size() const { return n_; }

    auto lower() const { return storage_.topLeftCorner(n_, n_).template triangularView<Eigen::Lower>(); }

    /// w = L^{-1} k
    VectorT<Scalar> forward(const VectorT<Scalar>& k) const {
        VectorT<Scalar> w = k;
        if (n_ > 0) w = lower().solve(w);
        return w;
    }

    /// G^{-1} b through the stored factor.
    VectorT<Scalar> solve(const VectorT<Scalar>& b) const {
        VectorT<Scalar> w = forward(b);
        return back(w);
    }

    /// L^{-T} w
    VectorT<Scalar> back(VectorT<Scalar> w) const {
        if (n_ > 0) w = storage_.topLeftCorner(n_, n_).transpose().template triangularView<Eigen::Upper>().solve(w);
        return w;
    }

    /// Appends a center given w = L^{-1} k(Z, x) and pivot = sqrt(k(x,x) - |w|^2).
    void append(const VectorT<Scalar>& w, Scalar pivot) {
        if (w.size() != n_) throw DimensionError("GramFactor::append: wrong column length");
        if (!(pivot > Scalar(0))) throw SingularGramError("GramFactor::append: non-positive pivot");
        reserve(n_ + 1);
        storage_.row(n_).head(n_) = w.transpose();
        storage_(n_, n_) = pivot;
        ++n_;
    }

    void clear() { n_ = 0; }

private:
    void reserve(Eigen::Index n) {
        if (n <= storage_.rows()) return;
        Eigen::Index cap = std::max<Eigen::Index>(16, storage_.rows());
        while (cap < n) cap *= 2;
        MatrixT<Scalar> grown = MatrixT<Scalar>::Zero(cap, cap);
        grown.topLeftCorner(n_, n_) = storage_.topLeftCorner(n_, n_);
        storage_ = std::move(grown);
    }

    MatrixT<Scalar> storage_;
    Eigen::Index n_ = 0;
};

using GramFactor = GramFactorT<double>;

}  // namespace kswarm
