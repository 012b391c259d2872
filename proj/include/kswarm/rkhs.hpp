#pragma once

// Finite kernel expansions f = sum_l alpha_l k(xi_l, .) and the quantities
// built on them: interpolation, native-space norms and the power function.

#include <string>
#include <utility>

#include "kswarm/errors.hpp"
#include "kswarm/kernel.hpp"
#include "kswarm/log.hpp"
#include "kswarm/types.hpp"

namespace kswarm {

namespace detail {

// Tiny negatives are roundoff; anything below -1e-10 sigma^2 is a bug.
template <class Scalar>
Scalar clamp_quadratic(Scalar value, Scalar variance, const char* what) {
    if (value >= Scalar(0)) return value;
    if (value >= Scalar(-1e-10) * variance) return Scalar(0);
    throw ConsistencyError(std::string(what) + " is negative beyond roundoff: " +
                           std::to_string(static_cast<double>(value)));
}

template <class Scalar, class Derived>
bool contains_row(const PointSetT<Scalar>& z, const Eigen::MatrixBase<Derived>& x) {
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        bool same = true;
        for (Eigen::Index k = 0; k < z.cols() && same; ++k) same = z(i, k) == x(k);
        if (same) return true;
    }
    return false;
}

template <class Scalar>
void require_distinct(const PointSetT<Scalar>& z) {
    for (Eigen::Index i = 1; i < z.rows(); ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            if (z.row(i) == z.row(j))
                throw InvalidArgument("duplicate center at rows " + std::to_string(j) + " and " +
                                      std::to_string(i));
        }
    }
}

}  // namespace detail

template <class Scalar>
class KernelExpansionT {
public:
    KernelExpansionT() = default;

    /// The zero function.
    explicit KernelExpansionT(KernelSpecT<Scalar> spec) : spec_(std::move(spec)), centers_(0, spec_.dim) {}

    KernelExpansionT(KernelSpecT<Scalar> spec, PointSetT<Scalar> centers, VectorT<Scalar> coefficients)
        : spec_(std::move(spec)), centers_(std::move(centers)), coefficients_(std::move(coefficients)) {
        if (centers_.rows() == 0) centers_.resize(0, spec_.dim);
        check_points(spec_, centers_);
        if (coefficients_.size() != centers_.rows())
            throw DimensionError("expansion: " + std::to_string(coefficients_.size()) + " coefficients for " +
                                 std::to_string(centers_.rows()) + " centers");
        detail::require_distinct(centers_);
    }

    const KernelSpecT<Scalar>& spec() const { return spec_; }
    const PointSetT<Scalar>& centers() const { return centers_; }
    const VectorT<Scalar>& coefficients() const { return coefficients_; }
    Eigen::Index size() const { return centers_.rows(); }
    bool empty() const { return centers_.rows() == 0; }

    void set_coefficients(VectorT<Scalar> alpha) {
        if (alpha.size() != centers_.rows()) throw DimensionError("set_coefficients: length mismatch");
        coefficients_ = std::move(alpha);
    }

    /// Adds a center with coefficient c; rejects duplicates.
    template <class Derived>
    void add_center(const Eigen::MatrixBase<Derived>& x, Scalar c) {
        check_point(spec_, x);
        if (detail::contains_row(centers_, x)) throw InvalidArgument("add_center: duplicate center");
        append_row(centers_, x);
        coefficients_.conservativeResize(coefficients_.size() + 1);
        coefficients_(coefficients_.size() - 1) = c;
    }

private:
    KernelSpecT<Scalar> spec_;
    PointSetT<Scalar> centers_;
    VectorT<Scalar> coefficients_;
};

using KernelExpansion = KernelExpansionT<double>;

template <class Scalar, class Derived>
Scalar evaluate(const KernelExpansionT<Scalar>& f, const Eigen::MatrixBase<Derived>& x) {
    check_point(f.spec(), x);
    Scalar acc(0);
    const auto& z = f.centers();
    const auto& a = f.coefficients();
    for (Eigen::Index l = 0; l < z.rows(); ++l) acc += a(l) * detail::eval_unchecked(f.spec(), z.row(l), x);
    return acc;
}

/// Values of f at each row of xs.
template <class Scalar>
VectorT<Scalar> evaluate_all(const KernelExpansionT<Scalar>& f, const PointSetT<Scalar>& xs) {
    VectorT<Scalar> out(xs.rows());
    for (Eigen::Index i = 0; i < xs.rows(); ++i) out(i) = evaluate(f, xs.row(i));
    return out;
}

/// alpha = K(Z,Z)^{-1} values, so the expansion on Z interpolates the data.
template <class Scalar>
VectorT<Scalar> interpolation_coefficients(const KernelSpecT<Scalar>& spec, const PointSetT<Scalar>& z,
                                           const VectorT<Scalar>& values) {
    if (values.size() != z.rows()) throw DimensionError("interpolation: values length differs from centers");
    const auto sol = solve_spd(gram(spec, z), values, default_jitter(spec), "interpolation Gram");
    if (sol.jitter > Scalar(0))
        log::warn("interpolation Gram needed jitter " + std::to_string(static_cast<double>(sol.jitter)));
    return sol.x.col(0);
}

template <class Scalar>
KernelExpansionT<Scalar> interpolant(const KernelSpecT<Scalar>& spec, const PointSetT<Scalar>& z,
                                     const VectorT<Scalar>& values) {
    return KernelExpansionT<Scalar>(spec, z, interpolation_coefficients(spec, z, values));
}

/// Squared power function k(x,x) - k(x,Z) K(Z,Z)^{-1} k(Z,x): the squared
/// native-space distance from k(x,.) to span{k(z,.) : z in Z}.
template <class Scalar, class Derived>
Scalar power_function_sq(const KernelSpecT<Scalar>& spec, const PointSetT<Scalar>& z,
                         const Eigen::MatrixBase<Derived>& x) {
    check_point(spec, x);
    const Scalar kxx = spec.variance();
    if (z.rows() == 0) return kxx;
    // k(x,.) is in the span exactly; the formula would leave roundoff.
    if (detail::contains_row(z, x)) return Scalar(0);
    const VectorT<Scalar> k = kernel_column(spec, z, x);
    const auto sol = solve_spd(gram(spec, z), k, default_jitter(spec), "power-function Gram");
    const Scalar p2 = kxx - k.dot(sol.x.col(0));
    return detail::clamp_quadratic(p2, spec.variance(), "power function");
}

/// alpha^T K(Xi,Xi) alpha.
template <class Scalar>
Scalar rkhs_norm_sq(const KernelExpansionT<Scalar>& f) {
    if (f.empty()) return Scalar(0);
    const MatrixT<Scalar> g = gram(f.spec(), f.centers());
    const Scalar q = f.coefficients().dot(g * f.coefficients());
    return detail::clamp_quadratic(q, f.spec().variance(), "RKHS norm");
}

/// f - g as one expansion on the union of centers; shared centers are merged.
template <class Scalar>
KernelExpansionT<Scalar> expansion_difference(const KernelExpansionT<Scalar>& f, const KernelExpansionT<Scalar>& g) {
    if (!(f.spec() == g.spec())) throw InvalidArgument("expansion difference: kernel specs differ");
    PointSetT<Scalar> z = f.centers();
    VectorT<Scalar> a = f.coefficients();
    if (z.rows() == 0) z.resize(0, f.spec().dim);
    for (Eigen::Index j = 0; j < g.size(); ++j) {
        Eigen::Index hit = -1;
        for (Eigen::Index i = 0; i < f.size() && hit < 0; ++i)
            if (f.centers().row(i) == g.centers().row(j)) hit = i;
        if (hit >= 0) {
            a(hit) -= g.coefficients()(j);
        } else {
            append_row(z, g.centers().row(j));
            a.conservativeResize(a.size() + 1);
            a(a.size() - 1) = -g.coefficients()(j);
        }
    }
    return KernelExpansionT<Scalar>(f.spec(), std::move(z), std::move(a));
}

template <class Scalar>
Scalar expansion_difference_norm_sq(const KernelExpansionT<Scalar>& f, const KernelExpansionT<Scalar>& g) {
    return rkhs_norm_sq(expansion_difference(f, g));
}

}  // namespace kswarm
