#pragma once

#include <Eigen/Core>

namespace kswarm {

// A point of X = R^d as a column vector.
template <class Scalar>
using PointT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// A list of points, one per row.
template <class Scalar>
using PointSetT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Point = PointT<double>;
using PointSet = PointSetT<double>;
using Vector = VectorT<double>;
using Matrix = MatrixT<double>;

// Append one point (any vector expression) as a new row.
template <class Scalar, class Derived>
void append_row(PointSetT<Scalar>& set, const Eigen::MatrixBase<Derived>& p) {
    const Eigen::Index n = set.rows();
    set.conservativeResize(n + 1, p.size());
    for (Eigen::Index k = 0; k < p.size(); ++k) set(n, k) = p(k);
}

}  // namespace kswarm
