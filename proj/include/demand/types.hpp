#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace demand {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IntVector = Eigen::VectorXi;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Derived>
typename Derived::PlainObject take_rows(const Eigen::DenseBase<Derived>& x,
                                        const std::vector<Index>& rows) {
    typename Derived::PlainObject out(static_cast<Index>(rows.size()), x.cols());
    for (Index i = 0; i < out.rows(); ++i) out.row(i) = x.row(rows[static_cast<size_t>(i)]);
    return out;
}

template <typename T>
std::vector<T> take_rows(const std::vector<T>& x, const std::vector<Index>& rows) {
    std::vector<T> out;
    out.reserve(rows.size());
    for (Index r : rows) out.push_back(x[static_cast<size_t>(r)]);
    return out;
}

}  // namespace demand
