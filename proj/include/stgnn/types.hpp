// Common dense-matrix aliases used across the library.
#pragma once

#include <Eigen/Dense>
#include <complex>

namespace stgnn {

using Index = Eigen::Index;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrixd = DenseMatrix<double>;
using Vectord = DenseVector<double>;
using Vectorcd = DenseVector<std::complex<double>>;

}  // namespace stgnn
