#pragma once

#include <Eigen/Dense>

namespace retq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Kronecker product of dense matrices.
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Kronecker sum: a (+) b = a x I + I x b. Both inputs square.
inline Matrix kron_sum(const Matrix& a, const Matrix& b) {
  return kron(a, Matrix::Identity(b.rows(), b.cols())) +
         kron(Matrix::Identity(a.rows(), a.cols()), b);
}

}  // namespace retq
