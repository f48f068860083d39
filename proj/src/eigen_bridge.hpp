#pragma once

#include <Eigen/Dense>

#include "assist/types.hpp"

namespace assist {

using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>;

inline Eigen::MatrixXd to_eigen(const DenseMatrix& m) {
  return RowMajorMap(m.values.data(), m.rows, m.cols);
}

inline DenseMatrix from_eigen(const Eigen::MatrixXd& e) {
  DenseMatrix m(static_cast<int>(e.rows()), static_cast<int>(e.cols()));
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) m(i, j) = e(i, j);
  }
  return m;
}

}  // namespace assist
