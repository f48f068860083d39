#pragma once

#include <vector>

#include "assist/types.hpp"

namespace assist {

struct TruncatedSvd {
  DenseMatrix u;                       // d1 x r, orthonormal columns
  std::vector<double> singular_values; // length r, nonincreasing
  DenseMatrix v;                       // d2 x r, orthonormal columns
};

// Best rank-r Frobenius approximation factors of m (Eckart-Young). Singular
// vector pairs are deterministically oriented: the largest-magnitude entry of
// the stacked pair (u_k, v_k) is made positive, lowest index breaking ties.
TruncatedSvd truncated_svd(const DenseMatrix& m, int r);

// Best-effort Frobenius projection onto {rank <= r, <= s1 nonzero rows,
// <= s2 nonzero columns}, with factored output for downstream consumers.
struct SparseLowRank {
  DenseMatrix matrix;      // the projected matrix, exact zeros off support
  DenseMatrix u;           // d1 x r' scaled row factors (matrix = u * v^T)
  DenseMatrix v;           // d2 x r'
  std::vector<int> row_support;
  std::vector<int> col_support;
  double distance = 0.0;   // ||matrix - m||_F
};

SparseLowRank project_sparse_lowrank_factored(const DenseMatrix& m, int r,
                                              int s1, int s2, int iters = 20);

// Spec-shaped convenience wrapper returning just the projected matrix.
DenseMatrix project_sparse_lowrank(const DenseMatrix& m, int r, int s1, int s2,
                                   int iters = 20);

}  // namespace assist
