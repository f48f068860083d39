#pragma once

#include <vector>

#include "assist/rng.hpp"
#include "assist/types.hpp"

namespace assist::testing {

inline DenseMatrix random_matrix(Rng& rng, int rows, int cols, double lo = -1.0,
                                 double hi = 1.0) {
  DenseMatrix m(rows, cols);
  for (double& x : m.values) x = rng.uniform(lo, hi);
  return m;
}

inline DenseMatrix from_rows(const std::vector<std::vector<double>>& rows) {
  DenseMatrix m(static_cast<int>(rows.size()),
                static_cast<int>(rows.front().size()));
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

// Dataset of random predictors (and p random covariates) with the given raw
// responses, drawing responses uniformly from [-1, 1] when none are given.
inline Dataset random_dataset(Rng& rng, int n, int d1, int d2, int p = 0,
                              std::vector<double> raw_responses = {}) {
  std::vector<DenseMatrix> preds;
  preds.reserve(n);
  for (int i = 0; i < n; ++i) preds.push_back(random_matrix(rng, d1, d2));
  std::vector<std::vector<double>> covs;
  if (p > 0) {
    covs.resize(n);
    for (auto& row : covs) {
      for (int k = 0; k < p; ++k) row.push_back(rng.uniform(-1.0, 1.0));
    }
  }
  if (raw_responses.empty()) {
    raw_responses.reserve(n);
    for (int i = 0; i < n; ++i) raw_responses.push_back(rng.uniform(-1.0, 1.0));
  }
  return make_dataset(std::move(preds), std::move(covs), raw_responses);
}

// Trace function with dense random factors (support budgets set to full size).
inline TraceFunction random_trace_function(Rng& rng, int d1, int d2, int r,
                                           int p = 0) {
  TraceFunction tf;
  tf.u = random_matrix(rng, d1, r);
  tf.v = random_matrix(rng, d2, r);
  tf.rank_budget = r;
  tf.s1 = d1;
  tf.s2 = d2;
  tf.intercept = rng.uniform(-0.5, 0.5);
  tf.covariate_coeffs.resize(p);
  for (double& c : tf.covariate_coeffs) c = rng.uniform(-1.0, 1.0);
  return tf;
}

}  // namespace assist::testing
