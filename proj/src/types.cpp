#include "assist/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace assist {

double frobenius_norm(const DenseMatrix& m) {
  double acc = 0.0;
  for (double x : m.values) acc += x * x;
  return std::sqrt(acc);
}

double dot(const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument("dot: shape mismatch");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    acc += a.values[k] * b.values[k];
  }
  return acc;
}

void check_finite(const DenseMatrix& m, const char* what) {
  for (double x : m.values) {
    if (!std::isfinite(x)) {
      throw std::invalid_argument(std::string(what) + ": non-finite entry");
    }
  }
}

std::pair<std::vector<double>, ResponseScale> rescale_responses(
    const std::vector<double>& raw) {
  if (raw.empty()) {
    throw std::invalid_argument("rescale_responses: empty input");
  }
  for (double y : raw) {
    if (!std::isfinite(y)) {
      throw std::invalid_argument("rescale_responses: non-finite response");
    }
  }
  auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  double lo = *lo_it, hi = *hi_it;
  ResponseScale scale;
  scale.shift = 0.5 * (lo + hi);
  scale.span = (hi > lo) ? 0.5 * (hi - lo) : 1.0;
  std::vector<double> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i] = scale.to_unit(raw[i]);
    // Guard against rounding drifting just outside the closed interval.
    out[i] = std::clamp(out[i], -1.0, 1.0);
  }
  return {std::move(out), scale};
}

void Dataset::validate() const {
  if (samples.empty()) {
    throw std::invalid_argument("Dataset: no samples");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    if (s.predictor.rows != d1 || s.predictor.cols != d2) {
      throw std::invalid_argument("Dataset: predictor shape mismatch at sample " +
                                  std::to_string(i));
    }
    if (static_cast<int>(s.covariates.size()) != p) {
      throw std::invalid_argument("Dataset: covariate length mismatch at sample " +
                                  std::to_string(i));
    }
    check_finite(s.predictor, "Dataset predictor");
    for (double w : s.covariates) {
      if (!std::isfinite(w)) {
        throw std::invalid_argument("Dataset: non-finite covariate");
      }
    }
    if (!std::isfinite(s.response) || s.response < -1.0 || s.response > 1.0) {
      throw std::invalid_argument("Dataset: response outside [-1,1] at sample " +
                                  std::to_string(i));
    }
  }
}

Dataset make_dataset(std::vector<DenseMatrix> predictors,
                     std::vector<std::vector<double>> covariates,
                     const std::vector<double>& raw_responses) {
  if (predictors.empty() || predictors.size() != raw_responses.size()) {
    throw std::invalid_argument("make_dataset: size mismatch");
  }
  if (!covariates.empty() && covariates.size() != predictors.size()) {
    throw std::invalid_argument("make_dataset: covariate count mismatch");
  }
  Dataset data;
  data.d1 = predictors.front().rows;
  data.d2 = predictors.front().cols;
  data.p = covariates.empty() ? 0 : static_cast<int>(covariates.front().size());
  auto [unit, scale] = rescale_responses(raw_responses);
  data.scale = scale;
  data.samples.resize(predictors.size());
  for (std::size_t i = 0; i < predictors.size(); ++i) {
    data.samples[i].predictor = std::move(predictors[i]);
    data.samples[i].covariates =
        covariates.empty() ? std::vector<double>{} : std::move(covariates[i]);
    data.samples[i].response = unit[i];
  }
  data.validate();
  return data;
}

LevelGrid::LevelGrid(int resolution) : H(resolution) {
  if (resolution < 1) {
    throw std::invalid_argument("LevelGrid: resolution must be >= 1");
  }
  levels.resize(2 * static_cast<std::size_t>(resolution) + 1);
  for (int k = -resolution; k <= resolution; ++k) {
    levels[static_cast<std::size_t>(k + resolution)] =
        static_cast<double>(k) / resolution;
  }
}

int level_index(double level, int H) {
  return static_cast<int>(std::llround((level + 1.0) * H));
}

double TraceFunction::evaluate(const DenseMatrix& X,
                               const std::vector<double>& W) const {
  if (X.rows != u.rows || X.cols != v.rows) {
    throw std::invalid_argument("TraceFunction::evaluate: predictor shape mismatch");
  }
  if (W.size() != covariate_coeffs.size()) {
    throw std::invalid_argument("TraceFunction::evaluate: covariate length mismatch");
  }
  // <X, u v^T> = sum_k (u_k^T X v_k); O(r * d1 * d2) without materializing B.
  double acc = intercept;
  int r = u.cols;
  for (int k = 0; k < r; ++k) {
    for (int i = 0; i < X.rows; ++i) {
      double ui = u(i, k);
      if (ui == 0.0) continue;
      double row = 0.0;
      for (int j = 0; j < X.cols; ++j) row += X(i, j) * v(j, k);
      acc += ui * row;
    }
  }
  for (std::size_t q = 0; q < W.size(); ++q) acc += W[q] * covariate_coeffs[q];
  return acc;
}

DenseMatrix coefficient_matrix(const TraceFunction& tf) {
  DenseMatrix B(tf.u.rows, tf.v.rows, 0.0);
  for (int k = 0; k < tf.u.cols; ++k) {
    for (int i = 0; i < B.rows; ++i) {
      double ui = tf.u(i, k);
      if (ui == 0.0) continue;
      for (int j = 0; j < B.cols; ++j) {
        B(i, j) += ui * tf.v(j, k);
      }
    }
  }
  return B;
}

void validate_trace_function(const TraceFunction& tf, int d1, int d2, int p) {
  if (tf.u.rows != d1 || tf.v.rows != d2 || tf.u.cols != tf.v.cols) {
    throw std::invalid_argument("TraceFunction: factor shapes inconsistent");
  }
  if (tf.u.cols > tf.rank_budget) {
    throw std::invalid_argument("TraceFunction: factor width exceeds rank budget");
  }
  if (static_cast<int>(tf.covariate_coeffs.size()) != p) {
    throw std::invalid_argument("TraceFunction: covariate coefficient length");
  }
  DenseMatrix B = coefficient_matrix(tf);
  int nz_rows = 0, nz_cols = 0;
  for (int i = 0; i < B.rows; ++i) {
    for (int j = 0; j < B.cols; ++j) {
      if (B(i, j) != 0.0) {
        ++nz_rows;
        break;
      }
    }
  }
  for (int j = 0; j < B.cols; ++j) {
    for (int i = 0; i < B.rows; ++i) {
      if (B(i, j) != 0.0) {
        ++nz_cols;
        break;
      }
    }
  }
  if (nz_rows > tf.s1 || nz_cols > tf.s2) {
    throw std::invalid_argument("TraceFunction: support budget violated");
  }
  if (std::abs(tf.intercept) > frobenius_norm(B) + 1.0) {
    throw std::invalid_argument("TraceFunction: intercept outside bounded region");
  }
}

Hyperparams default_hyperparams(int n) {
  if (n < 1) {
    throw std::invalid_argument("default_hyperparams: n must be >= 1");
  }
  Hyperparams hp;
  hp.H = std::max(1, std::min(20, static_cast<int>(std::floor(std::sqrt(
                                      static_cast<double>(n))))));
  hp.lambda = std::min(0.1, 1.0 / n);
  return hp;
}

int completion_resolution(std::size_t n_observed, int d, int r) {
  if (d < 1 || r < 1) {
    throw std::invalid_argument("completion_resolution: d and r must be >= 1");
  }
  double h = std::sqrt(static_cast<double>(n_observed) /
                       (static_cast<double>(d) * r));
  return std::max(1, static_cast<int>(std::floor(h)));
}

void check_feasible(const Hyperparams& hp, int d1, int d2) {
  if (hp.r < 1 || hp.r > std::min(hp.s1, hp.s2)) {
    throw std::invalid_argument("Hyperparams: need 1 <= r <= min(s1, s2)");
  }
  if (std::min(hp.s1, hp.s2) > std::min(d1, d2) || hp.s1 > d1 || hp.s2 > d2) {
    throw std::invalid_argument("Hyperparams: support budgets exceed dimensions");
  }
  if (hp.H < 1) throw std::invalid_argument("Hyperparams: H must be >= 1");
  if (hp.lambda < 0) throw std::invalid_argument("Hyperparams: lambda must be >= 0");
  if (hp.rho0 <= 0 || hp.rho_growth <= 1.0) {
    throw std::invalid_argument("Hyperparams: need rho0 > 0 and rho_growth > 1");
  }
  if (hp.max_admm_iters < 1 || hp.max_inner_iters < 1 || hp.n_starts < 1) {
    throw std::invalid_argument("Hyperparams: iteration controls must be >= 1");
  }
  if (hp.primal_tol <= 0) {
    throw std::invalid_argument("Hyperparams: primal_tol must be > 0");
  }
}

}  // namespace assist
