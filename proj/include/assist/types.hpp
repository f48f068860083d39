#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace assist {

// Rectangular real array, row-major. Universal carrier for predictors,
// coefficient matrices, multipliers, and signals.
struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;  // length rows*cols, row-major

  DenseMatrix() = default;
  DenseMatrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int i, int j) {
    return values[static_cast<std::size_t>(i) * cols + j];
  }
  double operator()(int i, int j) const {
    return values[static_cast<std::size_t>(i) * cols + j];
  }
  bool same_shape(const DenseMatrix& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

double frobenius_norm(const DenseMatrix& m);
// Trace inner product <A, B> = sum_ij A_ij B_ij.
double dot(const DenseMatrix& a, const DenseMatrix& b);
// Throws std::invalid_argument when any entry is non-finite.
void check_finite(const DenseMatrix& m, const char* what);

// Affine map taking raw responses into the solver's [-1, 1] range and back.
struct ResponseScale {
  double shift = 0.0;
  double span = 1.0;

  double to_unit(double raw) const { return (raw - shift) / span; }
  double to_raw(double unit) const { return unit * span + shift; }
};

// Rescales raw responses to [-1, 1]: shift = midrange, span = half-range
// (span 1 when all values coincide). Returns the mapped values and the scale.
std::pair<std::vector<double>, ResponseScale> rescale_responses(
    const std::vector<double>& raw);

struct Sample {
  DenseMatrix predictor;           // d1 x d2
  std::vector<double> covariates;  // length p
  double response = 0.0;           // in [-1, 1] after rescaling
};

struct Dataset {
  int d1 = 0;
  int d2 = 0;
  int p = 0;
  std::vector<Sample> samples;
  ResponseScale scale;

  int n() const { return static_cast<int>(samples.size()); }
  // Shape agreement across samples, responses in [-1, 1], everything finite.
  void validate() const;
};

// Builds a Dataset from raw-scale responses, applying rescale_responses.
Dataset make_dataset(std::vector<DenseMatrix> predictors,
                     std::vector<std::vector<double>> covariates,
                     const std::vector<double>& raw_responses);

// Threshold grid {-1, ..., -1/H, 0, 1/H, ..., 1}: 2H+1 equally spaced levels.
struct LevelGrid {
  int H = 0;
  std::vector<double> levels;

  LevelGrid() = default;
  explicit LevelGrid(int resolution);
};

// Index of a grid level within LevelGrid(H): round((level + 1) * H).
int level_index(double level, int H);

// One level's classifier. The coefficient matrix B = u * v^T is stored
// factored so the rank bound holds by construction; support is enforced by
// zero rows of u / v.
struct TraceFunction {
  DenseMatrix u;  // d1 x r
  DenseMatrix v;  // d2 x r
  double intercept = 0.0;
  std::vector<double> covariate_coeffs;  // length p
  int rank_budget = 1;
  int s1 = 1;
  int s2 = 1;
  double level = 0.0;

  // <X, B> + intercept + W.covariate_coeffs
  double evaluate(const DenseMatrix& X, const std::vector<double>& W) const;
};

// Materializes B = u * v^T.
DenseMatrix coefficient_matrix(const TraceFunction& tf);

// Checks the declared budgets against the materialized coefficient matrix and
// the intercept bound |b| <= ||B||_F + 1. Throws std::invalid_argument.
void validate_trace_function(const TraceFunction& tf, int d1, int d2, int p);

struct SignSeriesModel {
  LevelGrid grid;
  std::vector<TraceFunction> classifiers;  // one per grid level, same order
  ResponseScale scale;
  int d1 = 0;
  int d2 = 0;
  int p = 0;
};

enum class LossKind { zero_one, hinge, psi };

struct Hyperparams {
  int r = 1;
  int s1 = 1;
  int s2 = 1;
  int H = 1;
  double lambda = 0.1;
  LossKind loss = LossKind::hinge;
  double rho0 = 1.0;
  double rho_growth = 1.1;
  int max_admm_iters = 100;
  int max_inner_iters = 500;
  double primal_tol = 1e-3;
  int n_starts = 5;
  std::uint64_t seed = 0;
};

// Data-driven defaults: H = min(20, floor(sqrt(n))), lambda = min(0.1, 1/n).
Hyperparams default_hyperparams(int n);

// Resolution preset for completion problems: H on the order of
// sqrt(n_observed / (d * r)), at least 1.
int completion_resolution(std::size_t n_observed, int d, int r);

// Validates 1 <= r <= min(s1, s2) <= min(d1, d2) plus positivity of the
// solver controls. Throws std::invalid_argument.
void check_feasible(const Hyperparams& hp, int d1, int d2);

}  // namespace assist
