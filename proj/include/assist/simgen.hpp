#pragma once

// Synthetic data generators, exact fixture matrices, evaluation metrics, and
// small brute-force oracles used to exercise the estimators end to end.

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "assist/completion.hpp"
#include "assist/model.hpp"
#include "assist/types.hpp"

namespace assist {

enum class ResponseKind { continuous, binary };
enum class LinkKind { smooth, step };
enum class NetworkPattern { cross, block, star, circle };

// smooth: (e^z - 1)/(e^z + 1); step: -0.6 below zero, 0.6 above.
double link_value(LinkKind link, double z);

// Inverse standard normal CDF on (0, 1): rational initial guess refined to
// full double precision with two Halley steps on erfc.
double normal_quantile(double p);

// Evaluable ground truth for generated regression data:
// f(X) = link((G^{-1} o Ghat)(<X, B>)) where Ghat is a seeded Monte Carlo
// empirical CDF of <X, B> (linear interpolation between order statistics)
// and G is the standard normal CDF (smooth) or the Uniform[-1,1] CDF (step).
struct RegressionTruth {
  DenseMatrix B;                    // d x d, rank r on an s x s block
  std::vector<double> calibration;  // sorted draws of <X, B>
  LinkKind link = LinkKind::smooth;

  double z_of(const DenseMatrix& X) const;  // latent nonlinear predictor
  double f(const DenseMatrix& X) const;     // link_value(link, z_of(X))
};

struct RegressionSim {
  Dataset data;
  RegressionTruth truth;
};

// Matrix-predictor regression data: X entries i.i.d. Uniform[0,1]; B a
// seeded rank-r matrix on the top-left s x s block; continuous responses add
// Normal(0, noise_sd^2) noise to f(X), binary responses are 0/1 draws with
// P(Y=1|X) = (f(X)+1)/2. Bit-deterministic given seed.
RegressionSim gen_regression(int d, int r, int s, int n,
                             ResponseKind response, LinkKind link,
                             double noise_sd, std::uint64_t seed);

// Latent-variable network snapshots with binary labels: pi ~ Uniform[0,1],
// Y ~ Bernoulli(pi), and X_ij ~ Normal(g_region(pi) * active(i,j), sigma^2)
// where each subregion of the active pattern draws its connectivity function
// from a five-function library seeded by g_library_seed. Cross and block are
// exact low-rank patterns; star and circle are stylized rasterized masks.
Dataset gen_network_latent(int d, NetworkPattern pattern, double sigma, int n,
                           std::uint64_t seed, std::uint64_t g_library_seed);

// Exact fixture matrices.
DenseMatrix gen_max_graphon(int d);  // log(1 + max(i, j)/d), 1-based indices
DenseMatrix gen_banded(int d);       // |i - j|
DenseMatrix gen_identity(int d);
// Block-constant matrix: balanced row/column blocks shuffled by seed, entry
// value means[block(i) * blocks + block(j)].
DenseMatrix gen_sbm(int d, int blocks, const std::vector<double>& means,
                    std::uint64_t seed);
// Entrywise logistic squashing 1 / (1 + exp(-c * b)).
DenseMatrix gen_monotone_transform(const DenseMatrix& m, double c);

// Smallest r such that the rank-r SVD truncation is within
// rel_tol * ||m||_F of m in Frobenius norm.
int numerical_rank(const DenseMatrix& m, double rel_tol = 0.01);

using PointFunction = std::function<double(const DenseMatrix&)>;

// Monte Carlo mean of |fhat(X) - truth(X)| over fresh Uniform[0,1]
// predictor draws.
double l1_error(const PointFunction& fhat, const PointFunction& truth, int d1,
                int d2, int m_draws, std::uint64_t seed);
double l1_error(const SignSeriesModel& model, const RegressionTruth& truth,
                int m_draws, std::uint64_t seed);

// Fraction of test samples where sgn(prediction - 1/2) disagrees with
// sgn(raw response - 1/2); for binary 0/1 responses this is the
// misclassification rate of thresholding at one half.
double misclassification_at_half(const SignSeriesModel& model,
                                 const Dataset& test);

// One point of a finite predictor space: its probability mass and the full
// discrete conditional response distribution.
struct FinitePoint {
  double mass = 0.0;
  std::vector<std::pair<double, double>> y_dist;  // (value, probability)

  double conditional_mean() const;
};

struct FinitePredictorSpace {
  std::vector<FinitePoint> points;

  // Masses and each conditional distribution sum to 1 (tolerance 1e-9),
  // everything finite and nonnegative. Throws std::invalid_argument.
  void validate() const;
};

// Exact population weighted classification risk at one level of a sign
// assignment (one of {-1, +1} per point):
// sum_k mass_k * E[|Y - level| * 1{sgn(Y - level) != sign_k} | X = x_k].
double brute_force_level_risk(const FinitePredictorSpace& space, double level,
                              const std::vector<int>& signs);

// Hard imputation baseline, computed on the raw response scale: mean-fill
// the unobserved entries, iterate rank-r truncation with observed-entry
// reset, and return the final truncation. Duplicate observations of an
// entry reset it to their mean.
DenseMatrix svd_impute_baseline(const ObservedMatrix& obs, int r, int iters);

// Soft imputation baseline: same loop with singular values shrunk by tau
// instead of hard truncation.
DenseMatrix soft_impute_baseline(const ObservedMatrix& obs, double tau,
                                 int iters);

// Uniformly sampled observation set: round(fraction * d1 * d2) distinct
// entries of the raw-scale matrix, rescaled into an ObservedMatrix.
ObservedMatrix sample_observed(const DenseMatrix& raw_truth, double fraction,
                               std::uint64_t seed);

}  // namespace assist
