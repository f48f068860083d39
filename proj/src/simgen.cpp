#include "assist/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "assist/loss.hpp"
#include "assist/rng.hpp"
#include "eigen_bridge.hpp"

namespace assist {
namespace {

constexpr int kCalibrationDraws = 100000;
constexpr double kPi = 3.14159265358979323846;

// Connectivity-strength library on [0, 1].
double g_library(int which, double t) {
  switch (which) {
    case 0:
      return t;
    case 1:
      return t * t;
    case 2:
      return std::sqrt(t);
    case 3:
      return std::log1p(t);
    default:
      return std::sin(kPi * t / 2.0);
  }
}

constexpr int kGLibrarySize = 5;

// Subregion id of a cell under a pattern, or -1 when inactive. Earlier
// strokes claim overlap cells so the assignment is a partition.
int pattern_region(NetworkPattern pattern, int d, int i, int j) {
  switch (pattern) {
    case NetworkPattern::cross: {
      // two perpendicular 4-wide bands through the middle
      int lo = d / 2 - 2;
      int hi = d / 2 + 2;
      if (i >= lo && i < hi) return 0;
      if (j >= lo && j < hi) return 1;
      return -1;
    }
    case NetworkPattern::block: {
      // 2x2 checkerboard of quadrants; the two diagonal quadrants active
      int half = (d + 1) / 2;
      int bi = i < half ? 0 : 1;
      int bj = j < half ? 0 : 1;
      if (bi == 0 && bj == 0) return 0;
      if (bi == 1 && bj == 1) return 1;
      return -1;
    }
    case NetworkPattern::star: {
      // stylized asterisk: horizontal and vertical strokes plus diagonals
      double mid = (d - 1) / 2.0;
      if (std::abs(i - mid) <= 1.5) return 0;
      if (std::abs(j - mid) <= 1.5) return 1;
      if (std::abs(i - j) <= 1) return 2;
      if (std::abs(i + j - (d - 1)) <= 1) return 3;
      return -1;
    }
    case NetworkPattern::circle: {
      // stylized ring around the center
      double mid = (d - 1) / 2.0;
      double radius = d / 3.0;
      double dist = std::hypot(i - mid, j - mid);
      return std::abs(dist - radius) <= 1.2 ? 0 : -1;
    }
  }
  throw std::invalid_argument("gen_network_latent: unknown pattern");
}

int pattern_region_count(NetworkPattern pattern) {
  switch (pattern) {
    case NetworkPattern::cross:
      return 2;
    case NetworkPattern::block:
      return 2;
    case NetworkPattern::star:
      return 4;
    case NetworkPattern::circle:
      return 1;
  }
  throw std::invalid_argument("gen_network_latent: unknown pattern");
}

// Midpoint-convention empirical CDF with linear interpolation between order
// statistics, clamped inside (0, 1).
double empirical_cdf(const std::vector<double>& sorted, double t) {
  const std::size_t m = sorted.size();
  double half = 0.5 / static_cast<double>(m);
  if (t <= sorted.front()) return half;
  if (t >= sorted.back()) return 1.0 - half;
  std::size_t hi =
      std::upper_bound(sorted.begin(), sorted.end(), t) - sorted.begin();
  std::size_t lo = hi - 1;  // sorted[lo] <= t < sorted[hi]
  double p_lo = (lo + 0.5) / static_cast<double>(m);
  double p_hi = (hi + 0.5) / static_cast<double>(m);
  double gap = sorted[hi] - sorted[lo];
  if (gap <= 0.0) return p_hi;
  return p_lo + (p_hi - p_lo) * (t - sorted[lo]) / gap;
}

Eigen::MatrixXd rank_truncate(const Eigen::MatrixXd& m, int r) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  int keep = std::min<int>(r, svd.singularValues().size());
  return svd.matrixU().leftCols(keep) *
         svd.singularValues().head(keep).asDiagonal() *
         svd.matrixV().leftCols(keep).transpose();
}

Eigen::MatrixXd soft_truncate(const Eigen::MatrixXd& m, double tau) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd sv = svd.singularValues();
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    sv(k) = std::max(0.0, sv(k) - tau);
  }
  return svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
}

// Shared loop of the imputation baselines, working on the raw response
// scale throughout so exact low-rank structure of the underlying matrix is
// preserved: mean-fill, iterate (denoise, reset observed), return the final
// denoised matrix. Duplicate observations reset their entry to the mean of
// its draws.
template <class Denoise>
DenseMatrix impute_loop(const ObservedMatrix& obs, int iters,
                        const Denoise& denoise) {
  obs.validate();
  if (obs.entries.empty()) {
    throw std::invalid_argument("impute baseline: no observed entries");
  }
  if (iters < 0) {
    throw std::invalid_argument("impute baseline: iters must be >= 0");
  }
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(obs.d1, obs.d2);
  Eigen::MatrixXd count = Eigen::MatrixXd::Zero(obs.d1, obs.d2);
  double total = 0.0;
  for (const ObservedEntry& e : obs.entries) {
    double raw = obs.scale.to_raw(e.y);
    sum(e.i, e.j) += raw;
    count(e.i, e.j) += 1.0;
    total += raw;
  }
  double fill = total / static_cast<double>(obs.entries.size());
  Eigen::MatrixXd m(obs.d1, obs.d2);
  for (int i = 0; i < obs.d1; ++i) {
    for (int j = 0; j < obs.d2; ++j) {
      m(i, j) = count(i, j) > 0.0 ? sum(i, j) / count(i, j) : fill;
    }
  }
  Eigen::MatrixXd denoised;
  for (int it = 0; it < iters; ++it) {
    denoised = denoise(m);
    for (int i = 0; i < obs.d1; ++i) {
      for (int j = 0; j < obs.d2; ++j) {
        if (count(i, j) > 0.0) denoised(i, j) = m(i, j);
      }
    }
    m.swap(denoised);
  }
  Eigen::MatrixXd final_fit = denoise(m);
  DenseMatrix out(obs.d1, obs.d2);
  for (int i = 0; i < obs.d1; ++i) {
    for (int j = 0; j < obs.d2; ++j) {
      out(i, j) = final_fit(i, j);
    }
  }
  return out;
}

}  // namespace

double link_value(LinkKind link, double z) {
  if (link == LinkKind::smooth) {
    return std::tanh(z / 2.0);  // (e^z - 1)/(e^z + 1)
  }
  return z > 0.0 ? 0.6 : -0.6;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must be in (0, 1)");
  }
  // rational approximation in three regimes
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double t = q * q;
    x = (((((a[0] * t + a[1]) * t + a[2]) * t + a[3]) * t + a[4]) * t + a[5]) *
        q /
        (((((b[0] * t + b[1]) * t + b[2]) * t + b[3]) * t + b[4]) * t + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
          c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // two Halley refinements against the exact CDF
  for (int round = 0; round < 2; ++round) {
    double err = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    double u = err * std::sqrt(2.0 * kPi) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
  }
  return x;
}

double RegressionTruth::z_of(const DenseMatrix& X) const {
  double t = 0.0;
  for (std::size_t k = 0; k < X.values.size(); ++k) {
    t += X.values[k] * B.values[k];
  }
  double p = empirical_cdf(calibration, t);
  return link == LinkKind::smooth ? normal_quantile(p) : 2.0 * p - 1.0;
}

double RegressionTruth::f(const DenseMatrix& X) const {
  return link_value(link, z_of(X));
}

RegressionSim gen_regression(int d, int r, int s, int n,
                             ResponseKind response, LinkKind link,
                             double noise_sd, std::uint64_t seed) {
  if (!(1 <= r && r <= s && s <= d)) {
    throw std::invalid_argument("gen_regression: need 1 <= r <= s <= d");
  }
  if (n < 1) throw std::invalid_argument("gen_regression: n must be >= 1");
  if (noise_sd < 0.0) {
    throw std::invalid_argument("gen_regression: noise_sd must be >= 0");
  }

  RegressionTruth truth;
  truth.link = link;
  truth.B = DenseMatrix(d, d, 0.0);
  Rng coef_rng(hash64(seed, 1));
  {
    DenseMatrix gu(s, r), gv(s, r);
    for (double& x : gu.values) x = coef_rng.normal();
    for (double& x : gv.values) x = coef_rng.normal();
    for (int i = 0; i < s; ++i) {
      for (int j = 0; j < s; ++j) {
        double acc = 0.0;
        for (int k = 0; k < r; ++k) acc += gu(i, k) * gv(j, k);
        truth.B(i, j) = acc;
      }
    }
  }

  // Calibration pass: the inner product only touches the s x s support
  // block, so only those predictor entries are drawn.
  Rng cal_rng(hash64(seed, 2));
  truth.calibration.resize(kCalibrationDraws);
  for (double& t : truth.calibration) {
    double acc = 0.0;
    for (int i = 0; i < s; ++i) {
      for (int j = 0; j < s; ++j) acc += cal_rng.uniform() * truth.B(i, j);
    }
    t = acc;
  }
  std::sort(truth.calibration.begin(), truth.calibration.end());

  Rng data_rng(hash64(seed, 3));
  std::vector<DenseMatrix> predictors;
  predictors.reserve(n);
  std::vector<double> raw;
  raw.reserve(n);
  for (int i = 0; i < n; ++i) {
    DenseMatrix X(d, d);
    for (double& x : X.values) x = data_rng.uniform();
    double fx = truth.f(X);
    if (response == ResponseKind::continuous) {
      raw.push_back(fx + noise_sd * data_rng.normal());
    } else {
      raw.push_back(data_rng.uniform() < (fx + 1.0) / 2.0 ? 1.0 : 0.0);
    }
    predictors.push_back(std::move(X));
  }
  RegressionSim sim;
  sim.data = make_dataset(std::move(predictors), {}, raw);
  sim.truth = std::move(truth);
  return sim;
}

Dataset gen_network_latent(int d, NetworkPattern pattern, double sigma, int n,
                           std::uint64_t seed, std::uint64_t g_library_seed) {
  if (d < 8) throw std::invalid_argument("gen_network_latent: need d >= 8");
  if (n < 1) throw std::invalid_argument("gen_network_latent: n must be >= 1");
  if (sigma < 0.0) {
    throw std::invalid_argument("gen_network_latent: sigma must be >= 0");
  }

  int regions = pattern_region_count(pattern);
  Rng lib_rng(g_library_seed);
  std::vector<int> region_g(regions);
  for (int& g : region_g) {
    g = static_cast<int>(lib_rng.uniform_index(kGLibrarySize));
  }
  // cache the region map
  std::vector<int> region(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      region[static_cast<std::size_t>(i) * d + j] =
          pattern_region(pattern, d, i, j);
    }
  }

  Rng rng(seed);
  std::vector<DenseMatrix> predictors;
  predictors.reserve(n);
  std::vector<double> labels;
  labels.reserve(n);
  for (int t = 0; t < n; ++t) {
    double pi = rng.uniform();
    labels.push_back(rng.uniform() < pi ? 1.0 : 0.0);
    DenseMatrix X(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        int reg = region[static_cast<std::size_t>(i) * d + j];
        double mean = reg >= 0 ? g_library(region_g[reg], pi) : 0.0;
        X(i, j) = sigma > 0.0 ? mean + sigma * rng.normal() : mean;
      }
    }
    predictors.push_back(std::move(X));
  }
  return make_dataset(std::move(predictors), {}, labels);
}

DenseMatrix gen_max_graphon(int d) {
  if (d < 1) throw std::invalid_argument("gen_max_graphon: d must be >= 1");
  DenseMatrix m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      m(i, j) = std::log1p(static_cast<double>(std::max(i, j) + 1) / d);
    }
  }
  return m;
}

DenseMatrix gen_banded(int d) {
  if (d < 1) throw std::invalid_argument("gen_banded: d must be >= 1");
  DenseMatrix m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = std::abs(i - j);
  }
  return m;
}

DenseMatrix gen_identity(int d) {
  if (d < 1) throw std::invalid_argument("gen_identity: d must be >= 1");
  DenseMatrix m(d, d, 0.0);
  for (int i = 0; i < d; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix gen_sbm(int d, int blocks, const std::vector<double>& means,
                    std::uint64_t seed) {
  if (d < 1 || blocks < 1 || blocks > d) {
    throw std::invalid_argument("gen_sbm: need 1 <= blocks <= d");
  }
  if (means.size() != static_cast<std::size_t>(blocks) * blocks) {
    throw std::invalid_argument("gen_sbm: means must have blocks^2 entries");
  }
  // balanced block labels, shuffled marginally for rows and columns
  std::vector<int> row_block(d), col_block(d);
  for (int i = 0; i < d; ++i) {
    row_block[i] = i % blocks;
    col_block[i] = i % blocks;
  }
  Rng rng(seed);
  for (int i = d - 1; i > 0; --i) {
    std::swap(row_block[i], row_block[rng.uniform_index(i + 1)]);
  }
  for (int i = d - 1; i > 0; --i) {
    std::swap(col_block[i], col_block[rng.uniform_index(i + 1)]);
  }
  DenseMatrix m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      m(i, j) = means[static_cast<std::size_t>(row_block[i]) * blocks +
                      col_block[j]];
    }
  }
  return m;
}

DenseMatrix gen_monotone_transform(const DenseMatrix& m, double c) {
  if (c <= 0.0) {
    throw std::invalid_argument("gen_monotone_transform: c must be > 0");
  }
  DenseMatrix out(m.rows, m.cols);
  for (std::size_t k = 0; k < m.values.size(); ++k) {
    out.values[k] = 1.0 / (1.0 + std::exp(-c * m.values[k]));
  }
  return out;
}

int numerical_rank(const DenseMatrix& m, double rel_tol) {
  if (rel_tol <= 0.0) {
    throw std::invalid_argument("numerical_rank: rel_tol must be > 0");
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m));
  const Eigen::VectorXd& sv = svd.singularValues();
  const int count = static_cast<int>(sv.size());
  // suffix sums from the smallest value up, so exactly low-rank inputs give
  // a tiny tail instead of cancellation noise
  std::vector<double> tail(count + 1, 0.0);
  for (int k = count - 1; k >= 0; --k) {
    tail[k] = tail[k + 1] + sv(k) * sv(k);
  }
  double target = rel_tol * std::sqrt(tail[0]);
  for (int r = 0; r < count; ++r) {
    if (std::sqrt(tail[r]) <= target) return r;
  }
  return count;
}

double l1_error(const PointFunction& fhat, const PointFunction& truth, int d1,
                int d2, int m_draws, std::uint64_t seed) {
  if (m_draws < 1) {
    throw std::invalid_argument("l1_error: m_draws must be >= 1");
  }
  Rng rng(seed);
  DenseMatrix X(d1, d2);
  double acc = 0.0;
  for (int t = 0; t < m_draws; ++t) {
    for (double& x : X.values) x = rng.uniform();
    acc += std::abs(fhat(X) - truth(X));
  }
  return acc / static_cast<double>(m_draws);
}

double l1_error(const SignSeriesModel& model, const RegressionTruth& truth,
                int m_draws, std::uint64_t seed) {
  if (model.p != 0) {
    throw std::invalid_argument(
        "l1_error: truth oracle has no covariates; model.p must be 0");
  }
  return l1_error(
      [&model](const DenseMatrix& X) { return predict(model, X, {}); },
      [&truth](const DenseMatrix& X) { return truth.f(X); }, model.d1,
      model.d2, m_draws, seed);
}

double misclassification_at_half(const SignSeriesModel& model,
                                 const Dataset& test) {
  test.validate();
  if (test.samples.empty()) {
    throw std::invalid_argument("misclassification_at_half: empty test set");
  }
  int wrong = 0;
  for (const Sample& s : test.samples) {
    double pred = predict(model, s.predictor, s.covariates);
    double raw = test.scale.to_raw(s.response);
    if (sgn(pred - 0.5) != sgn(raw - 0.5)) ++wrong;
  }
  return static_cast<double>(wrong) / test.samples.size();
}

double FinitePoint::conditional_mean() const {
  double acc = 0.0;
  for (const auto& [y, p] : y_dist) acc += y * p;
  return acc;
}

void FinitePredictorSpace::validate() const {
  if (points.empty()) {
    throw std::invalid_argument("FinitePredictorSpace: no points");
  }
  double mass_total = 0.0;
  for (const FinitePoint& pt : points) {
    if (!(pt.mass >= 0.0) || !std::isfinite(pt.mass)) {
      throw std::invalid_argument("FinitePredictorSpace: invalid mass");
    }
    mass_total += pt.mass;
    if (pt.y_dist.empty()) {
      throw std::invalid_argument(
          "FinitePredictorSpace: empty conditional distribution");
    }
    double p_total = 0.0;
    for (const auto& [y, p] : pt.y_dist) {
      if (!std::isfinite(y) || !(p >= 0.0) || !std::isfinite(p)) {
        throw std::invalid_argument(
            "FinitePredictorSpace: invalid conditional distribution");
      }
      p_total += p;
    }
    if (std::abs(p_total - 1.0) > 1e-9) {
      throw std::invalid_argument(
          "FinitePredictorSpace: conditional probabilities must sum to 1");
    }
  }
  if (std::abs(mass_total - 1.0) > 1e-9) {
    throw std::invalid_argument(
        "FinitePredictorSpace: masses must sum to 1");
  }
}

double brute_force_level_risk(const FinitePredictorSpace& space, double level,
                              const std::vector<int>& signs) {
  space.validate();
  if (signs.size() != space.points.size()) {
    throw std::invalid_argument(
        "brute_force_level_risk: one sign per point required");
  }
  double risk = 0.0;
  for (std::size_t k = 0; k < space.points.size(); ++k) {
    if (signs[k] != 1 && signs[k] != -1) {
      throw std::invalid_argument(
          "brute_force_level_risk: signs must be +1 or -1");
    }
    const FinitePoint& pt = space.points[k];
    for (const auto& [y, p] : pt.y_dist) {
      if (sgn(y - level) != signs[k]) {
        risk += pt.mass * p * std::abs(y - level);
      }
    }
  }
  return risk;
}

DenseMatrix svd_impute_baseline(const ObservedMatrix& obs, int r, int iters) {
  if (r < 1 || r > std::min(obs.d1, obs.d2)) {
    throw std::invalid_argument("svd_impute_baseline: infeasible rank");
  }
  return impute_loop(obs, iters, [r](const Eigen::MatrixXd& m) {
    return rank_truncate(m, r);
  });
}

DenseMatrix soft_impute_baseline(const ObservedMatrix& obs, double tau,
                                 int iters) {
  if (tau < 0.0) {
    throw std::invalid_argument("soft_impute_baseline: tau must be >= 0");
  }
  return impute_loop(obs, iters, [tau](const Eigen::MatrixXd& m) {
    return soft_truncate(m, tau);
  });
}

ObservedMatrix sample_observed(const DenseMatrix& raw_truth, double fraction,
                               std::uint64_t seed) {
  check_finite(raw_truth, "sample_observed");
  const long total = static_cast<long>(raw_truth.rows) * raw_truth.cols;
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw std::invalid_argument(
        "sample_observed: fraction must be in (0, 1]");
  }
  long count = std::lround(fraction * static_cast<double>(total));
  count = std::max(1L, std::min(count, total));

  std::vector<long> cells(total);
  std::iota(cells.begin(), cells.end(), 0L);
  Rng rng(seed);
  for (long i = 0; i < count; ++i) {
    long j = i + static_cast<long>(rng.uniform_index(total - i));
    std::swap(cells[i], cells[j]);
  }
  cells.resize(count);
  std::sort(cells.begin(), cells.end());

  std::vector<ObservedEntry> raw_entries;
  raw_entries.reserve(count);
  for (long c : cells) {
    int i = static_cast<int>(c / raw_truth.cols);
    int j = static_cast<int>(c % raw_truth.cols);
    raw_entries.push_back({i, j, raw_truth(i, j)});
  }
  return make_observed(raw_truth.rows, raw_truth.cols, raw_entries);
}

}  // namespace assist
