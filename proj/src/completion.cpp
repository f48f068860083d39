#include "assist/completion.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>

#include "admm_core.hpp"
#include "assist/admm.hpp"
#include "assist/loss.hpp"
#include "assist/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace assist {
namespace {

using detail::InnerPoint;
using Eigen::VectorXd;

// Entry-lookup engine: coefficients are the flattened score matrix Z; the
// margin of observation i is simply Z at its position, so basis predictors
// are never materialized and gradients scatter onto observed entries only.
struct EntryEngine {
  int n_ = 0;
  int size_ = 0;
  std::vector<int> flat;  // row-major position of each observation

  EntryEngine(const ObservedMatrix& obs)
      : n_(static_cast<int>(obs.entries.size())), size_(obs.d1 * obs.d2) {
    flat.reserve(obs.entries.size());
    for (const ObservedEntry& e : obs.entries) {
      flat.push_back(e.i * obs.d2 + e.j);
    }
  }

  int n() const { return n_; }
  int coeff_size() const { return size_; }
  int covar_size() const { return 0; }

  void margins(const InnerPoint& pt, VectorXd& out) const {
    for (int i = 0; i < n_; ++i) out(i) = pt.coeff(flat[i]) + pt.intercept;
  }

  void loss_pullback(const VectorXd& h, InnerPoint& g) const {
    g.coeff.setZero();
    for (int i = 0; i < n_; ++i) g.coeff(flat[i]) += h(i);
    g.intercept = h.sum();
  }
};

CompletionLevel fit_completion_level(const EntryEngine& eng,
                                     const ObservedMatrix& obs, double level,
                                     const Hyperparams& hp,
                                     std::uint64_t level_seed) {
  const int n = eng.n();
  // The completion objective sums the weighted surrogate over observed
  // entries rather than averaging it, so the weights are pre-scaled by the
  // observation count to cancel the shared solver core's mean
  // normalization. Without this the data term shrinks as 1/n per entry
  // (each observation pulls only its own coordinate) and the tether
  // dominates, stalling every fit at its initialization.
  VectorXd w(n), sigma(n);
  for (int i = 0; i < n; ++i) {
    w(i) = static_cast<double>(n) * std::abs(obs.entries[i].y - level);
    sigma(i) = sgn(obs.entries[i].y - level);
  }

  bool any_ok = false;
  CompletionLevel best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int j = 0; j < hp.n_starts; ++j) {
    detail::SplitOutcome run;
    try {
      run = detail::run_split_scheme(
          eng, obs.d1, obs.d2, w, sigma, hp, /*s1=*/obs.d1, /*s2=*/obs.d2,
          /*fit_intercept=*/false,
          hash64(level_seed, static_cast<std::uint64_t>(j)), j, {});
    } catch (const SolverDivergence&) {
      continue;
    }
    double obj = detail::penalized_objective(
        eng, w, sigma, hp.loss, hp.lambda,
        InnerPoint{detail::flat_of(run.feasible.matrix), 0.0, VectorXd()});
    if (!any_ok || obj < best_obj) {
      best.u = run.feasible.u;
      best.v = run.feasible.v;
      best_obj = obj;
    }
    any_ok = true;
  }
  if (!any_ok) {
    throw SolverDivergence("fit_completion: every start diverged");
  }
  return best;
}

}  // namespace

void ObservedMatrix::validate() const {
  if (d1 < 1 || d2 < 1) {
    throw std::invalid_argument("ObservedMatrix: dimensions must be >= 1");
  }
  if (!std::isfinite(scale.shift) || !std::isfinite(scale.span) ||
      scale.span <= 0.0) {
    throw std::invalid_argument("ObservedMatrix: invalid response scale");
  }
  for (const ObservedEntry& e : entries) {
    if (e.i < 0 || e.i >= d1 || e.j < 0 || e.j >= d2) {
      throw std::invalid_argument("ObservedMatrix: entry index out of range");
    }
    if (!std::isfinite(e.y) || e.y < -1.0 || e.y > 1.0) {
      throw std::invalid_argument(
          "ObservedMatrix: entry value outside [-1, 1]");
    }
  }
}

ObservedMatrix make_observed(int d1, int d2,
                             const std::vector<ObservedEntry>& raw_entries) {
  std::vector<double> raw;
  raw.reserve(raw_entries.size());
  for (const ObservedEntry& e : raw_entries) raw.push_back(e.y);
  auto [unit, scale] = rescale_responses(raw);
  ObservedMatrix obs;
  obs.d1 = d1;
  obs.d2 = d2;
  obs.scale = scale;
  obs.entries = raw_entries;
  for (std::size_t k = 0; k < obs.entries.size(); ++k) {
    obs.entries[k].y = unit[k];
  }
  obs.validate();
  return obs;
}

double CompletionLevel::score(int i, int j) const {
  double z = 0.0;
  for (int k = 0; k < u.cols; ++k) z += u(i, k) * v(j, k);
  return z;
}

CompletionModel fit_completion(const ObservedMatrix& obs,
                               const Hyperparams& hp) {
  obs.validate();
  if (obs.entries.empty()) {
    throw std::invalid_argument("fit_completion: no observed entries");
  }
  if (hp.loss == LossKind::zero_one) {
    throw std::invalid_argument(
        "fit_completion: the 0-1 loss is evaluation-only; train with hinge "
        "or psi");
  }
  // Completion opens the support to the full matrix; only the rank budget
  // and solver controls carry over from hp.
  Hyperparams full = hp;
  full.s1 = obs.d1;
  full.s2 = obs.d2;
  check_feasible(full, obs.d1, obs.d2);

  CompletionModel model;
  model.grid = LevelGrid(hp.H);
  model.scale = obs.scale;
  model.d1 = obs.d1;
  model.d2 = obs.d2;
  const int m = static_cast<int>(model.grid.levels.size());
  model.sign_factors.resize(m);

  EntryEngine eng(obs);
  std::vector<std::exception_ptr> errors(m);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (int k = 0; k < m; ++k) {
    try {
      model.sign_factors[k] = fit_completion_level(
          eng, obs, model.grid.levels[k], full,
          hash64(full.seed, static_cast<std::uint64_t>(k)));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }

  for (int k = 0; k < m; ++k) {
    if (!errors[k]) continue;
    std::string where = "fit_completion: level " +
                        std::to_string(model.grid.levels[k]) + " failed: ";
    try {
      std::rethrow_exception(errors[k]);
    } catch (const SolverDivergence& e) {
      throw SolverDivergence(where + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error(where + e.what());
    }
  }
  return model;
}

DenseMatrix impute(const CompletionModel& model) {
  const int m = static_cast<int>(model.sign_factors.size());
  if (m == 0) {
    throw std::invalid_argument("impute: model has no levels");
  }
  DenseMatrix out(model.d1, model.d2);
  for (int i = 0; i < model.d1; ++i) {
    for (int j = 0; j < model.d2; ++j) {
      long sum = 0;  // integer sign sum: exact, order-independent
      for (const CompletionLevel& lvl : model.sign_factors) {
        sum += sgn(lvl.score(i, j));
      }
      out(i, j) = model.scale.to_raw(static_cast<double>(sum) /
                                        static_cast<double>(m));
    }
  }
  return out;
}

double completion_mae(const DenseMatrix& estimate, const DenseMatrix& truth) {
  if (!estimate.same_shape(truth)) {
    throw std::invalid_argument("completion_mae: shape mismatch");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < estimate.values.size(); ++k) {
    acc += std::abs(estimate.values[k] - truth.values[k]);
  }
  return acc / static_cast<double>(estimate.values.size());
}

double completion_mae(const DenseMatrix& estimate, const DenseMatrix& truth,
                      const std::vector<std::pair<int, int>>& mask) {
  if (!estimate.same_shape(truth)) {
    throw std::invalid_argument("completion_mae: shape mismatch");
  }
  if (mask.empty()) {
    throw std::invalid_argument("completion_mae: empty mask");
  }
  double acc = 0.0;
  for (const auto& [i, j] : mask) {
    if (i < 0 || i >= estimate.rows || j < 0 || j >= estimate.cols) {
      throw std::invalid_argument("completion_mae: mask index out of range");
    }
    acc += std::abs(estimate(i, j) - truth(i, j));
  }
  return acc / static_cast<double>(mask.size());
}

double completion_01_loss(const ObservedMatrix& obs, const DenseMatrix& score,
                          double level) {
  obs.validate();
  if (score.rows != obs.d1 || score.cols != obs.d2) {
    throw std::invalid_argument("completion_01_loss: shape mismatch");
  }
  if (obs.entries.empty()) {
    throw std::invalid_argument("completion_01_loss: no observed entries");
  }
  double acc = 0.0;
  for (const ObservedEntry& e : obs.entries) {
    acc += std::abs(e.y - level) *
           std::abs(sgn(e.y - level) - sgn(score(e.i, e.j)));
  }
  return acc / (2.0 * static_cast<double>(obs.entries.size()));
}

}  // namespace assist
