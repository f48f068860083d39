#include "assist/admm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "admm_core.hpp"
#include "assist/loss.hpp"
#include "assist/projection.hpp"
#include "assist/rng.hpp"

namespace assist {
namespace {

using detail::InnerPoint;
using Eigen::VectorXd;

// Dense-predictor engine: samples flattened into one n x (d1*d2) matrix so
// margins and gradient pullbacks are single matrix-vector products.
struct DenseEngine {
  int n_ = 0;
  int coeff_ = 0;
  int covar_ = 0;
  Eigen::MatrixXd X;
  Eigen::MatrixXd W;

  explicit DenseEngine(const Dataset& data)
      : n_(data.n()), coeff_(data.d1 * data.d2), covar_(data.p) {
    X.resize(n_, coeff_);
    W.resize(n_, covar_);
    for (int i = 0; i < n_; ++i) {
      const Sample& s = data.samples[i];
      for (int k = 0; k < coeff_; ++k) X(i, k) = s.predictor.values[k];
      for (int k = 0; k < covar_; ++k) W(i, k) = s.covariates[k];
    }
  }

  int n() const { return n_; }
  int coeff_size() const { return coeff_; }
  int covar_size() const { return covar_; }

  void margins(const InnerPoint& pt, VectorXd& out) const {
    out.noalias() = X * pt.coeff;
    if (covar_ > 0) out.noalias() += W * pt.covar;
    out.array() += pt.intercept;
  }

  void loss_pullback(const VectorXd& h, InnerPoint& g) const {
    g.coeff.noalias() = X.transpose() * h;
    g.intercept = h.sum();
    if (covar_ > 0) g.covar.noalias() = W.transpose() * h;
  }
};

VectorXd level_weights(const Dataset& data, double level) {
  VectorXd w(data.n());
  for (int i = 0; i < data.n(); ++i) {
    w(i) = std::abs(data.samples[i].response - level);
  }
  return w;
}

VectorXd level_signs(const Dataset& data, double level) {
  VectorXd s(data.n());
  for (int i = 0; i < data.n(); ++i) {
    s(i) = sgn(data.samples[i].response - level);
  }
  return s;
}

void require_surrogate(LossKind kind, const char* where) {
  if (kind != LossKind::hinge && kind != LossKind::psi) {
    throw std::invalid_argument(std::string(where) +
                                ": the 0-1 loss is evaluation-only; train "
                                "with hinge or psi");
  }
}

struct StartOutcome {
  TraceFunction tf;
  double objective = 0.0;
};

StartOutcome run_one_start(const DenseEngine& eng, const Dataset& data,
                           double level, const Hyperparams& hp,
                           const VectorXd& w, const VectorXd& sigma,
                           std::uint64_t seed, int start_idx,
                           const AdmmIterSink& sink) {
  detail::SplitOutcome run = detail::run_split_scheme(
      eng, data.d1, data.d2, w, sigma, hp, hp.s1, hp.s2,
      /*fit_intercept=*/true, seed, start_idx, sink);

  TraceFunction tf;
  tf.u = run.feasible.u;
  tf.v = run.feasible.v;
  tf.intercept = run.intercept;
  tf.covariate_coeffs.assign(run.covar.data(),
                             run.covar.data() + run.covar.size());
  tf.rank_budget = hp.r;
  tf.s1 = hp.s1;
  tf.s2 = hp.s2;
  tf.level = level;
  // Clamp the intercept to the bounded region, measured on the same
  // materialization the validator uses so the boundary case stays inside.
  double bound = frobenius_norm(coefficient_matrix(tf)) + 1.0;
  if (std::abs(tf.intercept) > bound) {
    tf.intercept = std::copysign(bound, tf.intercept);
  }
  return {tf, weighted_margin_objective(tf, data, level, hp.loss, hp.lambda)};
}

}  // namespace

PrimalPoint primal_update(const Dataset& data, double level,
                          const DenseMatrix& S, const DenseMatrix& multiplier,
                          double rho, double lambda, LossKind kind,
                          const PrimalPoint* warm, int max_inner_iters) {
  require_surrogate(kind, "primal_update");
  if (rho <= 0.0) throw std::invalid_argument("primal_update: rho must be > 0");
  if (lambda < 0.0) {
    throw std::invalid_argument("primal_update: lambda must be >= 0");
  }
  if (max_inner_iters < 1) {
    throw std::invalid_argument("primal_update: max_inner_iters must be >= 1");
  }
  data.validate();
  if (S.rows != data.d1 || S.cols != data.d2 || !S.same_shape(multiplier)) {
    throw std::invalid_argument("primal_update: shape mismatch");
  }
  DenseEngine eng(data);
  VectorXd sbar = detail::tether_center_flat(detail::flat_of(S),
                                             detail::flat_of(multiplier), rho,
                                             lambda);
  InnerPoint start;
  if (warm) {
    if (!warm->B.same_shape(S) ||
        static_cast<int>(warm->c.size()) != data.p) {
      throw std::invalid_argument("primal_update: warm start shape mismatch");
    }
    start.coeff = detail::flat_of(warm->B);
    start.intercept = warm->b;
    start.covar = Eigen::Map<const VectorXd>(warm->c.data(),
                                             static_cast<Eigen::Index>(
                                                 warm->c.size()));
  } else {
    start.coeff = sbar;
    start.intercept = 0.0;
    start.covar = VectorXd::Zero(data.p);
  }
  InnerPoint out = detail::solve_primal(
      eng, kind, level_weights(data, level), level_signs(data, level), sbar,
      lambda + rho, max_inner_iters, /*fit_intercept=*/true, start);
  PrimalPoint res;
  res.B = detail::unflat(out.coeff, data.d1, data.d2);
  res.b = out.intercept;
  res.c.assign(out.covar.data(), out.covar.data() + out.covar.size());
  return res;
}

DenseMatrix dual_update(const DenseMatrix& B, const DenseMatrix& multiplier,
                        double rho, int r, int s1, int s2) {
  if (!B.same_shape(multiplier)) {
    throw std::invalid_argument("dual_update: shape mismatch");
  }
  if (rho <= 0.0) throw std::invalid_argument("dual_update: rho must be > 0");
  return project_sparse_lowrank(
      detail::unflat(detail::dual_target_flat(detail::flat_of(B),
                                              detail::flat_of(multiplier),
                                              rho),
                     B.rows, B.cols),
      r, s1, s2);
}

DenseMatrix multiplier_update(const DenseMatrix& multiplier,
                              const DenseMatrix& B, const DenseMatrix& S,
                              double rho) {
  if (!multiplier.same_shape(B) || !B.same_shape(S)) {
    throw std::invalid_argument("multiplier_update: shape mismatch");
  }
  return detail::unflat(
      detail::multiplier_step_flat(detail::flat_of(multiplier),
                                   detail::flat_of(B), detail::flat_of(S),
                                   rho),
      multiplier.rows, multiplier.cols);
}

TraceFunction fit_sign_classifier(const Dataset& data, double level,
                                  const Hyperparams& hp,
                                  const AdmmIterSink& sink) {
  data.validate();
  check_feasible(hp, data.d1, data.d2);
  require_surrogate(hp.loss, "fit_sign_classifier");

  DenseEngine eng(data);
  VectorXd w = level_weights(data, level);
  VectorXd sigma = level_signs(data, level);
  std::uint64_t level_seed =
      hash64(hp.seed, static_cast<std::uint64_t>(level_index(level, hp.H)));

  bool any_ok = false;
  StartOutcome best;
  best.objective = std::numeric_limits<double>::infinity();
  for (int j = 0; j < hp.n_starts; ++j) {
    StartOutcome got;
    try {
      got = run_one_start(eng, data, level, hp, w, sigma,
                          hash64(level_seed, static_cast<std::uint64_t>(j)), j,
                          sink);
    } catch (const SolverDivergence&) {
      continue;
    }
    if (!any_ok || got.objective < best.objective) best = got;
    any_ok = true;
  }
  if (!any_ok) {
    throw SolverDivergence("fit_sign_classifier: every start diverged");
  }
  return best.tf;
}

}  // namespace assist
