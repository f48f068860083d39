#pragma once

// Inner machinery for the per-level classifier fits: a deterministic proximal
// subgradient solver for weighted hinge-plus-linear objectives with a
// quadratic tether, plus the difference-of-convex wrapper that reduces the
// bounded psi loss to a short sequence of such convex problems. Templated on
// an engine that maps parameters to margins and pulls loss gradients back, so
// the dense regression path and the entry-lookup completion path share one
// solver.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "assist/admm.hpp"
#include "assist/loss.hpp"
#include "assist/projection.hpp"
#include "assist/rng.hpp"

namespace assist::detail {

using Eigen::VectorXd;

constexpr int kPsiRounds = 5;

// Flat parameter point: coeff is vec(B), covar is c.
struct InnerPoint {
  VectorXd coeff;
  double intercept = 0.0;
  VectorXd covar;
};

// One convex subproblem:
//   (1/n) sum_i [ a_i (1 - z_i)_+ + l_i z_i ] + q ||coeff - sbar||^2
// with z_i = sign_i * phi_i. Hinge fits use l = 0; each psi round adds the
// tangent of the concave cap through l.
struct InnerSpec {
  VectorXd hinge_weight;  // a_i >= 0
  VectorXd linear_coef;   // l_i
  VectorXd sign;          // sign_i in {-1, +1}
  VectorXd sbar;          // tether center, flattened
  double quad_coef = 0.0;
  int max_iters = 1;
  bool fit_intercept = true;
};

// Engine concept:
//   int n() const;
//   int coeff_size() const;
//   int covar_size() const;
//   void margins(const InnerPoint& pt, VectorXd& out) const;   // phi_i
//   void loss_pullback(const VectorXd& h, InnerPoint& g) const;
//     // g.coeff = sum_i h_i vec(X_i); g.intercept = sum_i h_i;
//     // g.covar  = sum_i h_i W_i

inline bool finite_point(const InnerPoint& p) {
  return p.coeff.allFinite() && std::isfinite(p.intercept) &&
         p.covar.allFinite();
}

inline double subproblem_objective(const InnerSpec& spec, const InnerPoint& pt,
                                   const VectorXd& phi) {
  const int n = static_cast<int>(phi.size());
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    double z = spec.sign(i) * phi(i);
    loss += spec.hinge_weight(i) * std::max(0.0, 1.0 - z) +
            spec.linear_coef(i) * z;
  }
  return loss / n + spec.quad_coef * (pt.coeff - spec.sbar).squaredNorm();
}

template <class Engine>
InnerPoint solve_inner(const Engine& eng, const InnerSpec& spec,
                       const InnerPoint& start) {
  const int n = eng.n();
  InnerPoint cur = start;
  InnerPoint best = start;
  double best_obj = std::numeric_limits<double>::infinity();
  VectorXd phi(n), h(n);
  InnerPoint grad;
  grad.coeff.resize(eng.coeff_size());
  grad.covar.resize(eng.covar_size());
  for (int t = 1; t <= spec.max_iters; ++t) {
    if (!finite_point(cur)) {
      throw SolverDivergence("inner solver produced a non-finite iterate");
    }
    eng.margins(cur, phi);
    double obj = subproblem_objective(spec, cur, phi);
    if (obj < best_obj) {
      best_obj = obj;
      best = cur;
    }
    for (int i = 0; i < n; ++i) {
      double z = spec.sign(i) * phi(i);
      double d = spec.linear_coef(i);
      if (z < 1.0) d -= spec.hinge_weight(i);
      h(i) = spec.sign(i) * d / n;
    }
    eng.loss_pullback(h, grad);
    double eta = 1.0 / std::sqrt(static_cast<double>(t));
    double mix = 2.0 * eta * spec.quad_coef;
    // Subgradient step on the loss, exact proximal step on the tether.
    cur.coeff = (cur.coeff - eta * grad.coeff + mix * spec.sbar) / (1.0 + mix);
    if (spec.fit_intercept) cur.intercept -= eta * grad.intercept;
    if (cur.covar.size() > 0) cur.covar -= eta * grad.covar;
  }
  if (!finite_point(cur)) {
    throw SolverDivergence("inner solver produced a non-finite iterate");
  }
  eng.margins(cur, phi);
  if (subproblem_objective(spec, cur, phi) < best_obj) best = cur;
  return best;
}

template <class Engine>
double psi_objective(const Engine& eng, const VectorXd& weight,
                     const VectorXd& sign, const VectorXd& sbar,
                     double quad_coef, const InnerPoint& pt) {
  const int n = eng.n();
  VectorXd phi(n);
  eng.margins(pt, phi);
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    loss += weight(i) * margin_loss(LossKind::psi, sign(i) * phi(i));
  }
  return loss / n + quad_coef * (pt.coeff - sbar).squaredNorm();
}

// Solves the tethered surrogate problem for one level. Hinge is a single
// convex solve; psi runs kPsiRounds difference-of-convex rounds after a
// hinge initialization, keeping the best round by the true psi objective
// (the warm start included, so the objective never increases). When every
// weight is zero the loss vanishes and the exact tether minimizer
// (sbar, 0, 0) is returned.
template <class Engine>
InnerPoint solve_primal(const Engine& eng, LossKind kind,
                        const VectorXd& weight, const VectorXd& sign,
                        const VectorXd& sbar, double quad_coef, int max_iters,
                        bool fit_intercept, const InnerPoint& start) {
  const int n = eng.n();
  if (n == 0 || weight.maxCoeff() == 0.0) {
    InnerPoint out;
    out.coeff = sbar;
    out.intercept = 0.0;
    out.covar = VectorXd::Zero(eng.covar_size());
    return out;
  }
  InnerSpec spec;
  spec.hinge_weight = weight;
  spec.linear_coef = VectorXd::Zero(n);
  spec.sign = sign;
  spec.sbar = sbar;
  spec.quad_coef = quad_coef;
  spec.max_iters = max_iters;
  spec.fit_intercept = fit_intercept;
  if (kind == LossKind::hinge) return solve_inner(eng, spec, start);

  InnerPoint best = start;
  double best_obj = psi_objective(eng, weight, sign, sbar, quad_coef, start);
  InnerPoint cur = solve_inner(eng, spec, start);  // hinge initialization
  double cur_obj = psi_objective(eng, weight, sign, sbar, quad_coef, cur);
  if (cur_obj < best_obj) {
    best_obj = cur_obj;
    best = cur;
  }
  VectorXd phi(n);
  for (int round = 0; round < kPsiRounds; ++round) {
    eng.margins(cur, phi);
    // psi(z) = 2[(1-z)_+ - (-z)_+]; the concave part's tangent at the
    // current margins has slope 2 below zero, 0 above.
    spec.hinge_weight = 2.0 * weight;
    for (int i = 0; i < n; ++i) {
      double z = sign(i) * phi(i);
      spec.linear_coef(i) = z < 0.0 ? 2.0 * weight(i) : 0.0;
    }
    cur = solve_inner(eng, spec, cur);
    cur_obj = psi_objective(eng, weight, sign, sbar, quad_coef, cur);
    if (cur_obj < best_obj) {
      best_obj = cur_obj;
      best = cur;
    }
  }
  return best;
}

inline VectorXd flat_of(const DenseMatrix& m) {
  return Eigen::Map<const VectorXd>(m.values.data(),
                                    static_cast<Eigen::Index>(m.values.size()));
}

inline DenseMatrix unflat(const VectorXd& v, int rows, int cols) {
  DenseMatrix out(rows, cols);
  std::copy(v.data(), v.data() + v.size(), out.values.begin());
  return out;
}

// Center of the quadratic tether: argmin over B of
// (lambda + rho) ||B||^2 - <Lambda, B> + rho ||B - S||^2 up to constants.
inline VectorXd tether_center_flat(const VectorXd& S, const VectorXd& mult,
                                   double rho, double lambda) {
  VectorXd out(S.size());
  for (Eigen::Index k = 0; k < S.size(); ++k) {
    out(k) = (2.0 * rho * S(k) - mult(k)) / (2.0 * (rho + lambda));
  }
  return out;
}

// Point the feasible iterate is projected from.
inline VectorXd dual_target_flat(const VectorXd& B, const VectorXd& mult,
                                 double rho) {
  VectorXd out(B.size());
  for (Eigen::Index k = 0; k < B.size(); ++k) {
    out(k) = (2.0 * rho * B(k) + mult(k)) / (2.0 * rho);
  }
  return out;
}

inline VectorXd multiplier_step_flat(const VectorXd& mult, const VectorXd& B,
                                     const VectorXd& S, double rho) {
  VectorXd out(mult.size());
  for (Eigen::Index k = 0; k < mult.size(); ++k) {
    out(k) = mult(k) + 2.0 * rho * (B(k) - S(k));
  }
  return out;
}

// Ridge-penalized surrogate risk at a parameter point:
// (1/n) sum_i w_i F(sign_i phi_i) + lambda ||coeff||^2, skipping zero-weight
// terms so their margins cannot contribute non-finite values.
template <class Engine>
double penalized_objective(const Engine& eng, const VectorXd& weight,
                           const VectorXd& sign, LossKind kind, double lambda,
                           const InnerPoint& pt) {
  const int n = eng.n();
  VectorXd phi(n);
  eng.margins(pt, phi);
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    if (weight(i) == 0.0) continue;
    loss += weight(i) * margin_loss(kind, sign(i) * phi(i));
  }
  return loss / n + lambda * pt.coeff.squaredNorm();
}

struct SplitOutcome {
  SparseLowRank feasible;           // final feasible iterate with its factors
  double intercept = 0.0;
  VectorXd covar;
  std::vector<double> objective_trace;
};

// One random start of the splitting scheme shared by the regression and
// completion fits: seeded unit-Frobenius Gaussian init, alternating primal
// solves and sparse-low-rank projections with a growing penalty, multiplier
// ascent, and a relative-gap stopping rule. The budgets (s1, s2) come in
// explicitly so completion can open the support up to the full matrix.
template <class Engine>
SplitOutcome run_split_scheme(const Engine& eng, int d1, int d2,
                              const VectorXd& weight, const VectorXd& sign,
                              const Hyperparams& hp, int s1, int s2,
                              bool fit_intercept, std::uint64_t seed,
                              int start_index, const AdmmIterSink& sink) {
  Rng rng(seed);
  DenseMatrix init(d1, d2);
  for (double& x : init.values) x = rng.normal();
  double nrm = frobenius_norm(init);
  if (nrm > 0.0) {
    for (double& x : init.values) x /= nrm;
  }
  SparseLowRank feasible = project_sparse_lowrank_factored(init, hp.r, s1, s2);

  VectorXd S = flat_of(feasible.matrix);
  VectorXd mult = VectorXd::Zero(S.size());
  double rho = hp.rho0;
  InnerPoint cur;
  bool has_warm = false;
  SplitOutcome out;
  for (int iter = 0; iter < hp.max_admm_iters;) {
    VectorXd sbar = tether_center_flat(S, mult, rho, hp.lambda);
    InnerPoint start_pt;
    if (has_warm) {
      start_pt = cur;
    } else {
      start_pt.coeff = sbar;
      start_pt.intercept = 0.0;
      start_pt.covar = VectorXd::Zero(eng.covar_size());
    }
    cur = solve_primal(eng, hp.loss, weight, sign, sbar, hp.lambda + rho,
                       hp.max_inner_iters, fit_intercept, start_pt);
    has_warm = true;
    feasible = project_sparse_lowrank_factored(
        unflat(dual_target_flat(cur.coeff, mult, rho), d1, d2), hp.r, s1, s2);
    S = flat_of(feasible.matrix);
    mult = multiplier_step_flat(mult, cur.coeff, S, rho);
    double residual = (cur.coeff - S).norm() / std::max(1.0, S.norm());
    double objective = penalized_objective(
        eng, weight, sign, hp.loss, hp.lambda,
        InnerPoint{S, cur.intercept, cur.covar});
    out.objective_trace.push_back(objective);
    if (sink) sink({start_index, iter, objective, residual, rho});
    ++iter;
    if (residual < hp.primal_tol) break;
    rho *= hp.rho_growth;
  }
  out.feasible = std::move(feasible);
  out.intercept = cur.intercept;
  out.covar = std::move(cur.covar);
  return out;
}

}  // namespace assist::detail
