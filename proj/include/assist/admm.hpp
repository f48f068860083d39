#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "assist/types.hpp"

namespace assist {

// Raised when the primal solver produces a non-finite iterate, or by
// fit_sign_classifier when every start fails that way.
struct SolverDivergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unconstrained classifier parameters: phi(X) = <X, B> + b + W.c.
struct PrimalPoint {
  DenseMatrix B;
  double b = 0.0;
  std::vector<double> c;
};

// State of one run of the splitting scheme. S is the feasible copy of B (the
// rank and support budgets hold exactly there); the multiplier ties the two.
struct AdmmState {
  DenseMatrix B;
  double b = 0.0;
  std::vector<double> c;
  DenseMatrix S;
  DenseMatrix multiplier;
  double rho = 0.0;
  int iter = 0;
  std::vector<double> objective_trace;  // penalized objective at (S, b, c)
};

// One row of the optional per-iteration diagnostic stream.
struct AdmmIterRecord {
  int start = 0;
  int iteration = 0;
  double objective = 0.0;        // penalized objective at (S, b, c)
  double primal_residual = 0.0;  // ||B - S||_F / max(1, ||S||_F)
  double rho = 0.0;
};
using AdmmIterSink = std::function<void(const AdmmIterRecord&)>;

// Approximately minimizes, over (B, b, c),
//   (1/n) sum_i |Y_i - level| * F((<X_i,B> + b + W_i.c) * sgn(Y_i - level))
//     + (lambda + rho) * ||B - Sbar||_F^2
// with tether center Sbar = (2 rho S - multiplier) / (2 (rho + lambda)),
// by proximal subgradient descent (step 1/sqrt(t), tether handled in closed
// form, best iterate kept). The psi loss runs a short difference-of-convex
// loop on top, each round a hinge-like problem warm-started from the last.
// With a warm start the returned objective never exceeds the warm objective.
// When every weight |Y_i - level| is zero the exact minimizer (Sbar, 0, 0)
// is returned directly.
PrimalPoint primal_update(const Dataset& data, double level,
                          const DenseMatrix& S, const DenseMatrix& multiplier,
                          double rho, double lambda, LossKind kind,
                          const PrimalPoint* warm, int max_inner_iters);

// Feasible copy: project_sparse_lowrank((2 rho B + multiplier) / (2 rho)).
DenseMatrix dual_update(const DenseMatrix& B, const DenseMatrix& multiplier,
                        double rho, int r, int s1, int s2);

// multiplier + 2 rho (B - S), entrywise.
DenseMatrix multiplier_update(const DenseMatrix& multiplier,
                              const DenseMatrix& B, const DenseMatrix& S,
                              double rho);

// Fits one level's classifier: hp.n_starts independent runs of the splitting
// scheme (each seeded from hp.seed, the level's grid index, and the start
// index), rho growing geometrically each outer iteration, stopping when the
// relative primal residual drops below hp.primal_tol or hp.max_admm_iters is
// reached. Returns the feasible classifier (built from S, so the budgets
// hold exactly) with the lowest penalized surrogate objective across starts;
// the intercept is clamped into |b| <= ||B||_F + 1. Deterministic: identical
// inputs give a bit-identical classifier. The sink, when set, receives one
// record per outer iteration.
TraceFunction fit_sign_classifier(const Dataset& data, double level,
                                  const Hyperparams& hp,
                                  const AdmmIterSink& sink = {});

}  // namespace assist
