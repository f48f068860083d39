#pragma once

// Scripted desk-scale experiments emitting machine-readable CSV: the
// sample-size error trend for the regression estimator, the numerical-rank
// growth of monotonically transformed low-rank matrices, and the completion
// head-to-head against the hard imputation baseline. Every run is
// bit-deterministic given its arguments.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "assist/types.hpp"

namespace assist {

// Light solver budgets sized so the full benches finish in minutes on one
// core; r/s1/s2 (and H for completion) are overwritten per grid point.
Hyperparams bench_fit_defaults();
Hyperparams bench_completion_defaults();

// L1-error trend over sample sizes. For every (r, s) in rs_list and n in
// n_list, fits `seeds` independently generated smooth-link continuous
// datasets (d x d predictors, rank r on an s x s block, noise_sd noise) and
// measures the Monte Carlo L1 error against the generator's evaluable truth
// with eval_draws fresh draws.
// CSV columns: n,r,s,mean,se
std::string run_fig5(int seeds, const std::vector<int>& n_list, int d,
                     const std::vector<std::pair<int, int>>& rs_list,
                     const Hyperparams& base, double noise_sd = 0.1,
                     int eval_draws = 2000);
std::string run_fig5(int seeds, const std::vector<int>& n_list, int d,
                     const std::vector<std::pair<int, int>>& rs_list);

// Numerical rank of the entrywise logistic transform g_c(B) for seeded
// random rank-`rank` d x d matrices B, across the sharpness values in
// c_list.
// CSV columns: c,seed,rank
std::string run_fig1a(const std::vector<double>& c_list, int d, int seeds,
                      int rank = 5);

// Completion head-to-head on a fixture matrix: sample (1 - missing_frac) of
// the entries, fit the level-aggregation model and the rank-r hard
// imputation baseline, and report whole-matrix mean absolute error for
// both.
// CSV columns: r,seed,assist_mae,baseline_mae
std::string run_completion_bench(const DenseMatrix& fixture,
                                 double missing_frac,
                                 const std::vector<int>& r_list, int seeds,
                                 const Hyperparams& base,
                                 int baseline_iters = 30);
std::string run_completion_bench(const DenseMatrix& fixture,
                                 double missing_frac,
                                 const std::vector<int>& r_list, int seeds);

}  // namespace assist
