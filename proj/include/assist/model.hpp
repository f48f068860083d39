#pragma once

#include <functional>
#include <vector>

#include "assist/admm.hpp"
#include "assist/types.hpp"

namespace assist {

// Per-iteration diagnostics from fit, tagged with the grid index of the level
// being fit. Records arrive grouped by level in grid order.
using LevelIterSink = std::function<void(int level_idx, const AdmmIterRecord&)>;

// Fits one classifier per grid level and records the grid and response scale.
// Levels are independent (seeds derive from the level's grid index, never
// from scheduling order) and run in parallel when OpenMP is enabled; the
// result is bit-identical to fit_reference. Per-level solver errors are
// rethrown annotated with the offending level.
SignSeriesModel fit(const Dataset& data, const Hyperparams& hp,
                    const LevelIterSink& sink = {});

// Serial implementation of the same contract, kept as the reference the
// parallel path is checked and benchmarked against.
SignSeriesModel fit_reference(const Dataset& data, const Hyperparams& hp,
                              const LevelIterSink& sink = {});

// Mean of the classifier signs mapped back to the raw response scale:
// to_raw((1/(2H+1)) sum_k sgn(phi_k(X))). Always inside the raw range.
double predict(const SignSeriesModel& model, const DenseMatrix& X,
               const std::vector<double>& W = {});

std::vector<double> predict_many(
    const SignSeriesModel& model, const std::vector<DenseMatrix>& predictors,
    const std::vector<std::vector<double>>& covariates = {});

// Aggregation of the exact sign functions (1/(2H+1)) sum_pi sgn(f - pi) for
// each value in f_values, which must lie in [-1, 1]. The deterministic core
// of the estimator; its bias against f is at most 1/H.
std::vector<double> ideal_aggregate(const std::vector<double>& f_values,
                                    int H);

// Entrywise maximum over levels of the window-length moving average of
// |B_level| (window odd, 1 <= window <= 2H+1; series zero-padded at the
// ends). Highlights entries that matter across neighboring levels.
DenseMatrix feature_importance(const SignSeriesModel& model, int window);

}  // namespace assist
