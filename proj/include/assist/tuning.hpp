#pragma once

// K-fold cross-validation over hyperparameter grids and the parsimony rule
// used to pick among near-tied configurations.

#include <string>
#include <utility>
#include <vector>

#include "assist/model.hpp"
#include "assist/types.hpp"

namespace assist {

// Held-out scoring metrics. All are loss-type (lower is better): l1 and mae
// both average |prediction - response| on the raw scale (two names, one
// number, kept for symmetry with the regression and completion flows);
// misclass_at_half thresholds predictions and responses at raw 1/2 and
// counts disagreements, for binary 0/1 responses.
enum class CvMetric { l1, misclass_at_half, mae };

struct FoldSplit {
  std::vector<int> train;
  std::vector<int> validation;
};

// Balanced deterministic partition of [0, n) into k validation folds
// (sizes differ by at most one); train is the complement. 2 <= k <= n.
std::vector<FoldSplit> kfold_split(int n, int k, std::uint64_t seed);

struct CvRow {
  Hyperparams hp;
  double mean = 0.0;  // NaN when failed
  double se = 0.0;    // sample std of fold scores / sqrt(k); NaN when failed
  bool failed = false;
};
using CvTable = std::vector<CvRow>;

// Scores a fitted model on the indexed samples of data under the metric.
double holdout_score(const SignSeriesModel& model, const Dataset& data,
                     const std::vector<int>& indices, CvMetric metric);

// One row per grid point: fit on each fold's train split, score its
// validation split, report mean and standard error over folds. A fit error
// marks that row failed instead of aborting the sweep. Deterministic given
// the data and the grid (folds are seeded from fold_seed).
CvTable cross_validate(const Dataset& data,
                       const std::vector<Hyperparams>& grid, int k,
                       CvMetric metric, std::uint64_t fold_seed = 0);

// Most parsimonious row whose mean stays within one standard error of the
// best row's mean: minimizes r*(s1+s2), ties broken by smaller r, then
// smaller s1+s2, then table order. Failed rows are skipped; throws when the
// table is empty, every row failed, or a surviving score is non-finite.
Hyperparams one_se_rule(const CvTable& table);

// Square-support grid following the increment guidance with r <= s1 = s2:
// s runs over multiples of increment up to d_min, r over multiples of
// increment up to s; every other field copies base.
std::vector<Hyperparams> square_support_grid(const Hyperparams& base,
                                             int d_min, int increment = 5);

// CSV serialization with header r,s1,s2,H,lambda,loss,mean,se,status.
std::string cv_table_csv(const CvTable& table);

}  // namespace assist
