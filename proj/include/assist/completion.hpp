#pragma once

// Matrix completion specialization: each grid level gets a rank-constrained
// score matrix fitted by weighted classification over the observed entries
// only, and the entrywise signs of those scores aggregate into the estimate.

#include <tuple>
#include <utility>
#include <vector>

#include "assist/types.hpp"

namespace assist {

// One observed entry; y is on the solver's unit scale.
struct ObservedEntry {
  int i = 0;
  int j = 0;
  double y = 0.0;
};

// Sparse triplet view of a partially observed matrix. Duplicate entries are
// permitted (observation with replacement) and each occurrence contributes
// separately to the fit.
struct ObservedMatrix {
  int d1 = 0;
  int d2 = 0;
  std::vector<ObservedEntry> entries;
  ResponseScale scale;

  // Index ranges, finiteness, y in [-1, 1]. Throws std::invalid_argument.
  void validate() const;
};

// Builds an ObservedMatrix from raw-scale entries, applying
// rescale_responses to the observed values.
ObservedMatrix make_observed(int d1, int d2,
                             const std::vector<ObservedEntry>& raw_entries);

// One level's score matrix Z = u * v^T, stored factored so the rank bound
// holds by construction; only its entrywise signs enter the estimate.
struct CompletionLevel {
  DenseMatrix u;  // d1 x r
  DenseMatrix v;  // d2 x r

  // Z(i, j) = sum_k u(i, k) v(j, k)
  double score(int i, int j) const;
};

struct CompletionModel {
  LevelGrid grid;
  std::vector<CompletionLevel> sign_factors;  // one per grid level, same order
  ResponseScale scale;
  int d1 = 0;
  int d2 = 0;
};

// Fits one score matrix per grid level by the same splitting scheme as the
// regression path, specialized to entry lookup: no support constraint
// (s1 = d1, s2 = d2), no intercept, margins read directly from Z at the
// observed positions. hp.s1/hp.s2 are ignored. Deterministic in hp.seed.
CompletionModel fit_completion(const ObservedMatrix& obs,
                               const Hyperparams& hp);

// Entrywise aggregate (1/(2H+1)) sum over levels of sgn(Z_level(i, j)),
// mapped back through the model's scale. Entries lie in the raw range.
DenseMatrix impute(const CompletionModel& model);

// Mean absolute error over all entries.
double completion_mae(const DenseMatrix& estimate, const DenseMatrix& truth);

// Mean absolute error over the masked entries only; the mask must be
// non-empty and index into the shared shape.
double completion_mae(const DenseMatrix& estimate, const DenseMatrix& truth,
                      const std::vector<std::pair<int, int>>& mask);

// Weighted 0-1 classification loss of a score matrix at one level over the
// observed entries: (1/(2|entries|)) sum |y - level| |sgn(y - level) -
// sgn(Z(i, j))|.
double completion_01_loss(const ObservedMatrix& obs, const DenseMatrix& score,
                          double level);

}  // namespace assist
