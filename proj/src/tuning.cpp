#include "assist/tuning.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "assist/loss.hpp"
#include "assist/rng.hpp"

namespace assist {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

Dataset subset(const Dataset& data, const std::vector<int>& indices) {
  Dataset out;
  out.d1 = data.d1;
  out.d2 = data.d2;
  out.p = data.p;
  out.scale = data.scale;
  out.samples.reserve(indices.size());
  for (int i : indices) out.samples.push_back(data.samples[i]);
  return out;
}

// Complexity key (r*(s1+s2), r, s1+s2): the leading product mirrors the
// parameter-count rate of the constrained class.
std::array<int, 3> complexity_key(const Hyperparams& hp) {
  return {hp.r * (hp.s1 + hp.s2), hp.r, hp.s1 + hp.s2};
}

const char* loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::zero_one:
      return "zero_one";
    case LossKind::hinge:
      return "hinge";
    case LossKind::psi:
      return "psi";
  }
  return "unknown";
}

}  // namespace

std::vector<FoldSplit> kfold_split(int n, int k, std::uint64_t seed) {
  if (k < 2 || k > n) {
    throw std::invalid_argument("kfold_split: need 2 <= k <= n");
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (int i = n - 1; i > 0; --i) {
    int j = static_cast<int>(rng.uniform_index(i + 1));
    std::swap(order[i], order[j]);
  }
  std::vector<FoldSplit> folds(k);
  int base = n / k;
  int extra = n % k;  // the first n%k folds get one more sample
  int pos = 0;
  for (int f = 0; f < k; ++f) {
    int size = base + (f < extra ? 1 : 0);
    folds[f].validation.assign(order.begin() + pos,
                               order.begin() + pos + size);
    pos += size;
  }
  for (int f = 0; f < k; ++f) {
    std::sort(folds[f].validation.begin(), folds[f].validation.end());
    folds[f].train.reserve(n - folds[f].validation.size());
    for (int g = 0; g < k; ++g) {
      if (g == f) continue;
      folds[f].train.insert(folds[f].train.end(), folds[g].validation.begin(),
                            folds[g].validation.end());
    }
    std::sort(folds[f].train.begin(), folds[f].train.end());
  }
  return folds;
}

double holdout_score(const SignSeriesModel& model, const Dataset& data,
                     const std::vector<int>& indices, CvMetric metric) {
  if (indices.empty()) {
    throw std::invalid_argument("holdout_score: no indices");
  }
  double acc = 0.0;
  for (int i : indices) {
    const Sample& s = data.samples[i];
    double pred = predict(model, s.predictor, s.covariates);
    double raw = data.scale.to_raw(s.response);
    if (metric == CvMetric::misclass_at_half) {
      acc += sgn(pred - 0.5) != sgn(raw - 0.5) ? 1.0 : 0.0;
    } else {
      acc += std::abs(pred - raw);
    }
  }
  return acc / static_cast<double>(indices.size());
}

CvTable cross_validate(const Dataset& data,
                       const std::vector<Hyperparams>& grid, int k,
                       CvMetric metric, std::uint64_t fold_seed) {
  data.validate();
  if (grid.empty()) {
    throw std::invalid_argument("cross_validate: empty grid");
  }
  std::vector<FoldSplit> folds = kfold_split(data.n(), k, fold_seed);
  CvTable table;
  table.reserve(grid.size());
  for (const Hyperparams& hp : grid) {
    CvRow row;
    row.hp = hp;
    std::vector<double> scores;
    scores.reserve(folds.size());
    try {
      for (const FoldSplit& fold : folds) {
        SignSeriesModel model = fit(subset(data, fold.train), hp);
        scores.push_back(holdout_score(model, data, fold.validation, metric));
      }
      double mean = std::accumulate(scores.begin(), scores.end(), 0.0) /
                    scores.size();
      double var = 0.0;
      for (double s : scores) var += (s - mean) * (s - mean);
      var /= static_cast<double>(scores.size() - 1);
      row.mean = mean;
      row.se = std::sqrt(var) / std::sqrt(static_cast<double>(scores.size()));
    } catch (const std::exception&) {
      row.failed = true;
      row.mean = kNan;
      row.se = kNan;
    }
    table.push_back(row);
  }
  return table;
}

Hyperparams one_se_rule(const CvTable& table) {
  if (table.empty()) {
    throw std::invalid_argument("one_se_rule: empty table");
  }
  int best = -1;
  for (int i = 0; i < static_cast<int>(table.size()); ++i) {
    const CvRow& row = table[i];
    if (row.failed) continue;
    if (!std::isfinite(row.mean) || !std::isfinite(row.se)) {
      throw std::invalid_argument("one_se_rule: non-finite score");
    }
    if (best < 0 || row.mean < table[best].mean) best = i;
  }
  if (best < 0) {
    throw std::invalid_argument("one_se_rule: every row failed");
  }
  double threshold = table[best].mean + table[best].se;
  int pick = -1;
  for (int i = 0; i < static_cast<int>(table.size()); ++i) {
    const CvRow& row = table[i];
    if (row.failed || row.mean > threshold) continue;
    if (pick < 0 ||
        complexity_key(row.hp) < complexity_key(table[pick].hp)) {
      pick = i;
    }
  }
  return table[pick].hp;
}

std::vector<Hyperparams> square_support_grid(const Hyperparams& base,
                                             int d_min, int increment) {
  if (d_min < 1 || increment < 1) {
    throw std::invalid_argument(
        "square_support_grid: d_min and increment must be >= 1");
  }
  std::vector<Hyperparams> grid;
  for (int s = increment; s <= d_min; s += increment) {
    for (int r = increment; r <= s; r += increment) {
      Hyperparams hp = base;
      hp.r = r;
      hp.s1 = s;
      hp.s2 = s;
      grid.push_back(hp);
    }
  }
  return grid;
}

std::string cv_table_csv(const CvTable& table) {
  std::string out = "r,s1,s2,H,lambda,loss,mean,se,status\n";
  char buf[256];
  for (const CvRow& row : table) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%d,%.17g,%s,%.17g,%.17g,%s\n",
                  row.hp.r, row.hp.s1, row.hp.s2, row.hp.H, row.hp.lambda,
                  loss_name(row.hp.loss), row.mean, row.se,
                  row.failed ? "failed" : "ok");
    out += buf;
  }
  return out;
}

}  // namespace assist
