#include "assist/model.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>

#include "assist/loss.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace assist {
namespace {

SignSeriesModel fit_core(const Dataset& data, const Hyperparams& hp,
                         const LevelIterSink& sink, bool parallel) {
  data.validate();
  check_feasible(hp, data.d1, data.d2);
  if (hp.loss == LossKind::zero_one) {
    throw std::invalid_argument(
        "fit: the 0-1 loss is evaluation-only; train with hinge or psi");
  }

  SignSeriesModel model;
  model.grid = LevelGrid(hp.H);
  model.scale = data.scale;
  model.d1 = data.d1;
  model.d2 = data.d2;
  model.p = data.p;
  const int m = static_cast<int>(model.grid.levels.size());
  model.classifiers.resize(m);

  // Per-level records are buffered and emitted in grid order after the
  // parallel join, so the stream is deterministic regardless of scheduling.
  std::vector<std::vector<AdmmIterRecord>> records(sink ? m : 0);
  std::vector<std::exception_ptr> errors(m);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
#endif
  for (int k = 0; k < m; ++k) {
    try {
      AdmmIterSink local;
      if (sink) {
        auto* bucket = &records[k];
        local = [bucket](const AdmmIterRecord& rec) {
          bucket->push_back(rec);
        };
      }
      model.classifiers[k] =
          fit_sign_classifier(data, model.grid.levels[k], hp, local);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }

  for (int k = 0; k < m; ++k) {
    if (!errors[k]) continue;
    std::string where =
        "fit: level " + std::to_string(model.grid.levels[k]) + " failed: ";
    try {
      std::rethrow_exception(errors[k]);
    } catch (const SolverDivergence& e) {
      throw SolverDivergence(where + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error(where + e.what());
    }
  }
  if (sink) {
    for (int k = 0; k < m; ++k) {
      for (const AdmmIterRecord& rec : records[k]) sink(k, rec);
    }
  }
  return model;
}

}  // namespace

SignSeriesModel fit(const Dataset& data, const Hyperparams& hp,
                    const LevelIterSink& sink) {
  return fit_core(data, hp, sink, true);
}

SignSeriesModel fit_reference(const Dataset& data, const Hyperparams& hp,
                              const LevelIterSink& sink) {
  return fit_core(data, hp, sink, false);
}

double predict(const SignSeriesModel& model, const DenseMatrix& X,
               const std::vector<double>& W) {
  if (X.rows != model.d1 || X.cols != model.d2) {
    throw std::invalid_argument("predict: predictor shape mismatch");
  }
  if (static_cast<int>(W.size()) != model.p) {
    throw std::invalid_argument("predict: covariate length mismatch");
  }
  long sum = 0;  // integer sign sum: exact, order-independent
  for (const TraceFunction& tf : model.classifiers) {
    sum += sgn(tf.evaluate(X, W));
  }
  double unit =
      static_cast<double>(sum) / static_cast<double>(model.classifiers.size());
  return model.scale.to_raw(unit);
}

std::vector<double> predict_many(
    const SignSeriesModel& model, const std::vector<DenseMatrix>& predictors,
    const std::vector<std::vector<double>>& covariates) {
  if (!covariates.empty() && covariates.size() != predictors.size()) {
    throw std::invalid_argument("predict_many: covariate count mismatch");
  }
  static const std::vector<double> no_cov;
  std::vector<double> out;
  out.reserve(predictors.size());
  for (std::size_t i = 0; i < predictors.size(); ++i) {
    out.push_back(predict(model, predictors[i],
                          covariates.empty() ? no_cov : covariates[i]));
  }
  return out;
}

std::vector<double> ideal_aggregate(const std::vector<double>& f_values,
                                    int H) {
  if (H < 1) throw std::invalid_argument("ideal_aggregate: H must be >= 1");
  LevelGrid grid(H);
  std::vector<double> out;
  out.reserve(f_values.size());
  for (double f : f_values) {
    if (!(f >= -1.0 && f <= 1.0)) {
      throw std::invalid_argument("ideal_aggregate: values must lie in [-1, 1]");
    }
    long sum = 0;
    for (double level : grid.levels) sum += sgn(f - level);
    out.push_back(static_cast<double>(sum) /
                  static_cast<double>(grid.levels.size()));
  }
  return out;
}

DenseMatrix feature_importance(const SignSeriesModel& model, int window) {
  const int m = static_cast<int>(model.classifiers.size());
  if (window < 1 || window > m || window % 2 == 0) {
    throw std::invalid_argument(
        "feature_importance: window must be odd and within 1..2H+1");
  }
  std::vector<DenseMatrix> mats;
  mats.reserve(m);
  for (const TraceFunction& tf : model.classifiers) {
    mats.push_back(coefficient_matrix(tf));
  }
  const int half = window / 2;
  DenseMatrix out(model.d1, model.d2, 0.0);
  for (int i = 0; i < model.d1; ++i) {
    for (int j = 0; j < model.d2; ++j) {
      double best = 0.0;
      for (int k = 0; k < m; ++k) {
        double acc = 0.0;
        for (int t = std::max(0, k - half); t <= std::min(m - 1, k + half);
             ++t) {
          acc += std::abs(mats[t](i, j));
        }
        best = std::max(best, acc / window);
      }
      out(i, j) = best;
    }
  }
  return out;
}

}  // namespace assist
