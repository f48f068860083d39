#include "assist/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace assist {

double margin_loss(LossKind kind, double z) {
  if (!std::isfinite(z)) {
    throw std::invalid_argument("margin_loss: non-finite margin");
  }
  double hinge = std::max(1.0 - z, 0.0);
  switch (kind) {
    case LossKind::hinge:
      return hinge;
    case LossKind::psi:
      return 2.0 * std::min(1.0, hinge);
    case LossKind::zero_one:
      throw std::invalid_argument(
          "margin_loss: zero-one loss is not a margin function; use "
          "weighted_01_loss");
  }
  throw std::invalid_argument("margin_loss: unknown loss kind");
}

double weighted_01_loss(const TraceFunction& tf, const Dataset& data,
                        double level) {
  data.validate();
  double acc = 0.0;
  for (const Sample& s : data.samples) {
    double w = std::abs(s.response - level);
    if (w == 0.0) continue;
    int target = sgn(s.response - level);
    int predicted = sgn(tf.evaluate(s.predictor, s.covariates));
    if (target != predicted) acc += 2.0 * w;
  }
  return acc / (2.0 * data.n());
}

double weighted_margin_objective(const TraceFunction& tf, const Dataset& data,
                                 double level, LossKind kind, double lambda) {
  data.validate();
  if (lambda < 0) {
    throw std::invalid_argument("weighted_margin_objective: lambda must be >= 0");
  }
  double acc = 0.0;
  for (const Sample& s : data.samples) {
    double w = std::abs(s.response - level);
    if (w == 0.0) continue;
    double margin =
        tf.evaluate(s.predictor, s.covariates) * sgn(s.response - level);
    acc += w * margin_loss(kind, margin);
  }
  double bnorm = frobenius_norm(coefficient_matrix(tf));
  return acc / data.n() + lambda * bnorm * bnorm;
}

const char* loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::zero_one:
      return "zero-one";
    case LossKind::hinge:
      return "hinge";
    case LossKind::psi:
      return "psi";
  }
  return "unknown";
}

LossKind parse_loss_kind(const std::string& name) {
  if (name == "zero-one" || name == "01" || name == "zero_one") {
    return LossKind::zero_one;
  }
  if (name == "hinge") return LossKind::hinge;
  if (name == "psi") return LossKind::psi;
  throw std::invalid_argument("unknown loss kind: " + name);
}

}  // namespace assist
