#pragma once

#include <string>

#include "assist/types.hpp"

namespace assist {

// Sign with the convention sgn(0) = -1: +1 iff x > 0.
inline int sgn(double x) { return x > 0.0 ? 1 : -1; }

// Margin losses of the functional margin z:
//   hinge: (1 - z)_+
//   psi:   2 * min(1, (1 - z)_+), bounded, nonconvex
// The zero-one kind is rejected here; it is an evaluation metric only.
double margin_loss(LossKind kind, double z);

// (1 / 2n) * sum_i |Y_i - level| * |sgn(Y_i - level) - sgn(phi(X_i))|
// where phi(X) = <X, B> + b + W.c. Scale-invariant in phi: only signs enter.
double weighted_01_loss(const TraceFunction& tf, const Dataset& data,
                        double level);

// Penalized empirical surrogate risk:
// (1/n) sum_i |Y_i - level| * F(phi(X_i) * sgn(Y_i - level)) + lambda*||B||_F^2
double weighted_margin_objective(const TraceFunction& tf, const Dataset& data,
                                 double level, LossKind kind, double lambda);

const char* loss_kind_name(LossKind kind);
LossKind parse_loss_kind(const std::string& name);

}  // namespace assist
