#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <utility>

namespace msm {

enum class PenaltyKind { None, Box, L1, L0, Custom };

/// Separable regularizer h(x) = sum_i h(x_i).
///
/// The built-in kinds cover the common cases: no penalty, a box indicator
/// with uniform scalar bounds, lambda*|t| and lambda*|t|_0. A custom kind
/// carries a user-supplied scalar prox (see scalar_prox.hpp for the
/// subproblem it must solve) together with a value function used when
/// evaluating objectives, and a convexity declaration that selects which
/// descent modulus governs validation.
///
/// Per-coordinate box bounds would slot in here as a vector-valued Box
/// variant; the solvers only ever query bounds through lb()/ub().
class Penalty {
 public:
  using ScalarProx = std::function<double(double b_jj, double w_j)>;
  using ScalarValue = std::function<double(double t)>;

  static Penalty none() { return Penalty(PenaltyKind::None); }

  static Penalty box(double lb, double ub) {
    if (std::isnan(lb) || std::isnan(ub) || lb > ub)
      throw std::invalid_argument("Penalty::box: requires lb <= ub");
    Penalty p(PenaltyKind::Box);
    p.lb_ = lb;
    p.ub_ = ub;
    return p;
  }

  static Penalty l1(double lambda) {
    if (!(lambda >= 0.0))
      throw std::invalid_argument("Penalty::l1: requires lambda >= 0");
    Penalty p(PenaltyKind::L1);
    p.lambda_ = lambda;
    return p;
  }

  static Penalty l0(double lambda) {
    if (!(lambda >= 0.0))
      throw std::invalid_argument("Penalty::l0: requires lambda >= 0");
    Penalty p(PenaltyKind::L0);
    p.lambda_ = lambda;
    return p;
  }

  /// Custom scalar penalty. `prox` must return the global minimizer of
  /// t -> 0.5*b_jj*t^2 + w_j*t + h(t); `value` evaluates h itself (it is
  /// only consulted by objective evaluation, never by the solvers' inner
  /// loops). `convex` declares which descent modulus applies.
  static Penalty custom(ScalarProx prox, ScalarValue value, bool convex) {
    if (!prox || !value)
      throw std::invalid_argument("Penalty::custom: requires callable prox and value");
    Penalty p(PenaltyKind::Custom);
    p.prox_ = std::move(prox);
    p.value_ = std::move(value);
    p.convex_ = convex;
    return p;
  }

  PenaltyKind kind() const { return kind_; }
  double lb() const { return lb_; }
  double ub() const { return ub_; }
  double lambda() const { return lambda_; }
  bool convex() const { return convex_; }
  const ScalarProx& custom_prox() const { return prox_; }

  /// h(t) for a single coordinate. Box returns +inf outside its bounds.
  double value(double t) const {
    switch (kind_) {
      case PenaltyKind::None:
        return 0.0;
      case PenaltyKind::Box:
        return (t >= lb_ && t <= ub_) ? 0.0
                                      : std::numeric_limits<double>::infinity();
      case PenaltyKind::L1:
        return lambda_ * std::abs(t);
      case PenaltyKind::L0:
        return t != 0.0 ? lambda_ : 0.0;
      case PenaltyKind::Custom:
        return value_(t);
    }
    return 0.0;  // unreachable
  }

 private:
  explicit Penalty(PenaltyKind kind) : kind_(kind) {
    convex_ = kind != PenaltyKind::L0;
  }

  PenaltyKind kind_;
  double lb_ = -std::numeric_limits<double>::infinity();
  double ub_ = std::numeric_limits<double>::infinity();
  double lambda_ = 0.0;
  bool convex_ = true;
  ScalarProx prox_;
  ScalarValue value_;
};

}  // namespace msm
