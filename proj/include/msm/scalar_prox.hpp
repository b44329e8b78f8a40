#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "msm/penalty.hpp"

namespace msm {

/// One-dimensional subproblem min_t 0.5*b_jj*t^2 + w_j*t + h(t).
/// b_jj > 0 is guaranteed upstream by splitting validation.
struct ScalarSubproblem {
  double b_jj = 1.0;
  double w = 0.0;
};

namespace detail {

inline void require_positive_curvature(double b_jj) {
  if (!(b_jj > 0.0) || !std::isfinite(b_jj))
    throw std::invalid_argument("scalar prox: requires b_jj > 0");
}

}  // namespace detail

/// h == 0: the unconstrained minimizer -w/b.
inline double prox_none(ScalarSubproblem sub) {
  detail::require_positive_curvature(sub.b_jj);
  return -sub.w / sub.b_jj;
}

/// Box indicator: clip the unconstrained minimizer to [lb, ub].
inline double prox_box(ScalarSubproblem sub, double lb, double ub) {
  detail::require_positive_curvature(sub.b_jj);
  if (std::isnan(lb) || std::isnan(ub) || lb > ub)
    throw std::invalid_argument("prox_box: requires lb <= ub");
  return std::min(ub, std::max(lb, -sub.w / sub.b_jj));
}

/// lambda*|t|: soft threshold, t* = -max(0, |w/b| - lambda/b) * sign(w/b).
/// sign(0) is taken as 0, so w == 0 maps to 0.
inline double prox_l1(ScalarSubproblem sub, double lambda) {
  detail::require_positive_curvature(sub.b_jj);
  if (!(lambda >= 0.0)) throw std::invalid_argument("prox_l1: requires lambda >= 0");
  const double r = sub.w / sub.b_jj;
  const double magnitude = std::max(0.0, std::abs(r) - lambda / sub.b_jj);
  if (r > 0.0) return -magnitude;
  if (r < 0.0) return magnitude;
  return 0.0;
}

/// lambda*|t|_0: hard threshold, t* = -w/b when w^2 > 2*lambda*b, else 0.
/// The tie w^2 == 2*lambda*b resolves to 0; both candidates attain the same
/// objective there, so only the reported sparsity differs.
inline double prox_l0(ScalarSubproblem sub, double lambda) {
  detail::require_positive_curvature(sub.b_jj);
  if (!(lambda >= 0.0)) throw std::invalid_argument("prox_l0: requires lambda >= 0");
  return (sub.w * sub.w > 2.0 * lambda * sub.b_jj) ? -sub.w / sub.b_jj : 0.0;
}

/// Dispatch on penalty kind; the workhorse of the elimination loop.
inline double prox_scalar(ScalarSubproblem sub, const Penalty& penalty) {
  switch (penalty.kind()) {
    case PenaltyKind::None:
      return prox_none(sub);
    case PenaltyKind::Box:
      return prox_box(sub, penalty.lb(), penalty.ub());
    case PenaltyKind::L1:
      return prox_l1(sub, penalty.lambda());
    case PenaltyKind::L0:
      return prox_l0(sub, penalty.lambda());
    case PenaltyKind::Custom:
      return penalty.custom_prox()(sub.b_jj, sub.w);
  }
  return 0.0;  // unreachable
}

/// 0.5*b*t^2 + w*t + h(t), the quantity every prox above minimizes.
inline double prox_objective(ScalarSubproblem sub, const Penalty& penalty, double t) {
  return 0.5 * sub.b_jj * t * t + sub.w * t + penalty.value(t);
}

/// Grid-search reference solver. Evaluates a uniform grid over [lo, hi] and
/// always also tries t = 0, the stationary point -w/b, and any finite box
/// bounds, so hard-threshold discontinuities and exact interior optima are
/// found regardless of grid resolution. Objectives are compared in extended
/// precision with ties kept by the analytic candidates (evaluated first), so
/// a grid point one ulp off an exact optimum cannot displace it.
inline double prox_oracle_grid(ScalarSubproblem sub, const Penalty& penalty,
                               double lo, double hi, long points) {
  detail::require_positive_curvature(sub.b_jj);
  if (!(lo < hi) || points < 3)
    throw std::invalid_argument("prox_oracle_grid: requires lo < hi and points >= 3");

  const auto value_at = [&](double t) -> long double {
    const long double td = t;
    return 0.5L * static_cast<long double>(sub.b_jj) * td * td +
           static_cast<long double>(sub.w) * td +
           static_cast<long double>(penalty.value(t));
  };
  double best_t = 0.0;
  long double best_value = value_at(0.0);
  auto consider = [&](double t) {
    const long double value = value_at(t);
    // Replace the incumbent only on an improvement beyond evaluation
    // roundoff; adjacent grid points then cannot displace an exact
    // stationary candidate on noise-level ties.
    const long double margin =
        std::isfinite(static_cast<double>(best_value))
            ? 1e-17L * (1.0L + (best_value < 0 ? -best_value : best_value))
            : 0.0L;
    if (value < best_value - margin) {
      best_value = value;
      best_t = t;
    }
  };

  consider(-sub.w / sub.b_jj);
  if (penalty.kind() == PenaltyKind::Box) {
    if (std::isfinite(penalty.lb())) consider(penalty.lb());
    if (std::isfinite(penalty.ub())) consider(penalty.ub());
  }
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (long i = 0; i < points; ++i) consider(lo + step * static_cast<double>(i));
  return best_t;
}

}  // namespace msm
