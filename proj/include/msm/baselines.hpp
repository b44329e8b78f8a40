#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "msm/penalty.hpp"
#include "msm/problem.hpp"
#include "msm/run.hpp"
#include "msm/scalar_prox.hpp"
#include "msm/solver.hpp"
#include "msm/splitting.hpp"

namespace msm {

enum class LipschitzMethod { ExactDense, PowerIteration };

struct LipschitzEstimate {
  double value = 0.0;
  LipschitzMethod method = LipschitzMethod::ExactDense;
  int iterations_used = 0;
};

/// Gradient Lipschitz constant of the quadratic part, L = ||A||_2. The
/// power estimate carries a 1e-6 inflation so gamma = 1/L stays feasible.
inline LipschitzEstimate estimate_lipschitz(
    const QuadraticProblem& problem,
    LipschitzMethod method = LipschitzMethod::ExactDense, int iterations = 200) {
  if (problem.size() == 0)
    throw std::invalid_argument("estimate_lipschitz: empty problem");
  LipschitzEstimate est;
  est.method = method;
  if (method == LipschitzMethod::ExactDense) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(problem.a(),
                                                       Eigen::EigenvaluesOnly);
    est.value = eig.eigenvalues().cwiseAbs().maxCoeff();
  } else {
    est.value = spectral_norm_power(problem.a(), iterations);
    est.iterations_used = iterations;
  }
  if (!(est.value > 0.0))
    throw std::runtime_error("estimate_lipschitz: nonpositive estimate");
  return est;
}

/// prox_{gamma h}(point): the proximal map of h with step gamma, realized
/// through the 1-D subproblem with curvature 1/gamma and linear term
/// -point/gamma. Identical to the solver's coordinate maps by construction.
inline double prox_moreau(const Penalty& penalty, double gamma, double point) {
  if (!(gamma > 0.0))
    throw std::invalid_argument("prox_moreau: requires gamma > 0");
  return prox_scalar({1.0 / gamma, -point / gamma}, penalty);
}

enum class StepRule { Constant, LineSearch };

struct PgmOptions {
  StepRule step_rule = StepRule::Constant;
  bool accelerated = false;
  LipschitzMethod lipschitz = LipschitzMethod::ExactDense;
  int lipschitz_iterations = 200;
  // Callers solving many problems that share a quadratic part can pass the
  // constant once instead of re-estimating it per solve.
  std::optional<double> lipschitz_value;
};

/// Proximal gradient descent x+ = prox_{gamma h}(y - gamma (Ay + b)).
/// Constant rule uses gamma = 1/L. Line search starts from 10/L, halves
/// until the quadratic upper bound on q holds at the base point, and keeps
/// the accepted gamma for the next iteration. Acceleration is the standard
/// two-sequence momentum t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2; it is not
/// monotone and no restarts are applied.
///
/// The certificate column records max(L, 1/gamma) * ||x+ - y||, which
/// bounds ||A x+ + b + v|| for the subgradient v selected by the prox.
inline SolverRun pgm_solve(const QuadraticProblem& problem, const Penalty& penalty,
                           const Eigen::VectorXd& x0, const PgmOptions& options = {},
                           const StoppingRule& stop = {},
                           TracePolicy trace = TracePolicy::LastOnly) {
  if (x0.size() != problem.size())
    throw std::invalid_argument("pgm_solve: x0 dimension mismatch");
  detail::require_finite(x0, "pgm_solve: x0");
  if (stop.max_iterations < 0)
    throw std::invalid_argument("pgm_solve: max_iterations must be >= 0");

  if (options.lipschitz_value && !(*options.lipschitz_value > 0.0))
    throw std::invalid_argument("pgm_solve: lipschitz_value must be > 0");
  const double lipschitz =
      options.lipschitz_value
          ? *options.lipschitz_value
          : estimate_lipschitz(problem, options.lipschitz,
                               options.lipschitz_iterations)
                .value;
  const bool line_search = options.step_rule == StepRule::LineSearch;
  double gamma = line_search ? 10.0 / lipschitz : 1.0 / lipschitz;

  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  };

  SolverRun run;
  run.iterates_kept = trace == TracePolicy::FullTrace;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd y = x0;
  double t = 1.0;
  run.objectives.push_back(objective(problem, penalty, x));
  if (run.iterates_kept) run.iterates.push_back(x);

  const auto prox_step = [&](const Eigen::VectorXd& base,
                             const Eigen::VectorXd& grad,
                             double step) {
    Eigen::VectorXd z(base.size());
    for (Eigen::Index j = 0; j < base.size(); ++j)
      z(j) = prox_moreau(penalty, step, base(j) - step * grad(j));
    return z;
  };

  run.status = Status::MaxIterations;
  for (long k = 0; k < stop.max_iterations; ++k) {
    const Eigen::VectorXd grad = problem.a() * y + problem.b();
    const double q_base = problem.quadratic(y);
    Eigen::VectorXd x_next = prox_step(y, grad, gamma);
    if (line_search) {
      const double accept_slack = 1e-12 * (1.0 + std::abs(q_base));
      int halvings = 0;
      while (true) {
        const Eigen::VectorXd d = x_next - y;
        if (problem.quadratic(x_next) <=
            q_base + grad.dot(d) + d.squaredNorm() / (2.0 * gamma) + accept_slack)
          break;
        if (++halvings > 200)
          throw std::runtime_error("pgm_solve: line search step underflow");
        gamma *= 0.5;
        x_next = prox_step(y, grad, gamma);
      }
    }
    if (!x_next.allFinite())
      throw std::runtime_error("pgm_solve: non-finite iterate");

    const double base_step = (x_next - y).norm();
    const double certificate = std::max(lipschitz, 1.0 / gamma) * base_step;
    const double step = (x_next - x).norm();
    const double relative_step = step / (1.0 + x.norm());
    run.step_norms.push_back(step);
    run.certificates.push_back(certificate);
    run.objectives.push_back(objective(problem, penalty, x_next));
    if (run.iterates_kept) run.iterates.push_back(x_next);
    run.cumulative_seconds.push_back(elapsed());
    ++run.iterations;

    if (options.accelerated) {
      const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
      y = x_next + ((t - 1.0) / t_next) * (x_next - x);
      t = t_next;
    } else {
      y = x_next;
    }
    x = x_next;
    if ((stop.tol_step >= 0.0 && relative_step <= stop.tol_step) ||
        (stop.tol_certificate >= 0.0 && certificate <= stop.tol_certificate)) {
      run.status = Status::Converged;
      break;
    }
    if (elapsed() >= stop.max_wall_time) break;
  }
  run.x = std::move(x);
  run.wall_time = elapsed();
  return run;
}

}  // namespace msm
