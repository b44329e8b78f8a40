#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "msm/penalty.hpp"
#include "msm/problem.hpp"
#include "msm/run.hpp"
#include "msm/splitting.hpp"

namespace msm {
namespace detail {

inline double objective_raw(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                            const Penalty& penalty, const Eigen::VectorXd& x) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) h += penalty.value(x(i));
  return 0.5 * x.dot(a * x) + x.dot(b) + h;
}

/// Shared fixed-point loop. solve() and solve_matrix() both funnel through
/// this, so a matrix solve is bit-identical to solving its columns one at a
/// time.
inline SolverRun run_core(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                          const Splitting& splitting, const Penalty& penalty,
                          const Eigen::VectorXd& x0, const StoppingRule& stop,
                          const MonitorPolicy& monitor, TracePolicy trace,
                          bool relax_violations) {
  if (x0.size() != b.size())
    throw std::invalid_argument("solve: x0 dimension mismatch");
  require_finite(x0, "solve: x0");
  if (stop.max_iterations < 0)
    throw std::invalid_argument("solve: max_iterations must be >= 0");

  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  };

  SolverRun run;
  run.iterates_kept = trace == TracePolicy::FullTrace;
  Eigen::VectorXd x = x0;
  double f = objective_raw(a, b, penalty, x);
  run.objectives.push_back(f);
  if (run.iterates_kept) run.iterates.push_back(x);
  const double slack =
      monitor.descent_slack.value_or(1e-10 * (1.0 + std::abs(f)));
  const double modulus = splitting.descent_modulus;

  run.status = Status::MaxIterations;
  for (long k = 0; k < stop.max_iterations; ++k) {
    const Eigen::VectorXd z = triangle_prox_apply(splitting, penalty, b, x);
    const double step = (z - x).norm();
    const double certificate = splitting.c_norm * step;
    const double relative_step = step / (1.0 + x.norm());
    const double f_next = objective_raw(a, b, penalty, z);

    run.step_norms.push_back(step);
    run.certificates.push_back(certificate);
    run.objectives.push_back(f_next);
    if (run.iterates_kept) run.iterates.push_back(z);
    run.cumulative_seconds.push_back(elapsed());
    ++run.iterations;

    bool violated = false;
    if (monitor.check_descent &&
        f_next - f > -0.5 * modulus * step * step + slack) {
      if (relax_violations) {
        ++run.descent_warnings;
      } else {
        violated = true;
      }
    }
    x = z;
    f = f_next;
    if (violated) {
      run.status = Status::InvariantViolation;
      break;
    }
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

inline void check_mode(const Penalty& penalty, const SplittingConfig& config) {
  if (!penalty.convex() && config.mode == Convexity::Convex)
    throw std::invalid_argument(
        "solve: nonconvex penalty requires Convexity::Nonconvex");
}

}  // namespace detail

/// Fixed-point iteration x^{k+1} = T(x^k) on min 0.5 x'Ax + x'b + sum h(x_j).
inline SolverRun solve(const QuadraticProblem& problem, const Penalty& penalty,
                       const Eigen::VectorXd& x0,
                       const SplittingConfig& config = {},
                       const StoppingRule& stop = {},
                       const MonitorPolicy& monitor = {},
                       TracePolicy trace = TracePolicy::LastOnly,
                       NormMode norm_mode = NormMode::PowerIteration) {
  detail::check_mode(penalty, config);
  const Splitting splitting = split(problem, config, norm_mode);
  return detail::run_core(problem.a(), problem.b(), splitting, penalty, x0, stop,
                          monitor, trace, config.relax_delta_check);
}

struct MatrixSolveResult {
  Eigen::MatrixXd x;
  std::vector<SolverRun> runs;  // one per column of r
};

/// Solves min_X 0.5 tr(X'AX) + tr(X'R) + sum h(X_ij): the columns are
/// independent problems sharing one splitting of A. threads > 1 distributes
/// columns across workers; results do not depend on the thread count.
inline MatrixSolveResult solve_matrix(const Eigen::MatrixXd& a_raw,
                                      const Eigen::MatrixXd& r, const Penalty& penalty,
                                      const Eigen::MatrixXd& x0,
                                      const SplittingConfig& config = {},
                                      const StoppingRule& stop = {},
                                      const MonitorPolicy& monitor = {},
                                      TracePolicy trace = TracePolicy::LastOnly,
                                      NormMode norm_mode = NormMode::PowerIteration,
                                      int threads = 1) {
  detail::check_mode(penalty, config);
  const QuadraticProblem problem =
      build_problem(a_raw, Eigen::VectorXd::Zero(a_raw.rows()));
  if (r.rows() != problem.size())
    throw std::invalid_argument("solve_matrix: R row dimension mismatch");
  if (x0.rows() != r.rows() || x0.cols() != r.cols())
    throw std::invalid_argument("solve_matrix: X0 shape mismatch");
  const Splitting splitting = split(problem, config, norm_mode);

  const Eigen::Index cols = r.cols();
  MatrixSolveResult result;
  result.x.resize(r.rows(), cols);
  result.runs.resize(cols);

  const auto solve_column = [&](Eigen::Index j) {
    result.runs[j] =
        detail::run_core(problem.a(), r.col(j), splitting, penalty, x0.col(j),
                         stop, monitor, trace, config.relax_delta_check);
    result.x.col(j) = result.runs[j].x;
  };

  if (threads <= 1 || cols <= 1) {
    for (Eigen::Index j = 0; j < cols; ++j) solve_column(j);
    return result;
  }
  const int workers = static_cast<int>(
      std::min<Eigen::Index>(threads, cols));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      for (Eigen::Index j = t; j < cols; j += workers) solve_column(j);
    });
  }
  for (auto& th : pool) th.join();
  return result;
}

/// Successive ratios (f^{k+1} - f*) / (f^k - f*). Gaps within roundoff of
/// zero are skipped; a best value above any recorded objective is rejected.
inline std::vector<double> qlinear_ratios(const std::vector<double>& objectives,
                                          double f_star) {
  if (objectives.empty())
    throw std::invalid_argument("qlinear_ratios: empty objective history");
  const double floor = 1e-14 * (1.0 + std::abs(f_star));
  double min_obj = objectives.front();
  for (double f : objectives) min_obj = std::min(min_obj, f);
  if (min_obj < f_star - floor)
    throw std::invalid_argument(
        "qlinear_ratios: f_star exceeds an observed objective");
  std::vector<double> ratios;
  ratios.reserve(objectives.size());
  for (std::size_t k = 0; k + 1 < objectives.size(); ++k) {
    const double den = objectives[k] - f_star;
    if (den < floor) continue;
    ratios.push_back((objectives[k + 1] - f_star) / den);
  }
  return ratios;
}

inline std::vector<double> qlinear_ratios(const SolverRun& run, double f_star) {
  return qlinear_ratios(run.objectives, f_star);
}

}  // namespace msm
