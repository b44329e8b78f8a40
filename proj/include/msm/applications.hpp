#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "msm/baselines.hpp"
#include "msm/penalty.hpp"
#include "msm/problem.hpp"
#include "msm/run.hpp"
#include "msm/solver.hpp"

namespace msm {

enum class Method { Msm, Pgm, PgmLs, Apgm, ApgmLs };

inline const char* method_name(Method method) {
  switch (method) {
    case Method::Msm: return "msm";
    case Method::Pgm: return "pgm";
    case Method::PgmLs: return "pgm-ls";
    case Method::Apgm: return "apgm";
    case Method::ApgmLs: return "apgm-ls";
  }
  return "unknown";
}

inline Method parse_method(const std::string& name) {
  if (name == "msm") return Method::Msm;
  if (name == "pgm") return Method::Pgm;
  if (name == "pgm-ls") return Method::PgmLs;
  if (name == "apgm") return Method::Apgm;
  if (name == "apgm-ls") return Method::ApgmLs;
  throw std::invalid_argument("unknown method: " + name);
}

inline PgmOptions pgm_options_for(Method method) {
  PgmOptions options;
  options.step_rule = (method == Method::PgmLs || method == Method::ApgmLs)
                          ? StepRule::LineSearch
                          : StepRule::Constant;
  options.accelerated = method == Method::Apgm || method == Method::ApgmLs;
  return options;
}

/// Runs the named method on a composite problem. The splitting
/// configuration only affects Method::Msm.
inline SolverRun run_method(const QuadraticProblem& problem, const Penalty& penalty,
                            const Eigen::VectorXd& x0, Method method,
                            const SplittingConfig& config = {},
                            const StoppingRule& stop = {},
                            TracePolicy trace = TracePolicy::LastOnly) {
  if (method == Method::Msm)
    return solve(problem, penalty, x0, config, stop, {}, trace);
  return pgm_solve(problem, penalty, x0, pgm_options_for(method), stop, trace);
}

struct LeastSquaresInstance {
  Eigen::MatrixXd c;  // design, m x n
  Eigen::VectorXd d;  // target, m
};

/// Normal-equations reduction A = C'C, b = -C'd of min 0.5||Cx - d||^2.
inline QuadraticProblem to_problem(const LeastSquaresInstance& instance) {
  if (instance.c.rows() != instance.d.size())
    throw std::invalid_argument("LeastSquaresInstance: dimension mismatch");
  return build_problem(instance.c.transpose() * instance.c,
                       -instance.c.transpose() * instance.d);
}

inline double least_squares_objective(const LeastSquaresInstance& instance,
                                      const Penalty& penalty,
                                      const Eigen::VectorXd& x) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) h += penalty.value(x(i));
  return 0.5 * (instance.c * x - instance.d).squaredNorm() + h;
}

namespace detail {

/// The composite objective of the reduced problem differs from the
/// least-squares form only by the constant 0.5||d||^2; traces report the
/// least-squares value.
inline SolverRun shift_objectives(SolverRun run, double shift) {
  for (double& f : run.objectives) f += shift;
  return run;
}

inline Eigen::VectorXd default_start(const Eigen::VectorXd& x0, Eigen::Index n) {
  if (x0.size() == 0) return Eigen::VectorXd::Zero(n);
  return x0;
}

}  // namespace detail

/// min_{x >= 0} 0.5||Cx - d||^2. Objectives in the trace are the
/// least-squares values.
inline SolverRun nnls(const LeastSquaresInstance& instance,
                      Method method = Method::Msm,
                      const Eigen::VectorXd& x0 = {},
                      const SplittingConfig& config = {},
                      const StoppingRule& stop = {},
                      TracePolicy trace = TracePolicy::LastOnly) {
  const QuadraticProblem problem = to_problem(instance);
  const Penalty penalty =
      Penalty::box(0.0, std::numeric_limits<double>::infinity());
  const Eigen::VectorXd start = detail::default_start(x0, problem.size());
  return detail::shift_objectives(
      run_method(problem, penalty, start, method, config, stop, trace),
      0.5 * instance.d.squaredNorm());
}

enum class Norm { L0, L1 };

/// min_x 0.5||Cx - d||^2 + lambda * ||x||_0 (or the l1 norm). The l0 path
/// switches the splitting into nonconvex mode. lambda = 0 drops the penalty.
inline SolverRun sparse_ls(const LeastSquaresInstance& instance, double lambda,
                           Norm norm, Method method = Method::Msm,
                           const Eigen::VectorXd& x0 = {},
                           SplittingConfig config = {},
                           const StoppingRule& stop = {},
                           TracePolicy trace = TracePolicy::LastOnly) {
  if (!(lambda >= 0.0))
    throw std::invalid_argument("sparse_ls: requires lambda >= 0");
  const QuadraticProblem problem = to_problem(instance);
  Penalty penalty = Penalty::none();
  if (lambda > 0.0 && norm == Norm::L0) {
    penalty = Penalty::l0(lambda);
    config.mode = Convexity::Nonconvex;
  } else if (lambda > 0.0) {
    penalty = Penalty::l1(lambda);
  }
  const Eigen::VectorXd start = detail::default_start(x0, problem.size());
  return detail::shift_objectives(
      run_method(problem, penalty, start, method, config, stop, trace),
      0.5 * instance.d.squaredNorm());
}

namespace detail {

/// Inner driver shared by the alternating applications: minimizes
/// 0.5 tr(X'AX) + tr(X'R) + sum h(X_ij) from a warm start under a fixed
/// sweep budget. Msm goes through solve_matrix; the baselines run columnwise.
inline Eigen::MatrixXd alternating_inner(const Eigen::MatrixXd& a,
                                         const Eigen::MatrixXd& r,
                                         const Penalty& penalty,
                                         const Eigen::MatrixXd& x0, Method method,
                                         const SplittingConfig& config,
                                         long iterations, int threads) {
  const StoppingRule budget{-1.0, -1.0, iterations,
                            std::numeric_limits<double>::infinity()};
  if (method == Method::Msm)
    return solve_matrix(a, r, penalty, x0, config, budget, {},
                        TracePolicy::LastOnly, NormMode::PowerIteration, threads)
        .x;
  PgmOptions options = pgm_options_for(method);
  Eigen::MatrixXd x = x0;
  for (Eigen::Index j = 0; j < r.cols(); ++j) {
    const QuadraticProblem column = build_problem(a, r.col(j));
    if (!options.lipschitz_value)  // shared quadratic: estimate once
      options.lipschitz_value = estimate_lipschitz(column).value;
    x.col(j) = pgm_solve(column, penalty, x0.col(j), options, budget).x;
  }
  return x;
}

}  // namespace detail

struct NmfState {
  Eigen::MatrixXd w;  // basis, m x n, >= 0
  Eigen::MatrixXd h;  // coefficients, n x d, >= 0
};

struct NmfOptions {
  long rounds = 50;
  long inner_iterations = 20;
  Method method = Method::Msm;  // inner half-step solver
  SplittingConfig config{};
  int threads = 1;
};

struct NmfTrace {
  NmfState state;
  std::vector<double> objectives;        // after every half-step; front() is initial
  std::vector<double> seconds;           // cumulative wall time, aligned with objectives
  std::vector<double> round_step_norms;  // sqrt(|dW|_F^2 + |dH|_F^2) per round
};

inline double nmf_objective(const Eigen::MatrixXd& y, const Eigen::MatrixXd& w,
                            const Eigen::MatrixXd& h) {
  return 0.5 * (y - w * h).squaredNorm();
}

/// Alternating nonnegative factorization Y ~ WH. Each half-step solves its
/// convex subproblem warm-started from the previous outer iterate: the
/// H-step minimizes over H >= 0 with A = W'W, R = -W'Y; the W-step solves
/// the transposed problem on W' with A = HH', R = -HY'. Half-step warm
/// starts make the objective nonincreasing across every half-step.
inline NmfTrace nmf(const Eigen::MatrixXd& y, const NmfState& init,
                    const NmfOptions& options = {}) {
  if (y.size() == 0) throw std::invalid_argument("nmf: empty data");
  if (y.minCoeff() < 0.0)
    throw std::invalid_argument("nmf: data must be nonnegative");
  if (init.w.rows() != y.rows() || init.h.cols() != y.cols() ||
      init.w.cols() != init.h.rows())
    throw std::invalid_argument("nmf: factor shape mismatch");
  const Penalty nonneg =
      Penalty::box(0.0, std::numeric_limits<double>::infinity());

  const auto start = std::chrono::steady_clock::now();
  const auto elapsed = [&start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  };
  NmfTrace trace;
  trace.state = init;
  Eigen::MatrixXd& w = trace.state.w;
  Eigen::MatrixXd& h = trace.state.h;
  trace.objectives.push_back(nmf_objective(y, w, h));
  trace.seconds.push_back(0.0);
  for (long round = 0; round < options.rounds; ++round) {
    const Eigen::MatrixXd w_before = w;
    const Eigen::MatrixXd h_before = h;
    h = detail::alternating_inner(w.transpose() * w, -w.transpose() * y, nonneg,
                                  h, options.method, options.config,
                                  options.inner_iterations, options.threads);
    trace.objectives.push_back(nmf_objective(y, w, h));
    trace.seconds.push_back(elapsed());
    w = detail::alternating_inner(h * h.transpose(), -h * y.transpose(), nonneg,
                                  w.transpose(), options.method, options.config,
                                  options.inner_iterations, options.threads)
            .transpose();
    trace.objectives.push_back(nmf_objective(y, w, h));
    trace.seconds.push_back(elapsed());
    trace.round_step_norms.push_back(
        std::sqrt((w - w_before).squaredNorm() + (h - h_before).squaredNorm()));
  }
  return trace;
}

struct SparseCodingState {
  Eigen::MatrixXd w;  // dictionary, m x n, unit columns
  Eigen::MatrixXd h;  // codes, n x d
};

struct SparseCodingOptions {
  long rounds = 20;
  long inner_iterations = 20;
  double lambda = 0.1;
  SplittingConfig config{1.0, 0.01, Convexity::Nonconvex, false};
  int threads = 1;
};

struct SparseCodingTrace {
  SparseCodingState state;
  std::vector<double> objectives;  // after every half-step; front() is initial
};

inline long nnz(const Eigen::MatrixXd& m) {
  long count = 0;
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (m(i, j) != 0.0) ++count;
  return count;
}

inline double sparse_coding_objective(const Eigen::MatrixXd& y,
                                      const Eigen::MatrixXd& w,
                                      const Eigen::MatrixXd& h, double lambda) {
  return 0.5 * (y - w * h).squaredNorm() + lambda * static_cast<double>(nnz(h));
}

/// Cardinality-regularized dictionary learning,
/// min 0.5||Y - WH||_F^2 + lambda ||H||_0 with unit dictionary columns.
/// The H-step is a nonconvex-mode matrix solve with the l0 penalty; the
/// W-step takes one Lipschitz gradient step on the smooth term and
/// renormalizes each column (columns that collapse to zero keep their
/// previous unit direction).
inline SparseCodingTrace sparse_coding(const Eigen::MatrixXd& y,
                                       const SparseCodingState& init,
                                       const SparseCodingOptions& options = {}) {
  if (y.size() == 0) throw std::invalid_argument("sparse_coding: empty data");
  if (init.w.rows() != y.rows() || init.h.cols() != y.cols() ||
      init.w.cols() != init.h.rows())
    throw std::invalid_argument("sparse_coding: factor shape mismatch");
  if (!(options.lambda >= 0.0))
    throw std::invalid_argument("sparse_coding: requires lambda >= 0");
  const Penalty penalty = options.lambda > 0.0 ? Penalty::l0(options.lambda)
                                               : Penalty::none();

  SparseCodingTrace trace;
  trace.state = init;
  Eigen::MatrixXd& w = trace.state.w;
  Eigen::MatrixXd& h = trace.state.h;
  trace.objectives.push_back(sparse_coding_objective(y, w, h, options.lambda));
  for (long round = 0; round < options.rounds; ++round) {
    h = detail::alternating_inner(w.transpose() * w, -w.transpose() * y, penalty,
                                  h, Method::Msm, options.config,
                                  options.inner_iterations, options.threads);
    trace.objectives.push_back(sparse_coding_objective(y, w, h, options.lambda));

    const Eigen::MatrixXd gram = h * h.transpose();
    const double curvature = spectral_norm_exact(gram);
    if (curvature > 0.0) {
      const Eigen::MatrixXd previous = w;
      w -= (1.0 / curvature) * (w * h - y) * h.transpose();
      for (Eigen::Index i = 0; i < w.cols(); ++i) {
        const double norm = w.col(i).norm();
        if (norm > 1e-12)
          w.col(i) /= norm;
        else
          w.col(i) = previous.col(i);
      }
    }
    trace.objectives.push_back(sparse_coding_objective(y, w, h, options.lambda));
  }
  return trace;
}

/// Fixed-dictionary coding-step comparison: entry k of the returned trace
/// is 0.5||Y - W H_k||_F^2 + lambda ||H_k||_0 after k sweeps of the chosen
/// method from the shared start H0. All columns advance in lockstep, so the
/// trace aggregates the per-column objective histories plus the 0.5||Y||^2
/// constant.
inline std::vector<double> coding_step_objectives(
    const Eigen::MatrixXd& y, const Eigen::MatrixXd& w, const Eigen::MatrixXd& h0,
    double lambda, Method method, long iterations,
    SplittingConfig config = {1.0, 0.01, Convexity::Nonconvex, false},
    int threads = 1) {
  if (!(lambda >= 0.0))
    throw std::invalid_argument("coding_step_objectives: requires lambda >= 0");
  const Penalty penalty = lambda > 0.0 ? Penalty::l0(lambda) : Penalty::none();
  const Eigen::MatrixXd a = w.transpose() * w;
  const Eigen::MatrixXd r = -w.transpose() * y;
  const StoppingRule budget{-1.0, -1.0, iterations,
                            std::numeric_limits<double>::infinity()};
  const double shift = 0.5 * y.squaredNorm();

  std::vector<std::vector<double>> histories;
  if (method == Method::Msm) {
    const auto result = solve_matrix(a, r, penalty, h0, config, budget, {},
                                     TracePolicy::LastOnly,
                                     NormMode::PowerIteration, threads);
    for (const auto& run : result.runs) histories.push_back(run.objectives);
  } else {
    PgmOptions options = pgm_options_for(method);
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      const QuadraticProblem column = build_problem(a, r.col(j));
      if (!options.lipschitz_value)
        options.lipschitz_value = estimate_lipschitz(column).value;
      histories.push_back(pgm_solve(column, penalty, h0.col(j), options, budget)
                              .objectives);
    }
  }
  std::vector<double> aggregate(static_cast<std::size_t>(iterations) + 1, shift);
  for (const auto& history : histories)
    for (std::size_t k = 0; k < aggregate.size() && k < history.size(); ++k)
      aggregate[k] += history[k];
  return aggregate;
}

}  // namespace msm
