#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "msm/penalty.hpp"

namespace msm {

namespace detail {

inline void require_finite(const Eigen::MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

}  // namespace detail

/// Quadratic part q(x) = 0.5*x'Ax + x'b with A symmetric positive
/// semidefinite. The matrix is symmetrized on construction; PSD checking is
/// opt-in via is_positive_semidefinite() since benchmark instances are PSD
/// by construction and the check costs O(n^2 * iterations).
class QuadraticProblem {
 public:
  QuadraticProblem(const Eigen::MatrixXd& a_raw, const Eigen::VectorXd& b)
      : b_(b) {
    if (a_raw.rows() != a_raw.cols())
      throw std::invalid_argument("QuadraticProblem: matrix must be square");
    if (a_raw.rows() != b.size())
      throw std::invalid_argument("QuadraticProblem: dimension mismatch between A and b");
    detail::require_finite(a_raw, "QuadraticProblem");
    detail::require_finite(b_, "QuadraticProblem");
    a_ = 0.5 * (a_raw + a_raw.transpose());
  }

  Eigen::Index size() const { return b_.size(); }
  const Eigen::MatrixXd& a() const { return a_; }
  const Eigen::VectorXd& b() const { return b_; }

  /// q(x) alone, without any penalty term.
  double quadratic(const Eigen::VectorXd& x) const {
    if (x.size() != b_.size())
      throw std::invalid_argument("QuadraticProblem::quadratic: dimension mismatch");
    return 0.5 * x.dot(a_ * x) + x.dot(b_);
  }

  /// Estimates the smallest eigenvalue by two rounds of power iteration
  /// (largest magnitude, then the shifted complement) and accepts when it is
  /// >= -1e-8 * ||A||.
  bool is_positive_semidefinite(int power_iterations = 200) const {
    const Eigen::Index n = size();
    if (n == 0) return true;
    const double mu = symmetric_extreme_eigenvalue(a_, power_iterations);
    const Eigen::MatrixXd shifted =
        Eigen::MatrixXd(mu * Eigen::MatrixXd::Identity(n, n)) - a_;
    const double gap = symmetric_extreme_eigenvalue(shifted, power_iterations);
    const double lambda_min = mu - gap;
    return lambda_min >= -1e-8 * std::abs(mu);
  }

 private:
  // Rayleigh quotient after power iteration; returns the eigenvalue of
  // largest magnitude of a symmetric matrix. Deterministic start vector.
  static double symmetric_extreme_eigenvalue(const Eigen::MatrixXd& m, int iterations) {
    const Eigen::Index n = m.rows();
    Eigen::VectorXd v(n);
    std::uint64_t state = 0x9e3779b97f4a7c15ull;
    for (Eigen::Index i = 0; i < n; ++i) {
      state = state * 6364136223846793005ull + 1442695040888963407ull;
      v(i) = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
    }
    if (v.norm() == 0.0) v.setOnes();
    v.normalize();
    for (int it = 0; it < iterations; ++it) {
      Eigen::VectorXd w = m * v;
      const double norm = w.norm();
      if (norm == 0.0) return 0.0;
      v = w / norm;
    }
    return v.dot(m * v);
  }

  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
};

inline QuadraticProblem build_problem(const Eigen::MatrixXd& a_raw,
                                      const Eigen::VectorXd& b) {
  return QuadraticProblem(a_raw, b);
}

/// Composite objective f(x) = q(x) + h(x) with h summed coordinatewise.
inline double objective(const QuadraticProblem& problem, const Penalty& penalty,
                        const Eigen::VectorXd& x) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) h += penalty.value(x(i));
  return problem.quadratic(x) + h;
}

}  // namespace msm
