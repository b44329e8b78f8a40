#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "msm/problem.hpp"
#include "msm/scalar_prox.hpp"

namespace msm {

/// Which descent modulus governs configuration validation. Convex covers
/// none/box/l1 penalties; Nonconvex covers l0 and custom nonconvex ones.
enum class Convexity { Convex, Nonconvex };

struct SplittingConfig {
  double omega = 1.0;   // relaxation, in (0, 2)
  double theta = 0.01;  // diagonal shift, >= 0
  Convexity mode = Convexity::Convex;
  /// Accept configurations whose descent modulus is not provably positive.
  /// Descent monitoring then reports violations as warnings instead of
  /// failing the run. Positive subproblem curvature is still required.
  bool relax_delta_check = false;
};

inline void validate(const SplittingConfig& config) {
  if (!(config.omega > 0.0) || !(config.omega < 2.0))
    throw std::invalid_argument("SplittingConfig: requires omega in (0, 2)");
  if (!(config.theta >= 0.0) || !std::isfinite(config.theta))
    throw std::invalid_argument("SplittingConfig: requires theta >= 0");
}

/// Descent modulus for the declared mode. Positivity certifies the
/// per-iteration sufficient decrease f(x+) - f(x) <= -(delta/2)*||d||^2.
inline double delta(const QuadraticProblem& problem, const SplittingConfig& config) {
  validate(config);
  const auto diag = problem.a().diagonal();
  if (config.mode == Convexity::Convex) {
    return 2.0 * config.theta / config.omega +
           (2.0 - config.omega) / config.omega * diag.minCoeff();
  }
  return (config.theta / config.omega +
          (1.0 - config.omega) / config.omega * diag.array())
      .minCoeff();
}

/// A = B + C with B = L + (D + theta*I)/omega lower triangular and
/// C = L' + ((omega - 1)*D - theta*I)/omega. c_norm is an upper estimate of
/// the spectral norm ||C||, used by the residual certificate.
struct Splitting {
  Eigen::MatrixXd b_lower;
  Eigen::MatrixXd c_upper;
  Eigen::VectorXd b_diag;
  double c_norm = 0.0;
  double descent_modulus = 0.0;
};

enum class NormMode { PowerIteration, ExactSvd };

/// Spectral norm upper estimate by power iteration on M'M with a fixed
/// deterministic start, inflated by 1e-6 to stay on the safe side of the
/// certificate inequality.
inline double spectral_norm_power(const Eigen::MatrixXd& m, int iterations = 100) {
  const Eigen::Index n = m.cols();
  if (n == 0 || m.rows() == 0) return 0.0;
  Eigen::VectorXd v(n);
  std::uint64_t state = 0x853c49e6748fea9bull;
  for (Eigen::Index i = 0; i < n; ++i) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    v(i) = static_cast<double>(state >> 11) * 0x1.0p-53 + 0.5;
  }
  v.normalize();
  double sigma_sq = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd mv = m * v;
    sigma_sq = mv.squaredNorm();
    Eigen::VectorXd w = m.transpose() * mv;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
  }
  return std::sqrt(sigma_sq) * (1.0 + 1e-6);
}

inline double spectral_norm_exact(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

/// Builds the splitting for a validated configuration. Rejects
/// configurations whose descent modulus is nonpositive (unless relaxed) and
/// any configuration with a nonpositive subproblem curvature diag(B).
inline Splitting split(const QuadraticProblem& problem, const SplittingConfig& config,
                       NormMode norm_mode = NormMode::PowerIteration) {
  validate(config);
  const Eigen::MatrixXd& a = problem.a();
  const Eigen::VectorXd d = a.diagonal();

  Splitting s;
  s.descent_modulus = delta(problem, config);
  if (!(s.descent_modulus > 0.0) && !config.relax_delta_check)
    throw std::invalid_argument(
        "split: descent modulus <= 0 for the declared mode; "
        "increase theta or adjust omega");

  s.b_diag = (d.array() + config.theta) / config.omega;
  if (!(s.b_diag.minCoeff() > 0.0))
    throw std::invalid_argument(
        "split: zero diagonal with theta == 0; set theta > 0");

  const Eigen::MatrixXd strict_lower =
      a.triangularView<Eigen::StrictlyLower>().toDenseMatrix();
  s.b_lower = strict_lower;
  s.b_lower.diagonal() = s.b_diag;
  s.c_upper = strict_lower.transpose();
  s.c_upper.diagonal() =
      ((config.omega - 1.0) * d.array() - config.theta) / config.omega;
  s.c_norm = norm_mode == NormMode::PowerIteration
                 ? spectral_norm_power(s.c_upper)
                 : spectral_norm_exact(s.c_upper);
  return s;
}

/// One sweep of generalized forward substitution: u = b + C*x, then in
/// natural coordinate order z_j solves the 1-D subproblem with curvature
/// B_jj and linear term w_j = u_j + sum_{i<j} B_ji z_i. With h == 0 this is
/// exactly a Gauss-Seidel (omega = 1) or SOR sweep for Az = -b.
///
/// When v_out is non-null it receives the subgradient the sweep implicitly
/// selects, v_j = -(B_jj z_j + w_j), so that A z + b + v = C (z - x) holds
/// identically and the certificate can be cross-checked.
inline Eigen::VectorXd triangle_prox_apply(const Splitting& splitting,
                                           const Penalty& penalty,
                                           const Eigen::VectorXd& b,
                                           const Eigen::VectorXd& x,
                                           Eigen::VectorXd* v_out = nullptr) {
  const Eigen::Index n = b.size();
  if (x.size() != n)
    throw std::invalid_argument("triangle_prox_apply: dimension mismatch");
  const Eigen::VectorXd u = b + splitting.c_upper * x;
  Eigen::VectorXd z(n);
  if (v_out) v_out->resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double wj = u(j);
    if (j > 0) wj += splitting.b_lower.row(j).head(j).dot(z.head(j));
    if (!std::isfinite(wj))
      throw std::runtime_error("triangle_prox_apply: non-finite intermediate");
    z(j) = prox_scalar({splitting.b_diag(j), wj}, penalty);
    if (!std::isfinite(z(j)))
      throw std::runtime_error("triangle_prox_apply: non-finite iterate");
    if (v_out) (*v_out)(j) = -(splitting.b_diag(j) * z(j) + wj);
  }
  return z;
}

/// The map x -> (B + dh)^{-1}(-Cx - b), computed coordinatewise in O(n^2).
/// Immutable once built; applying it from several threads is safe.
class TriangleOperator {
 public:
  TriangleOperator(const QuadraticProblem& problem, const SplittingConfig& config,
                   Penalty penalty, NormMode norm_mode = NormMode::PowerIteration)
      : splitting_(split(problem, config, norm_mode)),
        penalty_(std::move(penalty)),
        b_(problem.b()) {}

  TriangleOperator(Splitting splitting, Penalty penalty, Eigen::VectorXd b)
      : splitting_(std::move(splitting)),
        penalty_(std::move(penalty)),
        b_(std::move(b)) {}

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    return triangle_prox_apply(splitting_, penalty_, b_, x);
  }

  struct Applied {
    Eigen::VectorXd z;
    Eigen::VectorXd v;  // selected subgradient, v in dh(z)
  };

  Applied apply_detailed(const Eigen::VectorXd& x) const {
    Applied out;
    out.z = triangle_prox_apply(splitting_, penalty_, b_, x, &out.v);
    return out;
  }

  /// ||C|| * ||x - z||, an upper bound on the subgradient residual at
  /// z = T(x). A zero certificate identifies a fixed point.
  double residual_certificate(const Eigen::VectorXd& x, const Eigen::VectorXd& z) const {
    if (x.size() != z.size() || x.size() != b_.size())
      throw std::invalid_argument("residual_certificate: dimension mismatch");
    return splitting_.c_norm * (x - z).norm();
  }

  const Splitting& splitting() const { return splitting_; }
  const Penalty& penalty() const { return penalty_; }

 private:
  Splitting splitting_;
  Penalty penalty_;
  Eigen::VectorXd b_;
};

}  // namespace msm
