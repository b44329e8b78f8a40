#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace msm {

enum class Status { Converged, MaxIterations, InvariantViolation };

inline const char* to_string(Status status) {
  switch (status) {
    case Status::Converged: return "Converged";
    case Status::MaxIterations: return "MaxIterations";
    case Status::InvariantViolation: return "InvariantViolation";
  }
  return "Unknown";
}

/// FullTrace keeps every iterate (memory O(n * iterations)); LastOnly keeps
/// only the final one. Scalar histories are always recorded.
enum class TracePolicy { LastOnly, FullTrace };

/// Negative tolerances disable the corresponding test. Stopping is checked
/// after each full sweep: relative step ||d|| / (1 + ||x||) against
/// tol_step, certificate against tol_certificate.
struct StoppingRule {
  double tol_step = 1e-10;
  double tol_certificate = -1.0;
  long max_iterations = 10000;
  double max_wall_time = std::numeric_limits<double>::infinity();
};

/// Per-iteration sufficient-decrease monitoring. The slack absorbs roundoff
/// in f evaluation; when unset it defaults to 1e-10 * (1 + |f(x0)|).
struct MonitorPolicy {
  bool check_descent = true;
  std::optional<double> descent_slack;
};

struct SolverRun {
  Eigen::VectorXd x;
  std::vector<Eigen::VectorXd> iterates;   // filled under FullTrace (x0 first)
  std::vector<double> objectives;          // objectives[k] = f(x^k), k = 0..iterations
  std::vector<double> step_norms;          // step_norms[k] = ||x^{k+1} - x^k||
  std::vector<double> certificates;        // certificates[k] bounds the residual at x^{k+1}
  std::vector<double> cumulative_seconds;  // wall time after iteration k+1
  long iterations = 0;
  Status status = Status::MaxIterations;
  double wall_time = 0.0;
  long descent_warnings = 0;  // violations observed while monitoring was relaxed
  bool iterates_kept = false;
};

}  // namespace msm
