#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "msm/applications.hpp"
#include "msm/penalty.hpp"
#include "msm/run.hpp"
#include "msm/solver.hpp"

namespace msm {

inline constexpr const char* kLibraryVersion = "1.0.0";

/// Uniform doubles are the top 53 bits of mt19937_64 output divided by 2^53;
/// Gaussians come from Box-Muller on those uniforms. Identified in trace
/// headers so archived CSVs stay reproducible.
inline constexpr const char* kPrngId = "mt19937_64/u53/v1";

class Prng {
 public:
  explicit Prng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double u01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (pair cached).
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(1.0 - u01()));
    const double angle = 2.0 * 3.141592653589793238462643383279502884 * u01();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  void fill_uniform(Eigen::Ref<Eigen::MatrixXd> m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = u01();
  }

  void fill_gaussian(Eigen::Ref<Eigen::MatrixXd> m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = gaussian();
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

enum class ScenarioKind { Fig1aNnls, Fig1bL0, Nmf, SparseCoding, Custom };

inline const char* kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Fig1aNnls: return "fig1a_nnls";
    case ScenarioKind::Fig1bL0: return "fig1b_l0";
    case ScenarioKind::Nmf: return "nmf";
    case ScenarioKind::SparseCoding: return "sparse_coding";
    case ScenarioKind::Custom: return "custom";
  }
  return "unknown";
}

inline ScenarioKind parse_kind(const std::string& name) {
  if (name == "fig1a_nnls") return ScenarioKind::Fig1aNnls;
  if (name == "fig1b_l0") return ScenarioKind::Fig1bL0;
  if (name == "nmf") return ScenarioKind::Nmf;
  if (name == "sparse_coding") return ScenarioKind::SparseCoding;
  if (name == "custom") return ScenarioKind::Custom;
  throw std::invalid_argument("unknown scenario kind: " + name);
}

/// seconds > 0 switches from an iteration budget to a wall-time budget.
struct Budget {
  long iterations = 50;
  double seconds = -1.0;
};

/// A fully seeded experiment description: the seed determines the instance
/// and every initialization, so two runs of the same scenario agree bitwise
/// in everything but the timing column.
struct BenchScenario {
  ScenarioKind kind = ScenarioKind::Fig1aNnls;
  long m = 200;  // rows of the design / data matrix
  long n = 1000; // variables (LS), inner rank (nmf), atoms (sparse coding)
  long d = 1;    // data columns for the matrix-valued kinds
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::vector<Method> methods{Method::Msm, Method::Pgm, Method::PgmLs,
                              Method::Apgm, Method::ApgmLs};
  Budget budget;
  double omega = 1.0;
  double theta = 0.01;
  long inner_iterations = 20;  // per half-step budget for the nmf kind
  int threads = 1;
  std::string output_path;
  // Custom-kind penalty selection.
  std::string penalty = "none";  // none | box | l1 | l0
  double lb = 0.0;
  double ub = std::numeric_limits<double>::infinity();
};

inline BenchScenario default_scenario(ScenarioKind kind) {
  BenchScenario s;
  s.kind = kind;
  switch (kind) {
    case ScenarioKind::Fig1aNnls:
      break;
    case ScenarioKind::Fig1bL0:
      s.lambda = 1.0;
      break;
    case ScenarioKind::Nmf:
      s.m = 200;
      s.n = 10;
      s.d = 100;
      s.methods = {Method::Msm, Method::Pgm};
      break;
    case ScenarioKind::SparseCoding:
      s.m = 64;  // 8x8 patches, one per column
      s.n = 256;
      s.d = 200;
      s.lambda = 0.1;
      s.budget.iterations = 20;
      break;
    case ScenarioKind::Custom:
      s.m = 100;
      s.n = 400;
      break;
  }
  return s;
}

/// 100x400 stand-ins for the 200x1000 least-squares figures; runs in
/// seconds on one core.
inline void apply_desk_scale(BenchScenario& s) {
  if (s.kind == ScenarioKind::Fig1aNnls || s.kind == ScenarioKind::Fig1bL0) {
    s.m = 100;
    s.n = 400;
  }
}

inline std::string methods_string(const std::vector<Method>& methods) {
  std::string out;
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (i) out += ',';
    out += method_name(methods[i]);
  }
  return out;
}

inline std::vector<Method> parse_method_list(const std::string& csv) {
  std::vector<Method> methods;
  std::string token;
  std::istringstream stream(csv);
  while (std::getline(stream, token, ',')) {
    if (!token.empty()) methods.push_back(parse_method(token));
  }
  if (methods.empty())
    throw std::invalid_argument("empty method list");
  return methods;
}

inline std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

/// Flat key=value scenario text, one pair per line; '#' starts a comment.
inline std::string serialize_scenario(const BenchScenario& s) {
  std::ostringstream out;
  out << "kind=" << kind_name(s.kind) << '\n'
      << "m=" << s.m << '\n'
      << "n=" << s.n << '\n'
      << "d=" << s.d << '\n'
      << "lambda=" << format_double(s.lambda) << '\n'
      << "seed=" << s.seed << '\n'
      << "methods=" << methods_string(s.methods) << '\n'
      << "iters=" << s.budget.iterations << '\n'
      << "seconds=" << format_double(s.budget.seconds) << '\n'
      << "omega=" << format_double(s.omega) << '\n'
      << "theta=" << format_double(s.theta) << '\n'
      << "inner_iters=" << s.inner_iterations << '\n'
      << "threads=" << s.threads << '\n'
      << "penalty=" << s.penalty << '\n'
      << "lb=" << format_double(s.lb) << '\n'
      << "ub=" << format_double(s.ub) << '\n';
  if (!s.output_path.empty()) out << "out=" << s.output_path << '\n';
  return out.str();
}

inline BenchScenario parse_scenario(const std::string& text) {
  std::map<std::string, std::string> pairs;
  std::istringstream stream(text);
  std::string line;
  while (std::getline(stream, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("scenario parse: expected key=value, got: " + line);
    pairs[line.substr(0, eq)] = line.substr(eq + 1);
  }
  const auto it = pairs.find("kind");
  if (it == pairs.end())
    throw std::runtime_error("scenario parse: missing kind");
  BenchScenario s = default_scenario(parse_kind(it->second));
  const auto get = [&pairs](const char* key) -> const std::string* {
    const auto found = pairs.find(key);
    return found == pairs.end() ? nullptr : &found->second;
  };
  try {
    if (const auto* v = get("m")) s.m = std::stol(*v);
    if (const auto* v = get("n")) s.n = std::stol(*v);
    if (const auto* v = get("d")) s.d = std::stol(*v);
    if (const auto* v = get("lambda")) s.lambda = std::stod(*v);
    if (const auto* v = get("seed")) s.seed = std::stoull(*v);
    if (const auto* v = get("methods")) s.methods = parse_method_list(*v);
    if (const auto* v = get("iters")) s.budget.iterations = std::stol(*v);
    if (const auto* v = get("seconds")) s.budget.seconds = std::stod(*v);
    if (const auto* v = get("omega")) s.omega = std::stod(*v);
    if (const auto* v = get("theta")) s.theta = std::stod(*v);
    if (const auto* v = get("inner_iters")) s.inner_iterations = std::stol(*v);
    if (const auto* v = get("threads")) s.threads = std::stoi(*v);
    if (const auto* v = get("penalty")) s.penalty = *v;
    if (const auto* v = get("lb")) s.lb = std::stod(*v);
    if (const auto* v = get("ub")) s.ub = std::stod(*v);
    if (const auto* v = get("out")) s.output_path = *v;
  } catch (const std::logic_error&) {
    throw std::runtime_error("scenario parse: malformed numeric value");
  }
  return s;
}

/// Everything a comparison run needs, drawn from the scenario seed in a
/// fixed order (matrices column-major): LS kinds draw C, d, x0; nmf draws
/// Y, W0, H0 uniform; sparse coding draws Y uniform, W0 as normalized
/// Gaussian columns, H0 as 0.1-scaled Gaussians.
struct BenchInstance {
  LeastSquaresInstance ls;
  Eigen::VectorXd x0;
  Eigen::MatrixXd y;
  Eigen::MatrixXd w0;
  Eigen::MatrixXd h0;
};

inline BenchInstance generate_instance(const BenchScenario& s) {
  if (s.m <= 0 || s.n <= 0 || s.d <= 0)
    throw std::invalid_argument("generate_instance: dimensions must be positive");
  Prng rng(s.seed);
  BenchInstance instance;
  switch (s.kind) {
    case ScenarioKind::Fig1aNnls:
    case ScenarioKind::Fig1bL0:
    case ScenarioKind::Custom: {
      instance.ls.c.resize(s.m, s.n);
      rng.fill_uniform(instance.ls.c);
      instance.ls.d.resize(s.m);
      rng.fill_uniform(instance.ls.d);
      instance.x0.resize(s.n);
      rng.fill_uniform(instance.x0);
      break;
    }
    case ScenarioKind::Nmf: {
      instance.y.resize(s.m, s.d);
      rng.fill_uniform(instance.y);
      instance.w0.resize(s.m, s.n);
      rng.fill_uniform(instance.w0);
      instance.h0.resize(s.n, s.d);
      rng.fill_uniform(instance.h0);
      break;
    }
    case ScenarioKind::SparseCoding: {
      instance.y.resize(s.m, s.d);
      rng.fill_uniform(instance.y);
      instance.w0.resize(s.m, s.n);
      rng.fill_gaussian(instance.w0);
      for (Eigen::Index i = 0; i < instance.w0.cols(); ++i) {
        const double norm = instance.w0.col(i).norm();
        if (norm > 0.0) instance.w0.col(i) /= norm;
      }
      instance.h0.resize(s.n, s.d);
      rng.fill_gaussian(instance.h0);
      instance.h0 *= 0.1;
      break;
    }
  }
  return instance;
}

namespace detail {

inline StoppingRule budget_stop(const Budget& budget) {
  StoppingRule stop;
  stop.tol_step = -1.0;
  stop.tol_certificate = -1.0;
  if (budget.seconds > 0.0) {
    stop.max_iterations = 1000000000L;
    stop.max_wall_time = budget.seconds;
  } else {
    stop.max_iterations = budget.iterations;
  }
  return stop;
}

struct AggregateTrace {
  std::vector<double> objectives;  // [0] is the shared start
  std::vector<double> step_norms;
  std::vector<double> certificates;
  std::vector<double> seconds;  // summed across columns (serialized cost)
};

inline AggregateTrace aggregate_runs(const std::vector<SolverRun>& runs,
                                     double shift) {
  AggregateTrace agg;
  std::size_t iterations = 0;
  for (const auto& run : runs)
    iterations = std::max(iterations, run.step_norms.size());
  agg.objectives.assign(iterations + 1, shift);
  agg.step_norms.assign(iterations, 0.0);
  agg.certificates.assign(iterations, 0.0);
  agg.seconds.assign(iterations, 0.0);
  for (const auto& run : runs) {
    for (std::size_t k = 0; k < iterations + 1; ++k)
      agg.objectives[k] +=
          run.objectives[std::min(k, run.objectives.size() - 1)];
    for (std::size_t k = 0; k < iterations; ++k) {
      if (k < run.step_norms.size()) {
        agg.step_norms[k] += run.step_norms[k] * run.step_norms[k];
        agg.certificates[k] += run.certificates[k] * run.certificates[k];
      }
      if (!run.cumulative_seconds.empty())
        agg.seconds[k] += run.cumulative_seconds[std::min(
            k, run.cumulative_seconds.size() - 1)];
    }
  }
  for (auto& v : agg.step_norms) v = std::sqrt(v);
  for (auto& v : agg.certificates) v = std::sqrt(v);
  return agg;
}

inline Penalty custom_penalty(const BenchScenario& s) {
  if (s.penalty == "none") return Penalty::none();
  if (s.penalty == "box") return Penalty::box(s.lb, s.ub);
  if (s.penalty == "l1") return Penalty::l1(s.lambda);
  if (s.penalty == "l0") return Penalty::l0(s.lambda);
  throw std::invalid_argument("unknown penalty: " + s.penalty);
}

inline AggregateTrace run_ls_method(const BenchScenario& s,
                                    const BenchInstance& instance,
                                    Method method) {
  SplittingConfig config;
  config.omega = s.omega;
  config.theta = s.theta;
  const StoppingRule stop = budget_stop(s.budget);
  SolverRun run;
  if (s.kind == ScenarioKind::Fig1aNnls) {
    run = nnls(instance.ls, method, instance.x0, config, stop);
  } else if (s.kind == ScenarioKind::Fig1bL0) {
    run = sparse_ls(instance.ls, s.lambda, Norm::L0, method, instance.x0,
                    config, stop);
  } else {
    const Penalty penalty = custom_penalty(s);
    if (!penalty.convex()) config.mode = Convexity::Nonconvex;
    run = detail::shift_objectives(
        run_method(to_problem(instance.ls), penalty, instance.x0, method,
                   config, stop),
        0.5 * instance.ls.d.squaredNorm());
  }
  return aggregate_runs({run}, 0.0);
}

inline AggregateTrace run_coding_method(const BenchScenario& s,
                                        const BenchInstance& instance,
                                        Method method) {
  SplittingConfig config{s.omega, s.theta, Convexity::Nonconvex, false};
  const Penalty penalty =
      s.lambda > 0.0 ? Penalty::l0(s.lambda) : Penalty::none();
  const Eigen::MatrixXd a = instance.w0.transpose() * instance.w0;
  const Eigen::MatrixXd r = -instance.w0.transpose() * instance.y;
  const StoppingRule stop = budget_stop(s.budget);
  const double shift = 0.5 * instance.y.squaredNorm();
  std::vector<SolverRun> runs;
  if (method == Method::Msm) {
    runs = solve_matrix(a, r, penalty, instance.h0, config, stop, {},
                        TracePolicy::LastOnly, NormMode::PowerIteration,
                        s.threads)
               .runs;
  } else {
    PgmOptions options = pgm_options_for(method);
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      const QuadraticProblem column = build_problem(a, r.col(j));
      if (!options.lipschitz_value)
        options.lipschitz_value = estimate_lipschitz(column).value;
      runs.push_back(pgm_solve(column, penalty, instance.h0.col(j), options,
                               stop));
    }
  }
  return aggregate_runs(runs, shift);
}

/// One trace row per alternating round; the certificate column is NaN (no
/// outer-level optimality bound is defined).
inline AggregateTrace run_nmf_method(const BenchScenario& s,
                                     const BenchInstance& instance,
                                     Method method) {
  NmfOptions options;
  options.inner_iterations = s.inner_iterations;
  options.method = method;
  options.config.omega = s.omega;
  options.config.theta = s.theta;
  options.threads = s.threads;

  AggregateTrace agg;
  agg.objectives.push_back(
      nmf_objective(instance.y, instance.w0, instance.h0));
  const auto append_round = [&agg](const NmfTrace& trace, std::size_t round,
                                   double base_seconds) {
    agg.objectives.push_back(trace.objectives[2 * round + 2]);
    agg.step_norms.push_back(trace.round_step_norms[round]);
    agg.certificates.push_back(std::numeric_limits<double>::quiet_NaN());
    agg.seconds.push_back(base_seconds + trace.seconds[2 * round + 2]);
  };
  if (s.budget.seconds > 0.0) {
    // Wall-time budget: run one round at a time until time is used up.
    options.rounds = 1;
    NmfState state{instance.w0, instance.h0};
    double used = 0.0;
    while (used < s.budget.seconds) {
      const NmfTrace one = nmf(instance.y, state, options);
      state = one.state;
      append_round(one, 0, used);
      used = agg.seconds.back();
    }
  } else {
    options.rounds = s.budget.iterations;
    const NmfTrace trace = nmf(instance.y, {instance.w0, instance.h0}, options);
    for (std::size_t r = 0; r < trace.round_step_norms.size(); ++r)
      append_round(trace, r, 0.0);
  }
  return agg;
}

}  // namespace detail

/// Runs every scenario method and renders the convergence trace as CSV:
/// a '#' header block (scenario echo, PRNG id, library version), a column
/// header, then one row per method per iteration ordered (method, iteration).
inline std::string run_comparison_csv(const BenchScenario& scenario) {
  const BenchInstance instance = generate_instance(scenario);
  std::ostringstream out;
  out << "# msm-bench trace\n";
  out << "# library_version=" << kLibraryVersion << '\n';
  out << "# prng=" << kPrngId << '\n';
  {
    std::istringstream echo(serialize_scenario(scenario));
    std::string line;
    while (std::getline(echo, line)) out << "# " << line << '\n';
  }
  out << "method,iteration,cumulative_seconds,objective,step_norm,certificate\n";
  for (const Method method : scenario.methods) {
    detail::AggregateTrace trace;
    switch (scenario.kind) {
      case ScenarioKind::Fig1aNnls:
      case ScenarioKind::Fig1bL0:
      case ScenarioKind::Custom:
        trace = detail::run_ls_method(scenario, instance, method);
        break;
      case ScenarioKind::SparseCoding:
        trace = detail::run_coding_method(scenario, instance, method);
        break;
      case ScenarioKind::Nmf:
        trace = detail::run_nmf_method(scenario, instance, method);
        break;
    }
    for (std::size_t k = 0; k < trace.step_norms.size(); ++k) {
      out << method_name(method) << ',' << (k + 1) << ','
          << format_double(trace.seconds[k]) << ','
          << format_double(trace.objectives[k + 1]) << ','
          << format_double(trace.step_norms[k]) << ','
          << format_double(trace.certificates[k]) << '\n';
    }
  }
  return out.str();
}

struct MethodSummary {
  std::string method;
  double final_objective = 0.0;
  long iterations = 0;
  long iterations_to_threshold = -1;  // -1: never reached
  double wall_time = 0.0;
  bool best = false;
};

struct Summary {
  std::vector<MethodSummary> methods;
  double best_objective = 0.0;
  double threshold = 0.0;
};

/// Parses a trace produced by run_comparison_csv and reduces it per method:
/// final objective, first iteration within 1e-4 relative of the best final
/// objective across methods, and total wall time.
inline Summary summarize_trace(const std::string& csv_text) {
  std::istringstream stream(csv_text);
  std::string line;
  bool saw_header = false;
  struct Row {
    long iteration;
    double seconds;
    double objective;
  };
  std::vector<std::string> order;
  std::map<std::string, std::vector<Row>> rows;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      if (line !=
          "method,iteration,cumulative_seconds,objective,step_norm,certificate")
        throw std::runtime_error("summarize: unexpected trace header: " + line);
      saw_header = true;
      continue;
    }
    std::istringstream fields(line);
    std::string method, token;
    Row row{};
    try {
      if (!std::getline(fields, method, ',')) throw std::invalid_argument("");
      if (!std::getline(fields, token, ',')) throw std::invalid_argument("");
      row.iteration = std::stol(token);
      if (!std::getline(fields, token, ',')) throw std::invalid_argument("");
      row.seconds = std::stod(token);
      if (!std::getline(fields, token, ',')) throw std::invalid_argument("");
      row.objective = std::stod(token);
    } catch (const std::logic_error&) {
      throw std::runtime_error("summarize: malformed row: " + line);
    }
    if (rows.find(method) == rows.end()) order.push_back(method);
    rows[method].push_back(row);
  }
  if (!saw_header) throw std::runtime_error("summarize: missing trace header");
  if (order.empty()) throw std::runtime_error("summarize: empty trace");

  Summary summary;
  summary.best_objective = std::numeric_limits<double>::infinity();
  for (const auto& method : order) {
    const auto& trace = rows[method];
    MethodSummary ms;
    ms.method = method;
    ms.final_objective = trace.back().objective;
    ms.iterations = trace.back().iteration;
    ms.wall_time = trace.back().seconds;
    summary.methods.push_back(ms);
    summary.best_objective = std::min(summary.best_objective, ms.final_objective);
  }
  summary.threshold =
      summary.best_objective +
      1e-4 * std::max(std::abs(summary.best_objective), 1e-12);
  for (auto& ms : summary.methods) {
    for (const auto& row : rows[ms.method]) {
      if (row.objective <= summary.threshold) {
        ms.iterations_to_threshold = row.iteration;
        break;
      }
    }
    ms.best = ms.final_objective == summary.best_objective;
  }
  return summary;
}

inline std::string render_summary_text(const Summary& summary) {
  std::ostringstream out;
  out << "method      final_objective      iters  to_best_1e-4  wall_seconds\n";
  for (const auto& ms : summary.methods) {
    char buffer[160];
    std::snprintf(buffer, sizeof buffer, "%-10s %18.10e %8ld %12s %13.6f %s\n",
                  ms.method.c_str(), ms.final_objective, ms.iterations,
                  ms.iterations_to_threshold < 0
                      ? "-"
                      : std::to_string(ms.iterations_to_threshold).c_str(),
                  ms.wall_time, ms.best ? "*" : "");
    out << buffer;
  }
  return out.str();
}

inline std::string render_summary_csv(const Summary& summary) {
  std::ostringstream out;
  out << "method,final_objective,iterations,iterations_to_threshold,wall_seconds,"
         "best\n";
  for (const auto& ms : summary.methods) {
    out << ms.method << ',' << format_double(ms.final_objective) << ','
        << ms.iterations << ',' << ms.iterations_to_threshold << ','
        << format_double(ms.wall_time) << ',' << (ms.best ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace msm
