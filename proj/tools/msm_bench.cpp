// Benchmark front end: generate seeded scenarios, run method comparisons,
// and summarize convergence traces.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "msm/msm.hpp"

namespace {

struct ScenarioFlags {
  std::string kind = "fig1a_nnls";
  long m = 0;
  long n = 0;
  long d = 0;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::string methods;
  long iters = 0;
  double seconds = 0.0;
  double omega = 0.0;
  double theta = 0.0;
  long inner_iters = 0;
  int threads = 0;
  bool desk = false;
  std::string penalty;
  double lb = 0.0;
  double ub = 0.0;

  CLI::Option* kind_opt = nullptr;
  CLI::Option* m_opt = nullptr;
  CLI::Option* n_opt = nullptr;
  CLI::Option* d_opt = nullptr;
  CLI::Option* lambda_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* methods_opt = nullptr;
  CLI::Option* iters_opt = nullptr;
  CLI::Option* seconds_opt = nullptr;
  CLI::Option* omega_opt = nullptr;
  CLI::Option* theta_opt = nullptr;
  CLI::Option* inner_opt = nullptr;
  CLI::Option* threads_opt = nullptr;
  CLI::Option* penalty_opt = nullptr;
  CLI::Option* lb_opt = nullptr;
  CLI::Option* ub_opt = nullptr;
};

void add_scenario_flags(CLI::App* cmd, ScenarioFlags& f) {
  f.kind_opt = cmd->add_option(
      "--kind", f.kind,
      "scenario kind: fig1a_nnls|fig1b_l0|nmf|sparse_coding|custom");
  f.m_opt = cmd->add_option("--m", f.m, "rows of the design/data matrix");
  f.n_opt = cmd->add_option(
      "--n", f.n, "variables (LS kinds), rank (nmf), atoms (sparse_coding)");
  f.d_opt = cmd->add_option("--d", f.d, "data columns (nmf, sparse_coding)");
  f.lambda_opt = cmd->add_option("--lambda", f.lambda, "penalty weight");
  f.seed_opt = cmd->add_option("--seed", f.seed, "instance seed");
  f.methods_opt = cmd->add_option(
      "--methods", f.methods, "comma list of msm,pgm,pgm-ls,apgm,apgm-ls");
  f.iters_opt = cmd->add_option("--iters", f.iters, "iteration budget");
  f.seconds_opt =
      cmd->add_option("--seconds", f.seconds, "wall-time budget (seconds)");
  f.omega_opt = cmd->add_option("--omega", f.omega, "relaxation, in (0,2)");
  f.theta_opt = cmd->add_option("--theta", f.theta, "diagonal shift, >= 0");
  f.inner_opt = cmd->add_option("--inner-iters", f.inner_iters,
                                "inner sweeps per nmf half-step");
  f.threads_opt =
      cmd->add_option("--threads", f.threads, "column workers for matrix solves");
  f.penalty_opt = cmd->add_option(
      "--penalty", f.penalty, "custom kind penalty: none|box|l1|l0");
  f.lb_opt = cmd->add_option("--lb", f.lb, "box lower bound (custom kind)");
  f.ub_opt = cmd->add_option("--ub", f.ub, "box upper bound (custom kind)");
  cmd->add_flag("--desk", f.desk,
                "desk-scale dims (100x400) for the fig1 kinds");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

msm::BenchScenario build_scenario(const ScenarioFlags& f,
                                  const std::string& scenario_path) {
  msm::BenchScenario s;
  if (!scenario_path.empty()) {
    s = msm::parse_scenario(read_file(scenario_path));
    if (f.kind_opt->count()) s.kind = msm::parse_kind(f.kind);
  } else {
    s = msm::default_scenario(msm::parse_kind(f.kind));
  }
  if (f.m_opt->count()) s.m = f.m;
  if (f.n_opt->count()) s.n = f.n;
  if (f.d_opt->count()) s.d = f.d;
  if (f.lambda_opt->count()) s.lambda = f.lambda;
  if (f.seed_opt->count()) s.seed = f.seed;
  if (f.methods_opt->count()) s.methods = msm::parse_method_list(f.methods);
  if (f.iters_opt->count()) {
    s.budget.iterations = f.iters;
    s.budget.seconds = -1.0;
  }
  if (f.seconds_opt->count()) s.budget.seconds = f.seconds;
  if (f.omega_opt->count()) s.omega = f.omega;
  if (f.theta_opt->count()) s.theta = f.theta;
  if (f.inner_opt->count()) s.inner_iterations = f.inner_iters;
  if (f.threads_opt->count()) s.threads = f.threads;
  if (f.penalty_opt->count()) s.penalty = f.penalty;
  if (f.lb_opt->count()) s.lb = f.lb;
  if (f.ub_opt->count()) s.ub = f.ub;
  if (f.desk) msm::apply_desk_scale(s);
  return s;
}

int write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return 0;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot open output path: " << path << '\n';
    return 1;
  }
  out << content;
  out.flush();
  if (!out) {
    std::cerr << "error: failed writing output: " << path << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"msm-bench: convergence comparisons for the msm solver library"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "write a scenario file");
  ScenarioFlags gen_flags;
  std::string gen_out;
  add_scenario_flags(gen, gen_flags);
  gen->add_option("--out", gen_out, "scenario file path (default: stdout)");

  auto* run = app.add_subcommand("run", "run a comparison, emit a CSV trace");
  ScenarioFlags run_flags;
  std::string run_scenario_path;
  std::string run_out;
  add_scenario_flags(run, run_flags);
  run->add_option("--scenario", run_scenario_path, "scenario file to load");
  auto* run_out_opt =
      run->add_option("--out", run_out, "trace CSV path (default: stdout)");

  auto* summarize = app.add_subcommand("summarize", "reduce a trace to a table");
  std::string trace_path;
  std::string summary_csv_path;
  summarize->add_option("trace", trace_path, "trace CSV to summarize")
      ->required();
  summarize->add_option("--csv", summary_csv_path,
                        "also write the summary as CSV to this path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen->parsed()) {
      const msm::BenchScenario s = build_scenario(gen_flags, "");
      return write_output(gen_out, msm::serialize_scenario(s));
    }
    if (run->parsed()) {
      msm::BenchScenario s = build_scenario(run_flags, run_scenario_path);
      std::string out_path = run_out;
      if (!run_out_opt->count() && !s.output_path.empty())
        out_path = s.output_path;
      return write_output(out_path, msm::run_comparison_csv(s));
    }
    const msm::Summary summary = msm::summarize_trace(read_file(trace_path));
    std::cout << msm::render_summary_text(summary);
    if (!summary_csv_path.empty())
      return write_output(summary_csv_path, msm::render_summary_csv(summary));
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
