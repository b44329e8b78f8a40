#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "catch_amalgamated.hpp"
#include "msm/bench.hpp"

using Catch::Approx;

namespace {

std::vector<std::vector<std::string>> data_rows(const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream stream(csv);
  std::string line;
  bool saw_header = false;
  while (std::getline(stream, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      saw_header = true;  // column header
      continue;
    }
    std::vector<std::string> fields;
    std::istringstream fs(line);
    std::string token;
    while (std::getline(fs, token, ',')) fields.push_back(token);
    rows.push_back(std::move(fields));
  }
  return rows;
}

msm::BenchScenario small_custom() {
  msm::BenchScenario s = msm::default_scenario(msm::ScenarioKind::Custom);
  s.m = 30;
  s.n = 20;
  s.budget.iterations = 10;
  return s;
}

}  // namespace

TEST_CASE("prng is deterministic and uniform draws stay in range") {
  msm::Prng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.u01();
    CHECK(u == b.u01());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  msm::Prng g(7);
  double sum = 0.0, sum_sq = 0.0;
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) {
    const double x = g.gaussian();
    sum += x;
    sum_sq += x * x;
  }
  CHECK(std::abs(sum / draws) < 0.05);
  CHECK(sum_sq / draws == Approx(1.0).margin(0.1));
}

TEST_CASE("scenario kinds round-trip by name") {
  const msm::ScenarioKind kinds[] = {
      msm::ScenarioKind::Fig1aNnls, msm::ScenarioKind::Fig1bL0,
      msm::ScenarioKind::Nmf, msm::ScenarioKind::SparseCoding,
      msm::ScenarioKind::Custom};
  for (auto kind : kinds) CHECK(msm::parse_kind(msm::kind_name(kind)) == kind);
  CHECK_THROWS_AS(msm::parse_kind("bogus"), std::invalid_argument);
}

TEST_CASE("scenario defaults follow the figure setups") {
  const auto fig1a = msm::default_scenario(msm::ScenarioKind::Fig1aNnls);
  CHECK(fig1a.m == 200);
  CHECK(fig1a.n == 1000);
  CHECK(fig1a.lambda == 0.0);
  CHECK(fig1a.methods.size() == 5);
  CHECK(fig1a.budget.iterations == 50);

  const auto fig1b = msm::default_scenario(msm::ScenarioKind::Fig1bL0);
  CHECK(fig1b.lambda == 1.0);

  const auto nmf = msm::default_scenario(msm::ScenarioKind::Nmf);
  CHECK(nmf.m == 200);
  CHECK(nmf.n == 10);
  CHECK(nmf.d == 100);
  CHECK(nmf.methods.size() == 2);

  const auto coding = msm::default_scenario(msm::ScenarioKind::SparseCoding);
  CHECK(coding.m == 64);
  CHECK(coding.n == 256);
  CHECK(coding.d == 200);
  CHECK(coding.lambda == 0.1);

  auto desk = msm::default_scenario(msm::ScenarioKind::Fig1aNnls);
  msm::apply_desk_scale(desk);
  CHECK(desk.m == 100);
  CHECK(desk.n == 400);
  auto untouched = msm::default_scenario(msm::ScenarioKind::Nmf);
  msm::apply_desk_scale(untouched);
  CHECK(untouched.m == 200);
}

TEST_CASE("scenario text round-trips every field") {
  msm::BenchScenario s = msm::default_scenario(msm::ScenarioKind::Fig1bL0);
  s.m = 33;
  s.n = 44;
  s.d = 2;
  s.lambda = 0.75;
  s.seed = 12345;
  s.methods = {msm::Method::Msm, msm::Method::ApgmLs};
  s.budget.iterations = 17;
  s.budget.seconds = 2.5;
  s.omega = 0.9;
  s.theta = 0.05;
  s.inner_iterations = 11;
  s.threads = 4;
  s.output_path = "trace.csv";
  s.penalty = "l1";
  s.lb = -1.0;
  s.ub = 3.0;

  const auto parsed = msm::parse_scenario(msm::serialize_scenario(s));
  CHECK(parsed.kind == s.kind);
  CHECK(parsed.m == s.m);
  CHECK(parsed.n == s.n);
  CHECK(parsed.d == s.d);
  CHECK(parsed.lambda == s.lambda);
  CHECK(parsed.seed == s.seed);
  REQUIRE(parsed.methods.size() == 2);
  CHECK(parsed.methods[0] == msm::Method::Msm);
  CHECK(parsed.methods[1] == msm::Method::ApgmLs);
  CHECK(parsed.budget.iterations == 17);
  CHECK(parsed.budget.seconds == 2.5);
  CHECK(parsed.omega == s.omega);
  CHECK(parsed.theta == s.theta);
  CHECK(parsed.inner_iterations == 11);
  CHECK(parsed.threads == 4);
  CHECK(parsed.output_path == "trace.csv");
  CHECK(parsed.penalty == "l1");
  CHECK(parsed.lb == -1.0);
  CHECK(parsed.ub == 3.0);
}

TEST_CASE("scenario parsing tolerates comments and rejects junk") {
  const auto s = msm::parse_scenario(
      "# a comment line\nkind=custom  \n\nm=12 # trailing comment\r\n");
  CHECK(s.kind == msm::ScenarioKind::Custom);
  CHECK(s.m == 12);
  CHECK(s.n == 400);  // default for the kind survives

  CHECK_THROWS_AS(msm::parse_scenario("m=12\n"), std::runtime_error);
  CHECK_THROWS_AS(msm::parse_scenario("kind=custom\nnot a pair\n"),
                  std::runtime_error);
  CHECK_THROWS_AS(msm::parse_scenario("kind=custom\nm=abc\n"),
                  std::runtime_error);
  CHECK_THROWS_AS(msm::parse_scenario("kind=custom\nmethods=\n"),
                  std::runtime_error);
  CHECK_THROWS_AS(msm::parse_scenario("kind=bogus\n"), std::invalid_argument);
}

TEST_CASE("instance generation is seed-deterministic") {
  msm::BenchScenario s = small_custom();
  const auto first = msm::generate_instance(s);
  const auto second = msm::generate_instance(s);
  CHECK((first.ls.c - second.ls.c).cwiseAbs().maxCoeff() == 0.0);
  CHECK((first.ls.d - second.ls.d).cwiseAbs().maxCoeff() == 0.0);
  CHECK((first.x0 - second.x0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(first.ls.c.minCoeff() >= 0.0);
  CHECK(first.ls.c.maxCoeff() < 1.0);

  s.seed = 1;
  const auto other = msm::generate_instance(s);
  CHECK((first.ls.c - other.ls.c).cwiseAbs().maxCoeff() > 0.0);

  msm::BenchScenario bad = small_custom();
  bad.n = 0;
  CHECK_THROWS_AS(msm::generate_instance(bad), std::invalid_argument);
}

TEST_CASE("sparse-coding instances have unit dictionary columns") {
  msm::BenchScenario s = msm::default_scenario(msm::ScenarioKind::SparseCoding);
  s.m = 10;
  s.n = 8;
  s.d = 6;
  const auto instance = msm::generate_instance(s);
  CHECK(instance.y.rows() == 10);
  CHECK(instance.y.cols() == 6);
  CHECK(instance.w0.rows() == 10);
  CHECK(instance.w0.cols() == 8);
  CHECK(instance.h0.rows() == 8);
  CHECK(instance.h0.cols() == 6);
  for (Eigen::Index j = 0; j < instance.w0.cols(); ++j)
    CHECK(instance.w0.col(j).norm() == Approx(1.0).margin(1e-12));
}

TEST_CASE("comparison traces have one row per method per iteration") {
  const msm::BenchScenario s = small_custom();
  const std::string csv = msm::run_comparison_csv(s);
  CHECK(csv.find('\r') == std::string::npos);
  CHECK(csv.find("# prng=mt19937_64/u53/v1\n") != std::string::npos);
  CHECK(csv.find("# library_version=1.0.0\n") != std::string::npos);
  CHECK(csv.find("# kind=custom\n") != std::string::npos);
  CHECK(csv.find("method,iteration,cumulative_seconds,objective,step_norm,"
                 "certificate\n") != std::string::npos);

  const auto rows = data_rows(csv);
  REQUIRE(rows.size() == s.methods.size() * 10);
  std::size_t index = 0;
  for (const auto method : s.methods) {
    for (long k = 1; k <= 10; ++k, ++index) {
      REQUIRE(rows[index].size() == 6);
      CHECK(rows[index][0] == msm::method_name(method));
      CHECK(rows[index][1] == std::to_string(k));
    }
  }
}

TEST_CASE("the splitting method's objective column is nonincreasing") {
  const msm::BenchScenario s = small_custom();
  const auto rows = data_rows(msm::run_comparison_csv(s));
  double previous = std::numeric_limits<double>::infinity();
  bool saw_msm = false;
  for (const auto& row : rows) {
    if (row[0] != "msm") continue;
    saw_msm = true;
    const double objective = std::stod(row[3]);
    CHECK(objective <= previous + 1e-9);
    previous = objective;
  }
  CHECK(saw_msm);
}

TEST_CASE("reruns agree everywhere except the timing column") {
  for (auto kind : {msm::ScenarioKind::Custom, msm::ScenarioKind::Fig1bL0}) {
    msm::BenchScenario s = msm::default_scenario(kind);
    s.m = 20;
    s.n = 12;
    s.budget.iterations = 6;
    s.methods = {msm::Method::Msm, msm::Method::Apgm};
    const auto first = data_rows(msm::run_comparison_csv(s));
    const auto second = data_rows(msm::run_comparison_csv(s));
    REQUIRE(first.size() == second.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
      CHECK(first[i][0] == second[i][0]);
      CHECK(first[i][1] == second[i][1]);
      CHECK(first[i][3] == second[i][3]);
      CHECK(first[i][4] == second[i][4]);
      CHECK(first[i][5] == second[i][5]);
    }
  }
}

TEST_CASE("thread count does not change coding traces") {
  msm::BenchScenario s = msm::default_scenario(msm::ScenarioKind::SparseCoding);
  s.m = 10;
  s.n = 8;
  s.d = 6;
  s.budget.iterations = 5;
  s.methods = {msm::Method::Msm};
  const auto serial = data_rows(msm::run_comparison_csv(s));
  s.threads = 3;
  const auto threaded = data_rows(msm::run_comparison_csv(s));
  REQUIRE(serial.size() == threaded.size());
  REQUIRE(serial.size() == 5);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i][3] == threaded[i][3]);
    CHECK(serial[i][4] == threaded[i][4]);
    CHECK(serial[i][5] == threaded[i][5]);
  }
}

TEST_CASE("nmf traces carry one row per round with no certificate") {
  msm::BenchScenario s = msm::default_scenario(msm::ScenarioKind::Nmf);
  s.m = 12;
  s.n = 3;
  s.d = 8;
  s.budget.iterations = 4;
  s.inner_iterations = 5;
  const std::string csv = msm::run_comparison_csv(s);
  const auto rows = data_rows(csv);
  REQUIRE(rows.size() == 2 * 4);
  for (const auto& row : rows) {
    CHECK(std::isnan(std::stod(row[5])));
    CHECK(std::isfinite(std::stod(row[3])));
  }
  // Alternating minimization from a shared start: each method's round
  // objectives are nonincreasing.
  for (const char* method : {"msm", "pgm"}) {
    double previous = std::numeric_limits<double>::infinity();
    for (const auto& row : rows) {
      if (row[0] != method) continue;
      const double objective = std::stod(row[3]);
      CHECK(objective <= previous + 1e-9);
      previous = objective;
    }
  }

  const auto summary = msm::summarize_trace(csv);
  REQUIRE(summary.methods.size() == 2);
  CHECK(summary.methods[0].iterations == 4);
}

TEST_CASE("summaries pick the best method and threshold crossing") {
  const std::string csv =
      "# comment\n"
      "method,iteration,cumulative_seconds,objective,step_norm,certificate\n"
      "alpha,1,0.1,5.0,1,1\n"
      "alpha,2,0.2,1.0,1,1\n"
      "alpha,3,0.3,1.00005,1,1\n"
      "beta,1,0.05,4.0,1,1\n"
      "beta,2,0.1,3.0,1,1\n";
  const auto summary = msm::summarize_trace(csv);
  REQUIRE(summary.methods.size() == 2);
  CHECK(summary.best_objective == Approx(1.00005));
  CHECK(summary.methods[0].method == "alpha");
  CHECK(summary.methods[0].best);
  CHECK_FALSE(summary.methods[1].best);
  CHECK(summary.methods[0].final_objective == Approx(1.00005));
  CHECK(summary.methods[0].iterations == 3);
  CHECK(summary.methods[0].wall_time == Approx(0.3));
  // alpha dips under best + 1e-4-relative at iteration 2 already.
  CHECK(summary.methods[0].iterations_to_threshold == 2);
  CHECK(summary.methods[1].iterations_to_threshold == -1);

  const std::string text = msm::render_summary_text(summary);
  CHECK(text.find("alpha") != std::string::npos);
  CHECK(text.find('*') != std::string::npos);
  const std::string rendered = msm::render_summary_csv(summary);
  CHECK(rendered.find("alpha,") != std::string::npos);
  CHECK(rendered.find(",1\n") != std::string::npos);
  CHECK(rendered.find(",-1,") != std::string::npos);
}

TEST_CASE("summarize rejects damaged traces") {
  CHECK_THROWS_WITH(
      msm::summarize_trace("method,iteration,cumulative_seconds,objective,"
                           "step_norm,certificate\n"),
      Catch::Matchers::ContainsSubstring("empty trace"));
  CHECK_THROWS_WITH(msm::summarize_trace(""),
                    Catch::Matchers::ContainsSubstring("missing trace header"));
  CHECK_THROWS_WITH(msm::summarize_trace("not,a,trace\n"),
                    Catch::Matchers::ContainsSubstring("unexpected trace header"));
  CHECK_THROWS_WITH(
      msm::summarize_trace("method,iteration,cumulative_seconds,objective,"
                           "step_norm,certificate\nmsm,x,0,1,1,1\n"),
      Catch::Matchers::ContainsSubstring("malformed row"));
}

TEST_CASE("a summary of a real trace is self-consistent") {
  msm::BenchScenario s = small_custom();
  s.methods = {msm::Method::Msm, msm::Method::Pgm, msm::Method::Apgm};
  const std::string csv = msm::run_comparison_csv(s);
  const auto summary = msm::summarize_trace(csv);
  REQUIRE(summary.methods.size() == 3);
  int best_count = 0;
  for (const auto& ms : summary.methods) {
    CHECK(ms.iterations == 10);
    CHECK(ms.final_objective >= summary.best_objective);
    if (ms.best) ++best_count;
  }
  CHECK(best_count >= 1);
}

TEST_CASE("a wall-time budget produces at least one row") {
  msm::BenchScenario s = small_custom();
  s.budget.seconds = 0.02;
  s.methods = {msm::Method::Msm};
  const auto rows = data_rows(msm::run_comparison_csv(s));
  CHECK(!rows.empty());
}
