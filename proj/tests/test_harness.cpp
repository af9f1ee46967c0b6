#include <doctest.h>

#include "rppm/harness.hpp"

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

using namespace rppm;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Drop the cpu_seconds column (index 6), the documented nondeterministic
// field, before byte comparison.
std::string strip_cpu_column(const std::string& csv) {
  std::stringstream in(csv), out;
  std::string line;
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::string field;
    int col = 0;
    bool first = true;
    while (std::getline(ls, field, ',')) {
      if (col != 6) {
        if (!first) {
          out << ",";
        }
        out << field;
        first = false;
      }
      ++col;
    }
    out << "\n";
  }
  return out.str();
}

int count_occurrences(const std::string& hay, const std::string& needle) {
  int n = 0;
  for (std::size_t pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

} // namespace

TEST_CASE("csv emission: empty records and trace row counts") {
  TempDir dir("rppm_csv_test");
  const std::string path = (dir.path / "empty.csv").string();
  emit_summary_csv({}, path);
  CHECK(slurp(path) ==
        "case_id,method,n,lambda0,seed,iterations,cpu_seconds,f_final,"
        "det_final,termination,criticality_residual\n");

  ExperimentConfig cfg;
  cfg.problem = "f2";
  cfg.n = 4;
  CaseRecord rec = run_single(cfg, Method::adap, 1e-4);
  const std::string tpath = (dir.path / "trace.csv").string();
  emit_trace_csv(rec.trace, tpath);
  std::string text = slurp(tpath);
  int rows = count_occurrences(text, "\n") - 1; // minus header
  CHECK(rows == rec.iterations + 1);
}

TEST_CASE("lambda sensitivity runs converge to the f1 critical point") {
  ExperimentConfig cfg;
  cfg.n = 6;
  cfg.lambda0_grid = {1e-2, 1.0};
  std::vector<CaseRecord> records = run_lambda_sensitivity(cfg);
  REQUIRE(records.size() == 2);
  SpdPoint target = f1_critical_point(6, 0.5, 0.01);
  const double target_det = target.mat().determinant();
  for (const auto& r : records) {
    CHECK(r.valid);
    CHECK(r.termination == "step_tol");
    CHECK(r.iterations <= 100);
    CHECK(r.criticality_residual < 1e-5);
    CHECK(r.det_final == doctest::Approx(target_det).epsilon(1e-6));
  }
}

TEST_CASE("scaling records carry the manifold dimension table") {
  TempDir dir("rppm_scaling_test");
  ExperimentConfig cfg;
  cfg.n_grid = {10, 15};
  cfg.output_dir = dir.path.string();
  std::vector<CaseRecord> records = run_scaling(cfg);
  REQUIRE(records.size() == 2);
  for (const auto& r : records) {
    CHECK(r.valid);
    CHECK(r.termination == "step_tol");
  }
  std::string dims = slurp((dir.path / "scaling_dims.csv").string());
  CHECK(dims.find("f2_n10,10,55,") != std::string::npos);
  CHECK(dims.find("f2_n15,15,120,") != std::string::npos);
}

TEST_CASE("comparison: determinism, profile shape, solved dets") {
  TempDir dir1("rppm_cmp1"), dir2("rppm_cmp2");
  ExperimentConfig cfg;
  cfg.n_grid = {3, 4};
  cfg.starts_per_case = 3;
  cfg.seed = 7;
  cfg.output_dir = dir1.path.string();
  auto [rec1, prof1] = run_comparison(cfg);
  cfg.output_dir = dir2.path.string();
  auto [rec2, prof2] = run_comparison(cfg);

  std::string a = slurp((dir1.path / "comparison.csv").string());
  std::string b = slurp((dir2.path / "comparison.csv").string());
  CHECK(strip_cpu_column(a) == strip_cpu_column(b));

  // rho curves are monotone in [0,1]
  for (const auto& [method, rho] : prof1.rho_per_method) {
    double prev = 0.0;
    for (double r : rho) {
      CHECK(r >= prev - 1e-15);
      CHECK(r >= 0.0);
      CHECK(r <= 1.0);
      prev = r;
    }
  }

  std::vector<double> dets = f3_stationary_dets();
  for (const auto& r : rec1) {
    CHECK(r.valid);
    if (r.termination == "step_tol") {
      double best = 1e9;
      for (double d : dets) {
        best = std::min(best, std::abs(r.det_final - d));
      }
      CHECK(best <= 1e-3);
    }
  }

  std::string svg = slurp((dir1.path / "profile_cpu.svg").string());
  CHECK(count_occurrences(svg, "<polyline") == 3); // one per method
}

TEST_CASE("parallel case execution matches serial execution") {
  ExperimentConfig cfg;
  cfg.n_grid = {3};
  cfg.starts_per_case = 4;
  cfg.seed = 11;
  cfg.threads = 1;
  auto [serial, ps] = run_comparison(cfg);
  cfg.threads = 4;
  auto [parallel, pp] = run_comparison(cfg);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].case_id == parallel[i].case_id);
    CHECK(serial[i].method == parallel[i].method);
    CHECK(serial[i].iterations == parallel[i].iterations);
    CHECK(serial[i].f_final == parallel[i].f_final);
    CHECK(serial[i].det_final == parallel[i].det_final);
    CHECK(serial[i].termination == parallel[i].termination);
  }
}

TEST_CASE("performance profile: single method gives rho(1) = 1") {
  CaseRecord a;
  a.case_id = "c1";
  a.method = "adap";
  a.cpu_seconds = 2.0;
  a.termination = "step_tol";
  CaseRecord b = a;
  b.case_id = "c2";
  b.cpu_seconds = 5.0;
  PerfProfile prof = make_performance_profile(
      {a, b}, [](const CaseRecord& r) { return r.cpu_seconds; },
      [](const CaseRecord&) { return true; });
  REQUIRE(!prof.taus.empty());
  CHECK(prof.taus.front() == 1.0);
  CHECK(prof.rho_per_method.at("adap").front() == 1.0);
}

TEST_CASE("convergence svg has one polyline per trace") {
  TempDir dir("rppm_svg_test");
  std::vector<IterationRecord> t1 = {{0, 1.0, 0.0, 0.1, 0, 0.0},
                                     {1, 0.5, 0.3, 0.1, 2, 0.0}};
  std::vector<IterationRecord> t2 = {{0, 2.0, 0.0, 0.1, 0, 0.0},
                                     {1, 0.7, 0.2, 0.1, 2, 0.0}};
  const std::string path = (dir.path / "conv.svg").string();
  emit_convergence_svg({{"a", t1}, {"b", t2}}, 0.4, path);
  std::string svg = slurp(path);
  CHECK(count_occurrences(svg, "<polyline") == 2);
}

TEST_CASE("emit failures carry the path") {
  CHECK_THROWS_WITH_AS(
      emit_summary_csv({}, "/nonexistent_dir_rppm/x.csv"),
      doctest::Contains("/nonexistent_dir_rppm/x.csv"),
      std::runtime_error);
}
