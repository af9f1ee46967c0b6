// Acceptance suite: one pass/fail line per criterion, exit code = number
// of failed criteria.

#include "rppm/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace rppm;

namespace {

int g_failures = 0;

void report(int idx, const std::string& name, bool pass, double seconds,
            const std::string& detail = "") {
  std::printf("[%s] criterion %d: %s (%.1fs)%s%s\n", pass ? "PASS" : "FAIL",
              idx, name.c_str(), seconds,
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!pass) {
    ++g_failures;
  }
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0)
        .count();
  }
};

SpdPoint log_n_identity(Eigen::Index n) {
  return SpdPoint(std::log(static_cast<double>(n)) *
                  Matrix::Identity(n, n));
}

double dir_deriv(const std::function<double(const SpdPoint&)>& f,
                 const SpdPoint& x, const TangentVector& v) {
  const double h = 1e-6;
  return (f(exp_map(x, v * h)) - f(exp_map(x, v * -h))) / (2.0 * h);
}

double det_of(const Matrix& m) { return m.determinant(); }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

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
        out << (first ? "" : ",") << field;
        first = false;
      }
      ++col;
    }
    out << "\n";
  }
  return out.str();
}

// ---- criterion 1: manifold property suite --------------------------------

void criterion1() {
  Timer timer;
  bool pass = true;
  std::string detail;
  std::mt19937_64 rng(101);
  int instances = 0;
  for (Eigen::Index n : {2, 5, 10, 20}) {
    for (int rep = 0; rep < 50; ++rep) {
      ++instances;
      SpdPoint x = random_point(n, rng);
      SpdPoint y = random_point(n, rng);
      SpdPoint z = random_point(n, rng);
      if (distance(exp_map(x, log_map(x, y)), y) >= 1e-8) {
        pass = false;
        detail = "exp/log roundtrip above 1e-8";
      }
      TangentVector u = random_tangent(x, rng);
      if (std::abs(norm(parallel_transport(u, y)) - norm(u)) >= 1e-10) {
        pass = false;
        detail = "transport isometry above 1e-10";
      }
      double dxy = distance(x, y), dxz = distance(x, z), dyz = distance(y, z);
      double slack = dyz * dyz - (dxy * dxy + dxz * dxz -
                                  2.0 * inner(log_map(x, y), log_map(x, z)));
      if (slack < -1e-9) {
        pass = false;
        detail = "comparison inequality violated";
      }
    }
  }
  double t = timer.elapsed();
  if (t >= 30.0) {
    pass = false;
    detail = "runtime above 30 s";
  }
  report(1, "manifold property suite (" + std::to_string(instances) +
             " instances)", pass, t, detail);
}

// ---- criterion 2: gradient oracle suite ----------------------------------

void criterion2() {
  Timer timer;
  bool pass = true;
  std::string detail;
  std::mt19937_64 rng(202);
  struct Entry {
    std::string label;
    std::function<double(const SpdPoint&)> f;
    std::function<TangentVector(const SpdPoint&)> g;
    Eigen::Index n;
  };
  std::vector<Entry> entries;
  DcProblem f1 = make_f1(5, 0.5, 0.01);
  DcProblem f2 = make_f2(5);
  DcProblem f3 = make_f3(5);
  entries.push_back({"f1.g1", f1.eval_g1, f1.rgrad_g1, 5});
  entries.push_back({"f1.g2", f1.eval_g2, f1.rgrad_g2, 5});
  entries.push_back({"f1.h", f1.eval_h, f1.subgrad_h, 5});
  entries.push_back({"f2.g2", f2.eval_g2, f2.rgrad_g2, 5});
  entries.push_back({"f2.h", f2.eval_h, f2.subgrad_h, 5});
  entries.push_back({"f3.g1", f3.eval_g1, f3.rgrad_g1, 5});
  entries.push_back({"f3.h", f3.eval_h, f3.subgrad_h, 5});
  for (const auto& e : entries) {
    for (int rep = 0; rep < 50; ++rep) {
      SpdPoint x = random_point(e.n, rng);
      TangentVector v = random_tangent(x, rng);
      double an = inner(e.g(x), v);
      double fd = dir_deriv(e.f, x, v);
      if (std::abs(an - fd) / std::max(1.0, std::abs(an)) >= 1e-5) {
        pass = false;
        detail = e.label + " gradient mismatch";
      }
    }
  }
  double t = timer.elapsed();
  if (t >= 60.0) {
    pass = false;
    detail = "runtime above 60 s";
  }
  report(2, "gradient oracle suite", pass, t, detail);
}

// ---- criterion 3: f1 recovery --------------------------------------------

std::vector<RunRecord> g_f1_runs; // reused by criterion 4
std::vector<double> g_f1_lambda0s;
std::vector<Method> g_f1_methods;

void criterion3() {
  Timer timer;
  bool pass = true;
  std::string detail;
  const Eigen::Index n = 10;
  DcProblem p = make_f1(n, 0.5, 0.01);
  SpdPoint x0 = log_n_identity(n);
  SpdPoint target = f1_critical_point(n, 0.5, 0.01);
  const double L = *p.lipschitz_L;

  auto check_run = [&](const RunRecord& rr, const std::string& label) {
    if (rr.termination != Termination::step_tol || rr.iterations > 100) {
      pass = false;
      detail = label + ": no step_tol within 100 iterations (" +
               termination_name(rr.termination) + ")";
      return;
    }
    double d = distance(SpdPoint(rr.x_final), target);
    if (d > 1e-5) {
      pass = false;
      detail = label + ": final iterate " + format_double(d) +
               " from the critical point";
    }
  };

  // R-PPM at lambda0 = 1.01 L with the Prop-pro1 decrease inequality
  RunConfig rc;
  rc.rppm.lambda0 = 1.01 * L;
  rc.rppm.alpha_margin = 1.0;
  RunRecord rppm_run = run(p, Method::rppm, rc, x0);
  check_run(rppm_run, "rppm");
  for (std::size_t i = 1; i < rppm_run.trace.size(); ++i) {
    const auto& r = rppm_run.trace[i];
    double df = r.f_val - rppm_run.trace[i - 1].f_val;
    if (df > -0.5 * (r.lambda_k - L) * r.step_dist * r.step_dist + 1e-9) {
      pass = false;
      detail = "rppm decrease inequality violated at k=" + std::to_string(r.k);
    }
  }
  g_f1_runs.push_back(rppm_run);
  g_f1_lambda0s.push_back(rc.rppm.lambda0);
  g_f1_methods.push_back(Method::rppm);

  for (double lam0 : {1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
    RunConfig arc;
    arc.adap.lambda0 = lam0;
    RunRecord rr = run(p, Method::adap, arc, x0);
    check_run(rr, "adap lambda0=" + format_double(lam0));
    g_f1_runs.push_back(rr);
    g_f1_lambda0s.push_back(lam0);
    g_f1_methods.push_back(Method::adap);
  }

  double t = timer.elapsed();
  if (t >= 120.0) {
    pass = false;
    detail = "runtime above 2 min";
  }
  report(3, "f1 recovery (R-PPM and Adap-RPPM)", pass, t, detail);
}

// ---- criterion 4: solver invariants on every benchmark run ---------------

void criterion4() {
  Timer timer;
  bool pass = true;
  std::string detail;
  const Eigen::Index n = 10;
  DcProblem p = make_f1(n, 0.5, 0.01);
  const double L = *p.lipschitz_L;

  auto check_adap_trace = [&](const RunRecord& rr, double lambda0, double eps,
                              const std::string& label) {
    for (std::size_t i = 1; i < rr.trace.size(); ++i) {
      const auto& r = rr.trace[i];
      double df = r.f_val - rr.trace[i - 1].f_val;
      double d2 = r.step_dist * r.step_dist;
      if (r.step_dist > eps && df > -0.25 * r.lambda_k * d2 + 1e-12) {
        pass = false;
        detail = label + ": accepted-step inequality violated";
      }
      if (r.lambda_k > 4.0 * L + lambda0 + 1e-12) {
        pass = false;
        detail = label + ": lambda above 4L + lambda0";
      }
    }
  };

  // invariants on the criterion-3 benchmark runs (eps = 1e-8)
  for (std::size_t i = 0; i < g_f1_runs.size(); ++i) {
    if (g_f1_methods[i] == Method::adap) {
      check_adap_trace(g_f1_runs[i], g_f1_lambda0s[i], 1e-8,
                       "adap lambda0=" + format_double(g_f1_lambda0s[i]));
    }
  }

  // complexity caps, on runs designed for the check (eps = 1e-3)
  SpdPoint x0 = log_n_identity(n);
  auto count_large = [](const RunRecord& rr, double eps) {
    int c = 0;
    for (std::size_t i = 1; i < rr.trace.size(); ++i) {
      if (rr.trace[i].step_dist > eps) {
        ++c;
      }
    }
    return c;
  };
  const double eps = 1e-3;
  const double f0 = p.eval_f(x0);

  for (double lam0 : {1e-4, 1e-2, 1.0}) {
    RunConfig rc;
    rc.adap.lambda0 = lam0;
    rc.adap.eps_stop = eps;
    RunRecord rr = run(p, Method::adap, rc, x0);
    check_adap_trace(rr, lam0, eps, "adap eps=1e-3");
    double bound = complexity_bound(Method::adap, f0, *p.f_low_hint, lam0,
                                    p.lipschitz_L, eps);
    if (count_large(rr, eps) > bound) {
      pass = false;
      detail = "adap iteration count exceeds Theorem bound";
    }
  }
  {
    RunConfig rc;
    rc.rppm.lambda0 = 1.01 * L;
    rc.rppm.alpha_margin = 1.0;
    rc.rppm.eps_stop = eps;
    RunRecord rr = run(p, Method::rppm, rc, x0);
    double bound = complexity_bound(Method::rppm, f0, *p.f_low_hint,
                                    rc.rppm.lambda0, p.lipschitz_L, eps);
    if (count_large(rr, eps) > bound) {
      pass = false;
      detail = "rppm iteration count exceeds Theorem bound";
    }
  }

  report(4, "Adap-RPPM invariants and complexity caps", pass,
         timer.elapsed(), detail);
}

// ---- criterion 5: f2 stationarity ----------------------------------------

void criterion5() {
  Timer timer;
  bool pass = true;
  std::string detail;
  double oracle_det = 0.0;
  for (double d : f2_stationary_dets()) {
    if (d > 1.0) {
      oracle_det = d;
    }
  }
  // paper's reported 1.756, recorded against the oracle value
  const double paper_det = 1.756;
  const bool paper_close = std::abs(paper_det - oracle_det) < 1e-2;
  if (!paper_close) {
    pass = false;
    detail = "reported det 1.756 not within 1e-2 of the oracle value";
  }
  for (Eigen::Index n : {10, 20, 40}) {
    DcProblem p = make_f2(n);
    RunConfig rc;
    rc.adap.lambda0 = 1e-4;
    // lambda settles far above the local curvature during the transient
    // from log(n) I and then never decreases, so the tail needs many cheap
    // iterations (same budget as the scaling experiment)
    rc.adap.max_outer = 30000;
    RunRecord rr = run(p, Method::adap, rc, log_n_identity(n));
    double det = det_of(rr.x_final);
    // which of the three stationary determinants is reached depends on the
    // lambda-doubling transient: an accepted early trial can step across
    // the barrier into the lower basin (observed for n = 10), so the run
    // is checked against the nearest oracle value
    double best = 1e9;
    for (double dstar : f2_stationary_dets()) {
      best = std::min(best, std::abs(det - dstar));
    }
    if (rr.termination != Termination::step_tol || best > 1e-2) {
      pass = false;
      detail = "n=" + std::to_string(n) + ": det " + format_double(det) +
               " not within 1e-2 of a stationary det";
    }
  }
  double t = timer.elapsed();
  if (t >= 180.0) {
    pass = false;
    detail = "runtime above 3 min";
  }
  report(5, "f2 stationarity (oracle det " + format_double(oracle_det) +
             ", paper 1.756 recorded)", pass, t, detail);
}

// ---- criterion 6: f3 multi-start -----------------------------------------

void criterion6() {
  Timer timer;
  bool pass = true;
  std::string detail;
  const std::vector<double> dets = f3_stationary_dets();
  ExperimentConfig cfg;
  cfg.n_grid = {5, 10};
  cfg.starts_per_case = 10;
  cfg.seed = 42;
  auto [records, profile] = run_comparison(cfg);
  for (const auto& r : records) {
    if (!r.valid) {
      pass = false;
      detail = r.case_id + "/" + r.method + ": " + r.invalid_reason;
    }
    if (r.termination == "step_tol") {
      double best = 1e9;
      for (double d : dets) {
        best = std::min(best, std::abs(r.det_final - d));
      }
      if (best > 1e-3) {
        pass = false;
        detail = r.case_id + "/" + r.method + ": det " +
                 format_double(r.det_final) + " off the stationary set";
      }
    }
  }

  // DCPPA coincides with R-PPM(g2 = 0, fixed lambda) per iteration
  DcProblem p = make_f3(5);
  std::mt19937_64 rng(derive_seed(42, 0));
  SpdPoint x0 = random_point(5, rng);
  RunConfig rc;
  rc.rppm.lambda0 = 0.1;
  rc.dcppa.lambda = 0.1;
  SolverState sa{0, x0, 0.1, p.eval_f(x0), 0.0, 0, 0, {}};
  SolverState sb = sa;
  for (int k = 0; k < 25; ++k) {
    sa = rppm_step(p, sa, rc.rppm);
    sb = dcppa_step(p, sb, rc.dcppa);
    if (distance(sa.x, sb.x) >= 1e-12) {
      pass = false;
      detail = "DCPPA and R-PPM iterates diverge at k=" + std::to_string(k);
      break;
    }
    if (sa.step_dist < 1e-10) {
      break;
    }
  }

  double t = timer.elapsed();
  if (t >= 180.0) {
    pass = false;
    detail = "runtime above 3 min";
  }
  report(6, "f3 multi-start and DCPPA equivalence", pass, t, detail);
}

// ---- criterion 7: harness determinism ------------------------------------

std::filesystem::path g_cmp_dir;

void criterion7() {
  Timer timer;
  bool pass = true;
  std::string detail;
  namespace fs = std::filesystem;
  fs::path d1 = fs::temp_directory_path() / "rppm_accept_cmp1";
  fs::path d2 = fs::temp_directory_path() / "rppm_accept_cmp2";
  fs::remove_all(d1);
  fs::remove_all(d2);
  ExperimentConfig cfg;
  cfg.n_grid = {5, 8};
  cfg.starts_per_case = 5;
  cfg.seed = 7;
  cfg.output_dir = d1.string();
  auto [r1, p1] = run_comparison(cfg);
  cfg.output_dir = d2.string();
  auto [r2, p2] = run_comparison(cfg);
  std::string a = strip_cpu_column(slurp((d1 / "comparison.csv").string()));
  std::string b = strip_cpu_column(slurp((d2 / "comparison.csv").string()));
  if (a != b || a.empty()) {
    pass = false;
    detail = "summary CSVs differ beyond cpu_seconds";
  }
  for (const auto& [method, rho] : p1.rho_per_method) {
    double prev = 0.0;
    for (double r : rho) {
      if (r < prev - 1e-15 || r < 0.0 || r > 1.0) {
        pass = false;
        detail = "profile for " + method + " not monotone in [0,1]";
      }
      prev = r;
    }
  }
  g_cmp_dir = d1;
  fs::remove_all(d2);
  report(7, "harness determinism (comparison --seed 7)", pass,
         timer.elapsed(), detail);
}

// ---- criterion 8: full-scale results documented, not asserted ------------

void criterion8() {
  Timer timer;
  bool pass = std::filesystem::exists(g_cmp_dir / "profile_cpu.svg") &&
              std::filesystem::exists(g_cmp_dir / "profile_iterations.svg");
  report(8,
         "full-scale timings/slope/ordering not asserted; profiles emitted "
         "for inspection",
         pass, timer.elapsed(),
         pass ? "" : "profile artifacts missing");
  std::filesystem::remove_all(g_cmp_dir);
}

} // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
  } else {
    std::printf("%d criteria failed\n", g_failures);
  }
  return g_failures;
}
