#include "rppm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rppm {

namespace {

constexpr const char* kSummaryHeader =
    "case_id,method,n,lambda0,seed,iterations,cpu_seconds,f_final,"
    "det_final,termination,criticality_residual";

double log_det_of(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

SpdPoint scaled_identity_start(Eigen::Index n) {
  const double s = std::log(static_cast<double>(n));
  if (s <= 0.0) {
    throw std::invalid_argument("X0 = log(n) I requires n >= 2");
  }
  return SpdPoint(s * Matrix::Identity(n, n));
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  return out;
}

// Runs tasks[i] for every index, on an OpenMP pool when threads > 1.
// Results land at their own index, so ordering is deterministic.
void for_each_case(int threads, int count,
                   const std::function<void(int)>& task) {
#ifdef _OPENMP
  if (threads > 1) {
#pragma omp parallel for num_threads(threads) schedule(dynamic)
    for (int i = 0; i < count; ++i) {
      task(i);
    }
    return;
  }
#else
  (void)threads;
#endif
  for (int i = 0; i < count; ++i) {
    task(i);
  }
}

DcProblem build_problem(const ExperimentConfig& cfg, Eigen::Index n) {
  if (cfg.problem == "f1") return make_f1(n, cfg.alpha, cfg.mu);
  if (cfg.problem == "f2") return make_f2(n);
  if (cfg.problem == "f3") return make_f3(n);
  throw std::invalid_argument("unknown problem: " + cfg.problem);
}

RunConfig build_run_config(const ExperimentConfig& cfg, double lambda0,
                           int default_max_outer) {
  const int max_outer = cfg.max_outer > 0 ? cfg.max_outer : default_max_outer;
  RunConfig rc;
  rc.rppm.lambda0 = lambda0;
  rc.rppm.eps_stop = cfg.eps_stop;
  rc.rppm.max_outer = max_outer;
  rc.adap.lambda0 = lambda0;
  rc.adap.eps_stop = cfg.eps_stop;
  rc.adap.max_outer = max_outer;
  rc.dca.eps_stop = cfg.eps_stop;
  rc.dca.max_outer = max_outer;
  rc.dcppa.lambda = lambda0 > 0.0 ? lambda0 : 0.1;
  rc.dcppa.eps_stop = cfg.eps_stop;
  rc.dcppa.max_outer = max_outer;
  return rc;
}

CaseRecord execute_case(const DcProblem& p, Method method, const RunConfig& rc,
                        const SpdPoint& x0, const std::string& case_id,
                        double lambda0, std::uint64_t seed) {
  CaseRecord rec;
  rec.case_id = case_id;
  rec.method = method_name(method);
  rec.n = p.n;
  rec.lambda0 = lambda0;
  rec.seed = seed;
  RunRecord rr = run(p, method, rc, x0);
  rec.iterations = rr.iterations;
  rec.cpu_seconds = rr.cpu_seconds;
  rec.f_final = rr.f_final;
  rec.det_final = std::exp(log_det_of(rr.x_final));
  rec.termination = termination_name(rr.termination);
  rec.trace = rr.trace;
  try {
    rec.criticality_residual = check_criticality(p, SpdPoint(rr.x_final));
  } catch (const std::exception&) {
    rec.criticality_residual = std::numeric_limits<double>::quiet_NaN();
  }
  cross_check_record(p, rc, method, rec);
  return rec;
}

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

// Minimal deterministic SVG line chart.
void write_line_svg(const std::string& path, const std::vector<Series>& series,
                    const std::string& title, bool log_y) {
  const double w = 640.0, h = 440.0, ml = 60.0, mr = 20.0, mt = 40.0,
               mb = 50.0;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (auto [x, y] : s.points) {
      double yy = log_y ? std::log10(std::max(y, 1e-16)) : y;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, yy);
      ymax = std::max(ymax, yy);
    }
  }
  if (!(xmax > xmin)) {
    xmax = xmin + 1.0;
  }
  if (!(ymax > ymin)) {
    ymax = ymin + 1.0;
  }
  auto px = [&](double x) {
    return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr);
  };
  auto py = [&](double y) {
    double yy = log_y ? std::log10(std::max(y, 1e-16)) : y;
    return h - mb - (yy - ymin) / (ymax - ymin) * (h - mt - mb);
  };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                 "#9467bd", "#ff7f0e", "#8c564b"};
  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\">\n";
  out << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\">"
      << title << "</text>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr
      << "\" y2=\"" << h - mb << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << h - mb << "\" stroke=\"black\"/>\n";
  int ci = 0;
  for (const auto& s : series) {
    const char* color = colors[ci % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : s.points) {
      out << format_double(px(x)) << "," << format_double(py(y)) << " ";
    }
    out << "\"/>\n";
    out << "<text x=\"" << w - mr - 120 << "\" y=\"" << mt + 16 * ci
        << "\" fill=\"" << color << "\">" << s.label << "</text>\n";
    ++ci;
  }
  out << "</svg>\n";
}

std::vector<Eigen::Index> default_n_grid(const ExperimentConfig& cfg,
                                         bool scaling) {
  if (!cfg.n_grid.empty()) {
    return cfg.n_grid;
  }
  std::vector<Eigen::Index> grid;
  if (scaling) {
    // paper grid n = 10,15,...,100; desk scale stops at 60
    for (Eigen::Index n = 10; n <= (cfg.full ? 100 : 60); n += 5) {
      grid.push_back(n);
    }
  } else {
    // 8 dimensions x 10 starts desk scale; 16 x 10 at full scale
    if (cfg.full) {
      for (Eigen::Index n = 5; n <= 80; n += 5) {
        grid.push_back(n);
      }
    } else {
      grid = {5, 10, 15, 20, 30, 40, 50, 60};
    }
  }
  return grid;
}

void maybe_emit(const ExperimentConfig& cfg,
                const std::vector<CaseRecord>& records,
                const std::string& summary_name) {
  if (cfg.output_dir.empty()) {
    return;
  }
  std::filesystem::create_directories(cfg.output_dir);
  emit_summary_csv(records, cfg.output_dir + "/" + summary_name);
  for (const auto& r : records) {
    emit_trace_csv(r.trace, cfg.output_dir + "/trace_" + r.case_id + ".csv");
  }
}

} // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

void emit_summary_csv(const std::vector<CaseRecord>& records,
                      const std::string& path) {
  std::ofstream out = open_out(path);
  out << kSummaryHeader << "\n";
  for (const auto& r : records) {
    out << r.case_id << "," << r.method << "," << r.n << ","
        << format_double(r.lambda0) << "," << r.seed << "," << r.iterations
        << "," << format_double(r.cpu_seconds) << ","
        << format_double(r.f_final) << "," << format_double(r.det_final)
        << "," << r.termination << ","
        << format_double(r.criticality_residual) << "\n";
  }
}

void emit_trace_csv(const std::vector<IterationRecord>& trace,
                    const std::string& path) {
  std::ofstream out = open_out(path);
  out << "k,f_val,step_dist,lambda_k,inner_iters,cpu_seconds\n";
  for (const auto& r : trace) {
    out << r.k << "," << format_double(r.f_val) << ","
        << format_double(r.step_dist) << "," << format_double(r.lambda_k)
        << "," << r.inner_iters << "," << format_double(r.cpu_seconds)
        << "\n";
  }
}

void emit_profile_svg(const PerfProfile& profile, const std::string& path) {
  std::vector<Series> series;
  for (const auto& [method, rho] : profile.rho_per_method) {
    Series s;
    s.label = method;
    for (std::size_t i = 0; i < profile.taus.size(); ++i) {
      s.points.emplace_back(profile.taus[i], rho[i]);
    }
    series.push_back(std::move(s));
  }
  write_line_svg(path, series, "performance profile (rho vs tau)", false);
}

void emit_convergence_svg(
    const std::vector<std::pair<std::string, std::vector<IterationRecord>>>&
        traces,
    double f_star, const std::string& path) {
  std::vector<Series> series;
  for (const auto& [label, trace] : traces) {
    Series s;
    s.label = label;
    for (const auto& r : trace) {
      s.points.emplace_back(static_cast<double>(r.k),
                            std::abs(r.f_val - f_star));
    }
    series.push_back(std::move(s));
  }
  write_line_svg(path, series, "|f(X^k) - f(X*)| vs k (log10)", true);
}

PerfProfile make_performance_profile(
    const std::vector<CaseRecord>& records,
    const std::function<double(const CaseRecord&)>& metric,
    const std::function<bool(const CaseRecord&)>& solved) {
  // group by case_id
  std::map<std::string, std::vector<const CaseRecord*>> by_case;
  std::set<std::string> methods;
  for (const auto& r : records) {
    by_case[r.case_id].push_back(&r);
    methods.insert(r.method);
  }
  const double inf = std::numeric_limits<double>::infinity();
  std::map<std::string, std::vector<double>> ratios;
  for (const auto& m : methods) {
    ratios[m] = {};
  }
  for (const auto& [cid, recs] : by_case) {
    double best = inf;
    for (const auto* r : recs) {
      if (solved(*r)) {
        best = std::min(best, metric(*r));
      }
    }
    for (const auto* r : recs) {
      double ratio = inf;
      if (solved(*r) && best > 0.0 && std::isfinite(best)) {
        ratio = metric(*r) / best;
      }
      ratios[r->method].push_back(ratio);
    }
  }
  std::set<double> tau_set{1.0};
  for (const auto& [m, rs] : ratios) {
    for (double r : rs) {
      if (std::isfinite(r)) {
        tau_set.insert(r);
      }
    }
  }
  PerfProfile profile;
  profile.taus.assign(tau_set.begin(), tau_set.end());
  for (const auto& [m, rs] : ratios) {
    std::vector<double> rho;
    rho.reserve(profile.taus.size());
    const double denom = rs.empty() ? 1.0 : static_cast<double>(rs.size());
    for (double tau : profile.taus) {
      int cnt = 0;
      for (double r : rs) {
        if (r <= tau) {
          ++cnt;
        }
      }
      rho.push_back(cnt / denom);
    }
    profile.rho_per_method[m] = std::move(rho);
  }
  return profile;
}

void cross_check_record(const DcProblem& p, const RunConfig& rc,
                        Method method, CaseRecord& rec) {
  auto fail = [&](const std::string& why) {
    rec.valid = false;
    if (!rec.invalid_reason.empty()) {
      rec.invalid_reason += "; ";
    }
    rec.invalid_reason += why;
  };
  const auto& tr = rec.trace;
  if (tr.empty()) {
    fail("empty trace");
    return;
  }
  const double f0 = tr.front().f_val;
  double fmin = f0;
  double sum_sq = 0.0;
  double eps = 0.0;
  switch (method) {
    case Method::rppm: eps = rc.rppm.eps_stop; break;
    case Method::adap: eps = rc.adap.eps_stop; break;
    case Method::dca: eps = rc.dca.eps_stop; break;
    case Method::dcppa: eps = rc.dcppa.eps_stop; break;
  }
  int large_steps = 0;
  double prev_lambda = 0.0;
  for (std::size_t i = 1; i < tr.size(); ++i) {
    const auto& r = tr[i];
    const double df = r.f_val - tr[i - 1].f_val;
    const double d2 = r.step_dist * r.step_dist;
    fmin = std::min(fmin, r.f_val);
    sum_sq += d2;
    if (r.step_dist > eps) {
      ++large_steps;
    }
    switch (method) {
      case Method::rppm: {
        const double L = p.lipschitz_L.value_or(0.0);
        if (df > -0.5 * (r.lambda_k - L) * d2 + 1e-9) {
          fail("R-PPM decrease inequality violated at k=" +
               std::to_string(r.k));
        }
        if (!(r.lambda_k > L) ||
            r.lambda_k > L + rc.rppm.alpha_margin ||
            (i > 1 && r.lambda_k < prev_lambda)) {
          fail("R-PPM lambda schedule out of bounds at k=" +
               std::to_string(r.k));
        }
        break;
      }
      case Method::adap: {
        const double slack = adap_accept_slack(tr[i - 1].f_val, r.f_val);
        if (r.step_dist > eps && df + 0.25 * r.lambda_k * d2 > slack) {
          fail("Adap-RPPM accepted-step inequality violated at k=" +
               std::to_string(r.k));
        }
        // lambda bound certified for L > 0 only: with L = 0 the theory
        // predicts zero doublings, which inexact subproblem solutions
        // cannot guarantee once the required decrease drops below the
        // f-evaluation noise
        if (p.lipschitz_L && *p.lipschitz_L > 0.0 &&
            r.lambda_k > 4.0 * *p.lipschitz_L + rc.adap.lambda0 + 1e-12) {
          fail("Adap-RPPM lambda exceeded 4L + lambda0 at k=" +
               std::to_string(r.k));
        }
        break;
      }
      case Method::dca:
      case Method::dcppa:
        if (df > 1e-9) {
          fail("monotone decrease violated at k=" + std::to_string(r.k));
        }
        break;
    }
    prev_lambda = r.lambda_k;
  }
  // Summability proxy (R-PPM): sum d^2 <= 2 (f0 - min f) / (lambda0 - L)
  if (method == Method::rppm && p.lipschitz_L) {
    const double alpha = tr.size() > 1
                             ? tr[1].lambda_k - *p.lipschitz_L
                             : rc.rppm.alpha_margin;
    if (alpha > 0.0 && sum_sq > 2.0 * (f0 - fmin) / alpha + 1e-9) {
      fail("summability bound violated");
    }
  }
  // Complexity caps, evaluated with f_low_hint when available.
  if (p.f_low_hint &&
      (method == Method::rppm || method == Method::adap)) {
    try {
      const double lambda0 =
          method == Method::rppm ? rc.rppm.lambda0 : rc.adap.lambda0;
      const double bound = complexity_bound(method, f0, *p.f_low_hint,
                                            lambda0, p.lipschitz_L, eps);
      if (static_cast<double>(large_steps) > bound) {
        fail("iteration count exceeds complexity bound");
      }
    } catch (const std::invalid_argument&) {
      // bound not applicable for this configuration
    }
  }
  if (rec.termination == "fixed_point" &&
      !(rec.criticality_residual < 1e-6)) {
    fail("fixed point with large criticality residual");
  }
}

std::vector<CaseRecord> run_lambda_sensitivity(const ExperimentConfig& cfg) {
  DcProblem p = make_f1(cfg.n, cfg.alpha, cfg.mu);
  SpdPoint x0 = scaled_identity_start(cfg.n);
  const int count = static_cast<int>(cfg.lambda0_grid.size());
  std::vector<CaseRecord> records(count);
  for_each_case(cfg.threads, count, [&](int i) {
    const double lam0 = cfg.lambda0_grid[i];
    RunConfig rc = build_run_config(cfg, lam0, 100);
    records[i] = execute_case(p, Method::adap, rc, x0,
                              "f1_lam" + std::to_string(i), lam0, cfg.seed);
  });
  maybe_emit(cfg, records, "lambda_sensitivity.csv");
  if (!cfg.output_dir.empty()) {
    // final lambda_k per run, next to the iteration counts (Table-1 style)
    std::ofstream out =
        open_out(cfg.output_dir + "/lambda_table.csv");
    out << "lambda0,lambda_final,iterations\n";
    for (const auto& r : records) {
      out << format_double(r.lambda0) << ","
          << format_double(r.trace.back().lambda_k) << "," << r.iterations
          << "\n";
    }
    const double f_star = p.eval_f(f1_critical_point(cfg.n, cfg.alpha, cfg.mu));
    std::vector<std::pair<std::string, std::vector<IterationRecord>>> traces;
    for (const auto& r : records) {
      traces.emplace_back("lambda0=" + format_double(r.lambda0), r.trace);
    }
    emit_convergence_svg(traces, f_star,
                         cfg.output_dir + "/f1_convergence.svg");
  }
  return records;
}

std::vector<CaseRecord> run_scaling(const ExperimentConfig& cfg) {
  const std::vector<Eigen::Index> grid = default_n_grid(cfg, true);
  const int count = static_cast<int>(grid.size());
  std::vector<CaseRecord> records(count);
  for_each_case(cfg.threads, count, [&](int i) {
    const Eigen::Index n = grid[i];
    DcProblem p = make_f2(n);
    RunConfig rc = build_run_config(cfg, 1e-4, 30000);
    records[i] = execute_case(p, Method::adap, rc, scaled_identity_start(n),
                              "f2_n" + std::to_string(n), 1e-4, cfg.seed);
  });
  maybe_emit(cfg, records, "scaling.csv");
  if (!cfg.output_dir.empty()) {
    std::ofstream out = open_out(cfg.output_dir + "/scaling_dims.csv");
    out << "case_id,n,manifold_dim,cpu_seconds\n";
    Series s;
    s.label = "adap";
    for (std::size_t i = 0; i < records.size(); ++i) {
      const Eigen::Index n = grid[i];
      const Eigen::Index dim = n * (n + 1) / 2;
      out << records[i].case_id << "," << n << "," << dim << ","
          << format_double(records[i].cpu_seconds) << "\n";
      s.points.emplace_back(static_cast<double>(dim),
                            records[i].cpu_seconds);
    }
    write_line_svg(cfg.output_dir + "/f2_dim_time.svg", {s},
                   "CPU time vs manifold dimension", false);
  }
  return records;
}

std::pair<std::vector<CaseRecord>, PerfProfile> run_comparison(
    const ExperimentConfig& cfg) {
  const std::vector<Eigen::Index> grid = default_n_grid(cfg, false);
  struct CaseSpec {
    Eigen::Index n;
    int start;
    int index;
  };
  std::vector<CaseSpec> specs;
  int idx = 0;
  for (Eigen::Index n : grid) {
    for (int s = 0; s < cfg.starts_per_case; ++s) {
      specs.push_back({n, s, idx++});
    }
  }
  const int nmethods = static_cast<int>(cfg.methods.size());
  std::vector<CaseRecord> records(specs.size() * nmethods);
  for_each_case(cfg.threads, static_cast<int>(specs.size()), [&](int i) {
    const CaseSpec& spec = specs[i];
    DcProblem p = make_f3(spec.n);
    const std::uint64_t case_seed =
        derive_seed(cfg.seed, static_cast<std::uint64_t>(spec.index));
    std::mt19937_64 rng(case_seed);
    SpdPoint x0 = random_point(spec.n, rng);
    const std::string cid =
        "f3_n" + std::to_string(spec.n) + "_s" + std::to_string(spec.start);
    RunConfig rc = build_run_config(cfg, 0.1, 100);
    for (int m = 0; m < nmethods; ++m) {
      records[static_cast<std::size_t>(i) * nmethods + m] = execute_case(
          p, cfg.methods[m], rc, x0, cid, 0.1, case_seed);
    }
  });

  const std::vector<double> dets = f3_stationary_dets();
  auto solved = [dets](const CaseRecord& r) {
    if (r.termination != "step_tol") {
      return false;
    }
    for (double d : dets) {
      if (std::abs(r.det_final - d) <= 1e-3) {
        return true;
      }
    }
    return false;
  };
  PerfProfile cpu_profile = make_performance_profile(
      records, [](const CaseRecord& r) { return r.cpu_seconds; }, solved);
  if (!cfg.output_dir.empty()) {
    maybe_emit(cfg, records, "comparison.csv");
    emit_profile_svg(cpu_profile, cfg.output_dir + "/profile_cpu.svg");
    PerfProfile it_profile = make_performance_profile(
        records,
        [](const CaseRecord& r) {
          return static_cast<double>(std::max(r.iterations, 1));
        },
        solved);
    emit_profile_svg(it_profile, cfg.output_dir + "/profile_iterations.svg");
  }
  return {records, cpu_profile};
}

CaseRecord run_single(const ExperimentConfig& cfg, Method method,
                      double lambda0) {
  DcProblem p = build_problem(cfg, cfg.n);
  SpdPoint x0 = [&] {
    if (cfg.problem == "f3") {
      std::mt19937_64 rng(derive_seed(cfg.seed, 0));
      return random_point(cfg.n, rng);
    }
    return scaled_identity_start(cfg.n);
  }();
  RunConfig rc = build_run_config(cfg, lambda0, 100);
  CaseRecord rec = execute_case(p, method, rc, x0,
                                cfg.problem + "_solve", lambda0, cfg.seed);
  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    emit_summary_csv({rec}, cfg.output_dir + "/solve.csv");
    emit_trace_csv(rec.trace, cfg.output_dir + "/trace_" + rec.case_id +
                                  ".csv");
  }
  return rec;
}

} // namespace rppm
