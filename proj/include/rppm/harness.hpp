#pragma once

// Experiment runner: lambda0 sensitivity on f1, dimension scaling on f2,
// multi-start solver comparison with performance profiles on f3. Cases are
// independent and run on an OpenMP worker pool when threads > 1; the
// per-case RNG is seeded from (seed, case_id) so parallel and serial
// execution produce identical records.

#include "rppm/problems.hpp"
#include "rppm/solvers.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace rppm {

struct ExperimentConfig {
  std::string problem = "f1";
  Eigen::Index n = 10;
  double alpha = 0.5;
  double mu = 0.01;
  std::vector<double> lambda0_grid = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  std::vector<Eigen::Index> n_grid;     // empty selects the desk-scale grid
  std::vector<Method> methods = {Method::adap, Method::dca, Method::dcppa};
  int starts_per_case = 10;
  std::uint64_t seed = 0;
  double eps_stop = 1e-8;
  // 0 picks the experiment default: 100 outer iterations everywhere except
  // the f2 scaling study, whose lambda settles far above the local curvature
  // during the transient and then needs many cheap iterations (30000).
  int max_outer = 0;
  std::string output_dir;               // empty disables file emission
  bool full = false;                    // paper-scale grids
  int threads = 1;
};

/// One benchmark case result; maps 1:1 onto a summary CSV row.
struct CaseRecord {
  std::string case_id;
  std::string method;
  Eigen::Index n = 0;
  double lambda0 = 0.0;
  std::uint64_t seed = 0;
  int iterations = 0;
  double cpu_seconds = 0.0;
  double f_final = 0.0;
  double det_final = 0.0;
  std::string termination;
  double criticality_residual = 0.0;
  bool valid = true;
  std::string invalid_reason;
  std::vector<IterationRecord> trace;
};

struct PerfProfile {
  std::vector<double> taus;
  std::map<std::string, std::vector<double>> rho_per_method;
};

std::vector<CaseRecord> run_lambda_sensitivity(const ExperimentConfig& cfg);
std::vector<CaseRecord> run_scaling(const ExperimentConfig& cfg);
std::pair<std::vector<CaseRecord>, PerfProfile> run_comparison(
    const ExperimentConfig& cfg);

/// Single solver run through the harness (CLI `solve`).
CaseRecord run_single(const ExperimentConfig& cfg, Method method,
                      double lambda0);

/// Dolan-More profile over the given per-case metric; unsolved cases get
/// ratio infinity and never enter rho at finite tau.
PerfProfile make_performance_profile(
    const std::vector<CaseRecord>& records,
    const std::function<double(const CaseRecord&)>& metric,
    const std::function<bool(const CaseRecord&)>& solved);

// Deterministic byte output given identical inputs; cpu_seconds columns
// are the documented nondeterministic exception.
void emit_summary_csv(const std::vector<CaseRecord>& records,
                      const std::string& path);
void emit_trace_csv(const std::vector<IterationRecord>& trace,
                    const std::string& path);
void emit_profile_svg(const PerfProfile& profile, const std::string& path);

/// |f(X^k) - f_star| against k, one polyline per labelled trace.
void emit_convergence_svg(
    const std::vector<std::pair<std::string, std::vector<IterationRecord>>>&
        traces,
    double f_star, const std::string& path);

/// Post-run solver invariant checks (monotone decrease, lambda bounds,
/// complexity caps); failures set valid = false with a reason.
void cross_check_record(const DcProblem& p, const RunConfig& rc,
                        Method method, CaseRecord& rec);

std::string format_double(double v);

} // namespace rppm
