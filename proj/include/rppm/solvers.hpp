#pragma once

// Proximal point methods for f = g1 + g2 - h on P^n_++:
// R-PPM (fixed lambda schedule, needs the Lipschitz modulus L of grad g2),
// Adap-RPPM (lambda doubling, no L), plus the DCA and DCPPA baselines and
// the shared inner proximal subproblem solver.

#include "rppm/manifold.hpp"
#include "rppm/problems.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace rppm {

enum class Method { rppm, adap, dca, dcppa };

Method method_from_string(const std::string& s);
std::string method_name(Method m);

enum class Termination {
  step_tol,
  fixed_point,
  max_outer,
  inner_failure,
  doubling_overflow,
};

std::string termination_name(Termination t);

struct InnerConfig {
  double grad_tol = 1e-10;
  // accept a stalled line search as converged below this gradient norm;
  // the Armijo decrease sigma*eta*|g|^2 underflows double precision well
  // before |g| reaches grad_tol
  double stall_grad_tol = 1e-6;
  int max_inner = 500;
  double armijo_beta = 0.5;
  double armijo_sigma = 1e-4;
  double init_step = 1.0; // effective initial step is init_step / lambda
};

enum class LambdaSchedule { constant, geometric };

struct RppmConfig {
  double lambda0 = 0.0; // 0 selects L + alpha_margin/2 at run start
  double alpha_margin = 1.0;
  LambdaSchedule schedule = LambdaSchedule::constant;
  double geometric_q = 0.5;
  double eps_stop = 1e-8;
  int max_outer = 100;
  InnerConfig inner;
};

struct AdapConfig {
  double lambda0 = 1e-4;
  double eps_stop = 1e-8;
  int max_outer = 100;
  double lambda_hard_cap = 1e12;
  InnerConfig inner;
};

struct DcaConfig {
  double eps_stop = 1e-8;
  int max_outer = 100;
  InnerConfig inner;
};

struct DcppaConfig {
  double lambda = 0.1;
  double eps_stop = 1e-8;
  int max_outer = 100;
  InnerConfig inner;
};

struct IterationRecord {
  int k = 0;
  double f_val = 0.0;
  double step_dist = 0.0;
  double lambda_k = 0.0;
  int inner_iters = 0;
  double cpu_seconds = 0.0;
};

struct SolverState {
  int k = 0;
  SpdPoint x;
  double lambda_k = 0.0;
  double f_val = 0.0;
  double step_dist = 0.0;
  int doubling_count = 0;
  int last_inner_iters = 0;
  std::vector<IterationRecord> trace;
};

class InnerFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DoublingOverflow : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct InnerResult {
  SpdPoint x;
  int iters = 0;
  bool converged = false;
  double grad_norm = 0.0;
};

/// Solve min_x g1(x) + (lambda/2) d^2(x, z). Closed form (x = z) when
/// g1 == 0; otherwise Riemannian gradient descent with Armijo
/// backtracking from warm_start. Throws InnerFailure when grad_tol is
/// not reached within max_inner iterations.
InnerResult inner_solve(const DcProblem& p, double lambda, const SpdPoint& z,
                        const InnerConfig& cfg, const SpdPoint& warm_start);

/// One R-PPM iteration: v = grad g2(x), w in dh(x),
/// z = exp_x((w - v)/lambda), x+ = argmin g1 + (lambda/2) d^2(., z).
/// Requires p.lipschitz_L; lambda follows cfg.schedule within
/// (L, L + alpha_margin].
SolverState rppm_step(const DcProblem& p, const SolverState& s,
                      const RppmConfig& cfg);

/// One Adap-RPPM iteration: trial prox steps at the current lambda,
/// doubling lambda until f(x+) - f(x) <= -(lambda/4) d^2(x+, x) or the
/// step distance falls to eps_stop. Numerically infeasible trials
/// (overflow leaving the manifold) count as rejections.
SolverState adap_step(const DcProblem& p, const SolverState& s,
                      const AdapConfig& cfg);

/// One DCPPA iteration: R-PPM with the smooth part folded into the inner
/// objective (v forced to zero) at fixed lambda.
SolverState dcppa_step(const DcProblem& p, const SolverState& s,
                       const DcppaConfig& cfg);

/// One DCA iteration: x+ minimizes g1 + g2 - [h(x) + <w, log_x(.)>].
SolverState dca_step(const DcProblem& p, const SolverState& s,
                     const DcaConfig& cfg);

/// Lambda value used by R-PPM at outer iteration k.
double rppm_lambda(const RppmConfig& cfg, double L, int k);

struct RunConfig {
  RppmConfig rppm;
  AdapConfig adap;
  DcaConfig dca;
  DcppaConfig dcppa;
};

struct RunRecord {
  Method method = Method::adap;
  int iterations = 0;
  double cpu_seconds = 0.0;
  double f_final = 0.0;
  Termination termination = Termination::max_outer;
  std::vector<IterationRecord> trace;
  Matrix x_final;
  int doubling_total = 0;
  std::string error; // nonempty when a step error terminated the run
};

/// Full solver run from x0; step errors terminate the run and are
/// recorded, never rethrown.
RunRecord run(const DcProblem& p, Method method, const RunConfig& cfg,
              const SpdPoint& x0);

/// Theoretical cap on the number of eps-large steps:
/// R-PPM   2 (f0 - f_low) / ((lambda0 - L) eps^2)
/// Adap    4 (f0 - f_low) / (lambda0 eps^2)
double complexity_bound(Method method, double f0, double f_low,
                        double lambda0, std::optional<double> L, double eps);

/// Absolute slack applied to Adap-RPPM's sufficient-decrease test: a few
/// ulps of the larger function value, below which the test cannot be
/// evaluated meaningfully in double precision. The same formula is used
/// when records are cross-checked after a run.
double adap_accept_slack(double fa, double fb);

} // namespace rppm
