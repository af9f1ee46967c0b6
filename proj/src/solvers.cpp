#include "rppm/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>

namespace rppm {

Method method_from_string(const std::string& s) {
  if (s == "rppm") return Method::rppm;
  if (s == "adap") return Method::adap;
  if (s == "dca") return Method::dca;
  if (s == "dcppa") return Method::dcppa;
  throw std::invalid_argument("unknown method: " + s);
}

std::string method_name(Method m) {
  switch (m) {
    case Method::rppm: return "rppm";
    case Method::adap: return "adap";
    case Method::dca: return "dca";
    case Method::dcppa: return "dcppa";
  }
  return "?";
}

std::string termination_name(Termination t) {
  switch (t) {
    case Termination::step_tol: return "step_tol";
    case Termination::fixed_point: return "fixed_point";
    case Termination::max_outer: return "max_outer";
    case Termination::inner_failure: return "inner_failure";
    case Termination::doubling_overflow: return "doubling_overflow";
  }
  return "?";
}

namespace {

using ValueFn = std::function<double(const SpdPoint&)>;
using GradFn = std::function<TangentVector(const SpdPoint&)>;

// Riemannian gradient descent with Barzilai-Borwein trial steps and Armijo
// backtracking. The BB step copes with the wide curvature spread of the
// proximal subproblems at small lambda, where a fixed 1/lambda step would
// need ~condition-number many iterations. Trial points that leave the
// manifold (overflow in exp) count as failed backtracks.
InnerResult minimize_gd(const ValueFn& value, const GradFn& grad,
                        const SpdPoint& start, const InnerConfig& cfg,
                        double lambda) {
  SpdPoint x = start;
  double fx = value(x);
  double gn = 0.0;
  // the smallest gradient whose Armijo decrease is still resolvable in
  // double precision scales like sqrt(ulp of the objective value)
  auto stall_tol = [&] {
    return std::max(cfg.stall_grad_tol,
                    64.0 * std::sqrt(std::numeric_limits<double>::epsilon() *
                                     std::max(1.0, std::abs(fx))));
  };
  double eta_bb = cfg.init_step / lambda;
  bool have_prev = false;
  TangentVector g_prev = TangentVector::zero(x);
  double eta_prev = 0.0;
  for (int it = 0; it <= cfg.max_inner; ++it) {
    TangentVector g = grad(x);
    gn = norm(g);
    if (gn <= cfg.grad_tol) {
      return {x, it, true, gn};
    }
    if (it == cfg.max_inner) {
      break;
    }
    if (have_prev) {
      // BB1 with the previous gradient transported to the current point:
      // s = -eta_prev * g_prev (at x_prev), y = g - transport(g_prev)
      TangentVector moved = parallel_transport(g_prev, x);
      double sy = eta_prev * (inner(moved, moved) - inner(g, moved));
      double ss = eta_prev * eta_prev * inner(moved, moved);
      if (std::isfinite(sy) && sy > 0.0 && std::isfinite(ss)) {
        eta_bb = ss / sy;
      }
      eta_bb = std::clamp(eta_bb, 1e-14, 1e14);
    }
    double eta = eta_bb;
    bool accepted = false;
    for (int bt = 0; bt < 120 && !accepted; ++bt) {
      try {
        SpdPoint xt = exp_map(x, g * (-eta));
        double ft = value(xt);
        if (std::isfinite(ft) &&
            ft <= fx - cfg.armijo_sigma * eta * gn * gn) {
          g_prev = g;
          eta_prev = eta;
          have_prev = true;
          x = xt;
          fx = ft;
          accepted = true;
        }
      } catch (const ManifoldError&) {
        // overflow; shrink the step
      }
      if (!accepted) {
        eta *= cfg.armijo_beta;
      }
    }
    if (!accepted) {
      // line search stalled; the iterate is as converged as the arithmetic
      // allows when the gradient is already small
      return {x, it, gn <= stall_tol(), gn};
    }
  }
  return {x, cfg.max_inner, gn <= stall_tol(), gn};
}

SpdPoint prox_anchor(const DcProblem& p, const SpdPoint& x, double lambda) {
  TangentVector v = p.rgrad_g2(x);
  TangentVector w = p.subgrad_h(x);
  return exp_map(x, (w - v) * (1.0 / lambda));
}

// Folds g2 into the nonsmooth slot so that the R-PPM step with v = 0 is
// exactly DCPPA on the split (g1 + g2, h).
DcProblem fold_smooth_part(const DcProblem& p) {
  DcProblem q = p;
  q.eval_g1 = [p](const SpdPoint& x) { return p.eval_g1(x) + p.eval_g2(x); };
  if (p.rgrad_g1) {
    q.rgrad_g1 = [p](const SpdPoint& x) {
      return p.rgrad_g1(x) + p.rgrad_g2(x);
    };
  } else {
    q.rgrad_g1 = p.rgrad_g2;
  }
  q.eval_g2 = [](const SpdPoint&) { return 0.0; };
  q.rgrad_g2 = [](const SpdPoint& x) { return TangentVector::zero(x); };
  q.g1_is_zero = p.g1_is_zero && p.g2_is_zero;
  q.g2_is_zero = true;
  return q;
}

} // namespace

InnerResult inner_solve(const DcProblem& p, double lambda, const SpdPoint& z,
                        const InnerConfig& cfg, const SpdPoint& warm_start) {
  if (p.g1_is_zero) {
    return {z, 0, true, 0.0};
  }
  if (!p.rgrad_g1) {
    throw std::invalid_argument("inner_solve: problem has no g1 gradient");
  }
  ValueFn value = [&](const SpdPoint& x) {
    double d = distance(x, z);
    return p.eval_g1(x) + 0.5 * lambda * d * d;
  };
  GradFn grad = [&](const SpdPoint& x) {
    return p.rgrad_g1(x) - log_map(x, z) * lambda;
  };
  return minimize_gd(value, grad, warm_start, cfg, lambda);
}

double rppm_lambda(const RppmConfig& cfg, double L, int k) {
  const double alpha = cfg.alpha_margin;
  if (cfg.schedule == LambdaSchedule::geometric &&
      alpha >= 1.0 / cfg.eps_stop) {
    const double inv_eps = 1.0 / cfg.eps_stop;
    return L + inv_eps +
           (alpha - inv_eps) * (1.0 - std::pow(cfg.geometric_q, k));
  }
  double lam = cfg.lambda0 > 0.0 ? cfg.lambda0 : L + 0.5 * alpha;
  if (lam <= L || lam > L + alpha) {
    throw std::invalid_argument(
        "rppm: lambda0 must lie in (L, L + alpha_margin]");
  }
  return lam;
}

SolverState rppm_step(const DcProblem& p, const SolverState& s,
                      const RppmConfig& cfg) {
  if (!p.lipschitz_L) {
    throw std::invalid_argument("rppm_step: problem has no Lipschitz constant");
  }
  const double lam = rppm_lambda(cfg, *p.lipschitz_L, s.k);
  SpdPoint z = prox_anchor(p, s.x, lam);
  InnerResult ir = inner_solve(p, lam, z, cfg.inner, s.x);
  if (!ir.converged) {
    throw InnerFailure("rppm_step: inner solver stalled at gradient norm " +
                       std::to_string(ir.grad_norm));
  }
  SolverState out = s;
  out.step_dist = distance(ir.x, s.x);
  out.x = ir.x;
  out.f_val = p.eval_f(ir.x);
  out.lambda_k = lam;
  out.last_inner_iters = ir.iters;
  out.k = s.k + 1;
  return out;
}

SolverState adap_step(const DcProblem& p, const SolverState& s,
                      const AdapConfig& cfg) {
  TangentVector v = p.rgrad_g2(s.x);
  TangentVector w = p.subgrad_h(s.x);
  double lam = s.lambda_k;
  int doublings = 0;
  for (;;) {
    bool reject = false;
    SpdPoint xplus = s.x;
    double fplus = s.f_val;
    double d = 0.0;
    int inner_iters = 0;
    try {
      SpdPoint z = exp_map(s.x, (w - v) * (1.0 / lam));
      InnerResult ir = inner_solve(p, lam, z, cfg.inner, s.x);
      if (!ir.converged) {
        // a stalled subproblem signals lambda below the local curvature;
        // doubling makes it better conditioned
        reject = true;
      } else {
        xplus = ir.x;
        inner_iters = ir.iters;
        d = distance(xplus, s.x);
        fplus = p.eval_f(xplus);
        if (!std::isfinite(fplus)) {
          reject = true;
        } else if (d > cfg.eps_stop &&
                   fplus - s.f_val + 0.25 * lam * d * d >
                       adap_accept_slack(s.f_val, fplus)) {
          reject = true; // sufficient-decrease test failed
        }
      }
    } catch (const ManifoldError&) {
      reject = true; // trial left the manifold; lambda too small
    }
    if (!reject) {
      SolverState out = s;
      out.step_dist = d;
      out.x = xplus;
      out.f_val = fplus;
      out.lambda_k = lam;
      out.doubling_count = s.doubling_count + doublings;
      out.last_inner_iters = inner_iters;
      out.k = s.k + 1;
      return out;
    }
    lam *= 2.0;
    ++doublings;
    if (lam > cfg.lambda_hard_cap) {
      throw DoublingOverflow(
          "adap_step: lambda exceeded the hard cap; grad g2 appears "
          "non-Lipschitz on the visited region");
    }
  }
}

SolverState dcppa_step(const DcProblem& p, const SolverState& s,
                       const DcppaConfig& cfg) {
  DcProblem q = fold_smooth_part(p);
  TangentVector w = q.subgrad_h(s.x); // v = grad g2 = 0 after folding
  SpdPoint z = exp_map(s.x, w * (1.0 / cfg.lambda));
  InnerResult ir = inner_solve(q, cfg.lambda, z, cfg.inner, s.x);
  if (!ir.converged) {
    throw InnerFailure("dcppa_step: inner solver stalled at gradient norm " +
                       std::to_string(ir.grad_norm));
  }
  SolverState out = s;
  out.step_dist = distance(ir.x, s.x);
  out.x = ir.x;
  out.f_val = p.eval_f(ir.x);
  out.lambda_k = cfg.lambda;
  out.last_inner_iters = ir.iters;
  out.k = s.k + 1;
  return out;
}

SolverState dca_step(const DcProblem& p, const SolverState& s,
                     const DcaConfig& cfg) {
  const SpdPoint xk = s.x;
  TangentVector w = p.subgrad_h(xk);
  const double h_at_xk = p.eval_h(xk);
  const Matrix c = spd_inv_sqrt(xk.mat());
  const Matrix w_tilde = sym(c * w.vec() * c);

  // phi(y) = g1(y) + g2(y) - [h(x^k) + <w, log_{x^k}(y)>]
  ValueFn value = [&](const SpdPoint& y) {
    double lin = h_at_xk + inner(w, log_map(xk, y));
    return p.eval_g1(y) + p.eval_g2(y) - lin;
  };
  GradFn grad = [&](const SpdPoint& y) {
    TangentVector g = p.rgrad_g2(y);
    if (p.rgrad_g1) {
      g = g + p.rgrad_g1(y);
    }
    // Euclidean gradient of y -> <w, log_{x^k}(y)> via the adjoint of the
    // Frechet derivative of logm.
    Matrix sm = sym(c * y.mat() * c);
    Matrix egrad_lin = sym(c * logm_dir_adjoint(sm, w_tilde) * c);
    return g - egrad_to_rgrad(y, egrad_lin);
  };

  InnerResult ir = minimize_gd(value, grad, xk, cfg.inner, 1.0);
  if (!ir.converged) {
    throw InnerFailure("dca_step: inner solver stalled at gradient norm " +
                       std::to_string(ir.grad_norm));
  }
  SolverState out = s;
  out.step_dist = distance(ir.x, s.x);
  out.x = ir.x;
  out.f_val = p.eval_f(ir.x);
  out.last_inner_iters = ir.iters;
  out.k = s.k + 1;
  return out;
}

RunRecord run(const DcProblem& p, Method method, const RunConfig& cfg,
              const SpdPoint& x0) {
  double eps_stop = 0.0;
  int max_outer = 0;
  double lambda_init = 0.0;
  switch (method) {
    case Method::rppm:
      eps_stop = cfg.rppm.eps_stop;
      max_outer = cfg.rppm.max_outer;
      if (!p.lipschitz_L) {
        throw std::invalid_argument("run: R-PPM needs lipschitz_L");
      }
      lambda_init = rppm_lambda(cfg.rppm, *p.lipschitz_L, 0);
      break;
    case Method::adap:
      eps_stop = cfg.adap.eps_stop;
      max_outer = cfg.adap.max_outer;
      lambda_init = cfg.adap.lambda0;
      if (lambda_init <= 0.0) {
        throw std::invalid_argument("run: Adap-RPPM needs lambda0 > 0");
      }
      break;
    case Method::dca:
      eps_stop = cfg.dca.eps_stop;
      max_outer = cfg.dca.max_outer;
      break;
    case Method::dcppa:
      eps_stop = cfg.dcppa.eps_stop;
      max_outer = cfg.dcppa.max_outer;
      lambda_init = cfg.dcppa.lambda;
      break;
  }

  RunRecord rec;
  rec.method = method;
  rec.termination = Termination::max_outer;

  SolverState s{0, x0, lambda_init, p.eval_f(x0), 0.0, 0, 0, {}};
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         t0)
        .count();
  };
  s.trace.push_back({0, s.f_val, 0.0, s.lambda_k, 0, 0.0});

  while (s.k < max_outer) {
    try {
      switch (method) {
        case Method::rppm: s = rppm_step(p, s, cfg.rppm); break;
        case Method::adap: s = adap_step(p, s, cfg.adap); break;
        case Method::dca: s = dca_step(p, s, cfg.dca); break;
        case Method::dcppa: s = dcppa_step(p, s, cfg.dcppa); break;
      }
    } catch (const InnerFailure& e) {
      rec.termination = Termination::inner_failure;
      rec.error = e.what();
      break;
    } catch (const DoublingOverflow& e) {
      rec.termination = Termination::doubling_overflow;
      rec.error = e.what();
      break;
    } catch (const ManifoldError& e) {
      rec.termination = Termination::inner_failure;
      rec.error = e.what();
      break;
    }
    s.trace.push_back(
        {s.k, s.f_val, s.step_dist, s.lambda_k, s.last_inner_iters,
         elapsed()});
    if (method == Method::adap) {
      if (s.step_dist <= eps_stop) {
        rec.termination = Termination::step_tol;
        break;
      }
    } else {
      if (s.step_dist == 0.0) {
        rec.termination = Termination::fixed_point;
        break;
      }
      if (s.step_dist < eps_stop) {
        rec.termination = Termination::step_tol;
        break;
      }
    }
  }

  rec.trace = std::move(s.trace);
  rec.iterations = s.k;
  rec.cpu_seconds = elapsed();
  rec.f_final = s.f_val;
  rec.x_final = s.x.mat();
  rec.doubling_total = s.doubling_count;
  return rec;
}

double complexity_bound(Method method, double f0, double f_low,
                        double lambda0, std::optional<double> L, double eps) {
  if (eps <= 0.0) {
    throw std::invalid_argument("complexity_bound: eps must be positive");
  }
  const double gap = std::max(0.0, f0 - f_low);
  switch (method) {
    case Method::rppm:
      if (!L) {
        throw std::invalid_argument("complexity_bound: R-PPM needs L");
      }
      if (lambda0 <= *L) {
        throw std::invalid_argument("complexity_bound: need lambda0 > L");
      }
      return 2.0 * gap / ((lambda0 - *L) * eps * eps);
    case Method::adap:
      if (lambda0 <= 0.0) {
        throw std::invalid_argument("complexity_bound: need lambda0 > 0");
      }
      return 4.0 * gap / (lambda0 * eps * eps);
    default:
      throw std::invalid_argument(
          "complexity_bound: no bound for this method");
  }
}

double adap_accept_slack(double fa, double fb) {
  return 32.0 * std::numeric_limits<double>::epsilon() *
         std::max({1.0, std::abs(fa), std::abs(fb)});
}

} // namespace rppm
