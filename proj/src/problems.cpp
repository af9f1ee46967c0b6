#include "rppm/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace rppm {

namespace {

double log_det(const SpdPoint& x) {
  Eigen::LLT<Matrix> llt(x.mat());
  if (llt.info() != Eigen::Success) {
    throw ManifoldError("log_det: Cholesky factorization failed");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Matrix diag_1_to_n(Eigen::Index n) {
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i) = static_cast<double>(i + 1);
  }
  return d.asDiagonal();
}

} // namespace

std::vector<double> cubic_real_roots(double a, double b, double c, double d,
                                     double bound, double tol) {
  auto poly = [&](double t) { return ((a * t + b) * t + c) * t + d; };
  std::vector<double> roots;
  const int grid = 200000;
  double prev_t = -bound;
  double prev_v = poly(prev_t);
  for (int i = 1; i <= grid; ++i) {
    double t = -bound + 2.0 * bound * i / grid;
    double v = poly(t);
    if (prev_v == 0.0) {
      roots.push_back(prev_t);
    } else if (prev_v * v < 0.0) {
      double lo = prev_t, hi = t;
      double flo = prev_v;
      while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        double fm = poly(mid);
        if (flo * fm <= 0.0) {
          hi = mid;
        } else {
          lo = mid;
          flo = fm;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_t = t;
    prev_v = v;
  }
  return roots;
}

DcProblem make_f1(Eigen::Index n, double alpha, double mu) {
  if (n < 1) {
    throw std::invalid_argument("make_f1: n must be >= 1");
  }
  if (alpha <= 0.0 || alpha >= 1.0) {
    throw std::invalid_argument("make_f1: alpha must lie in (0,1)");
  }
  if (mu <= 0.0) {
    throw std::invalid_argument("make_f1: mu must be positive");
  }
  Matrix a = diag_1_to_n(n);
  Matrix b = mu * a;
  const double nd = static_cast<double>(n);

  DcProblem p;
  p.n = n;
  p.name = "f1";
  p.eval_g1 = [alpha](const SpdPoint& x) { return alpha * x.mat().trace(); };
  p.eval_g2 = [a, nd](const SpdPoint& x) {
    Eigen::LLT<Matrix> llt(x.mat());
    if (llt.info() != Eigen::Success) {
      throw ManifoldError("f1: Cholesky factorization failed");
    }
    double ld = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return llt.solve(a).trace() + ld - nd;
  };
  p.eval_h = [b](const SpdPoint& x) { return (b * x.mat()).trace(); };
  p.rgrad_g1 = [alpha](const SpdPoint& x) {
    return TangentVector(x, alpha * (x.mat() * x.mat()));
  };
  p.rgrad_g2 = [a](const SpdPoint& x) {
    return TangentVector(x, x.mat() - a);
  };
  p.subgrad_h = [b](const SpdPoint& x) {
    return TangentVector(x, sym(x.mat() * b * x.mat()));
  };
  p.lipschitz_L = 1.0;
  p.f_low_hint = p.eval_f(f1_critical_point(n, alpha, mu));
  return p;
}

SpdPoint f1_critical_point(Eigen::Index n, double alpha, double mu) {
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 1; i <= n; ++i) {
    const double c = alpha - mu * static_cast<double>(i);
    const double disc = 1.0 + 4.0 * c * static_cast<double>(i);
    if (disc < 0.0) {
      throw std::invalid_argument(
          "f1_critical_point: negative discriminant at index i=" +
          std::to_string(i) + " (infeasible alpha, mu)");
    }
    if (c == 0.0) {
      // (alpha - mu i) x^2 + x - i = 0 degenerates to x = i.
      d(i - 1) = static_cast<double>(i);
    } else {
      d(i - 1) = (-1.0 + std::sqrt(disc)) / (2.0 * c);
    }
    if (d(i - 1) <= 0.0) {
      throw std::invalid_argument(
          "f1_critical_point: nonpositive entry at index i=" +
          std::to_string(i));
    }
  }
  return SpdPoint(Matrix(d.asDiagonal()));
}

DcProblem make_f2(Eigen::Index n) {
  if (n < 1) {
    throw std::invalid_argument("make_f2: n must be >= 1");
  }
  DcProblem p;
  p.n = n;
  p.name = "f2";
  p.eval_g1 = [](const SpdPoint&) { return 0.0; };
  p.eval_g2 = [](const SpdPoint& x) {
    double t = log_det(x);
    return t * t * t * t / 12.0 + t * t * t;
  };
  p.eval_h = [](const SpdPoint& x) { return log_det(x); };
  p.rgrad_g2 = [](const SpdPoint& x) {
    double t = log_det(x);
    return TangentVector(x, (t * t * t / 3.0 + 3.0 * t * t) * x.mat());
  };
  p.subgrad_h = [](const SpdPoint& x) { return TangentVector(x, x.mat()); };
  p.g1_is_zero = true;
  // Scalar profile t^4/12 + t^3 - t is bounded below; minimum over the
  // stationary t values of the profile.
  double fmin = 0.0;
  for (double t : cubic_real_roots(1.0, 9.0, 0.0, -3.0, 20.0)) {
    double v = t * t * t * t / 12.0 + t * t * t - t;
    fmin = std::min(fmin, v);
  }
  p.f_low_hint = fmin;
  return p;
}

std::vector<double> f2_stationary_dets() {
  std::vector<double> dets;
  for (double t : cubic_real_roots(1.0, 9.0, 0.0, -3.0, 20.0)) {
    dets.push_back(std::exp(t));
  }
  return dets;
}

DcProblem make_f3(Eigen::Index n) {
  if (n < 1) {
    throw std::invalid_argument("make_f3: n must be >= 1");
  }
  DcProblem p;
  p.n = n;
  p.name = "f3";
  p.eval_g1 = [](const SpdPoint& x) {
    double t = log_det(x);
    return t * t * t * t;
  };
  p.eval_g2 = [](const SpdPoint&) { return 0.0; };
  p.eval_h = [](const SpdPoint& x) {
    double t = log_det(x);
    return t * t;
  };
  p.rgrad_g1 = [](const SpdPoint& x) {
    double t = log_det(x);
    return TangentVector(x, 4.0 * t * t * t * x.mat());
  };
  p.rgrad_g2 = [](const SpdPoint& x) { return TangentVector::zero(x); };
  p.subgrad_h = [](const SpdPoint& x) {
    double t = log_det(x);
    return TangentVector(x, 2.0 * t * x.mat());
  };
  p.g2_is_zero = true;
  p.lipschitz_L = 0.0;
  p.f_low_hint = -0.25; // min of t^4 - t^2 at t = +-1/sqrt(2)
  return p;
}

std::vector<double> f3_stationary_dets() {
  const double s = std::sqrt(2.0) / 2.0;
  return {1.0, std::exp(s), std::exp(-s)};
}

double check_criticality(const DcProblem& p, const SpdPoint& x) {
  if (!p.rgrad_g1 && !p.g1_is_zero) {
    throw std::invalid_argument(
        "check_criticality: problem has no g1 gradient");
  }
  TangentVector r = p.rgrad_g2(x) - p.subgrad_h(x);
  if (p.rgrad_g1) {
    r = r + p.rgrad_g1(x);
  }
  return norm(r);
}

} // namespace rppm
