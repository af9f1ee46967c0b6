#pragma once

// Composite DC problems f = g1 + g2 - h on P^n_++ with Riemannian
// (sub)gradient evaluators, plus the built-in instances f1, f2, f3 and
// their closed-form stationary sets.

#include "rppm/manifold.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace rppm {

struct DcProblem {
  Eigen::Index n = 0;
  std::string name;

  std::function<double(const SpdPoint&)> eval_g1;
  std::function<double(const SpdPoint&)> eval_g2;
  std::function<double(const SpdPoint&)> eval_h;

  // rgrad_g1 powers the inner prox solver and the criticality check;
  // absent only when g1 is identically zero.
  std::function<TangentVector(const SpdPoint&)> rgrad_g1;
  std::function<TangentVector(const SpdPoint&)> rgrad_g2;
  std::function<TangentVector(const SpdPoint&)> subgrad_h;

  // g1 == 0 makes the proximal subproblem closed-form (x = z).
  bool g1_is_zero = false;
  bool g2_is_zero = false;

  std::optional<double> lipschitz_L; // gradient-Lipschitz modulus of g2
  std::optional<double> f_low_hint;  // lower bound, for complexity checks only

  double eval_f(const SpdPoint& x) const {
    return eval_g1(x) + eval_g2(x) - eval_h(x);
  }
};

struct F1Params {
  Eigen::Index n = 10;
  double alpha = 0.5;
  double mu = 0.01;
};

/// f1(X) = alpha tr(X) + tr(X^-1 A) + log det X - n - tr(BX)
/// with A = Diag(1..n), B = mu A; split g1 = alpha tr(X),
/// g2 = tr(X^-1 A) + log det X - n, h = tr(BX). L = 1.
DcProblem make_f1(Eigen::Index n, double alpha, double mu);

/// Unique critical point of f1: Diag(x_i*) with
/// x_i* = (-1 + sqrt(1 + 4(alpha - mu i) i)) / (2 (alpha - mu i)).
/// Throws std::invalid_argument naming the offending index when a
/// discriminant is negative or alpha == mu i.
SpdPoint f1_critical_point(Eigen::Index n, double alpha, double mu);

/// f2(X) = t^4/12 + t^3 - t with t = log det X;
/// split g1 = 0, g2 = t^4/12 + t^3, h = t.
DcProblem make_f2(Eigen::Index n);

/// Determinant values of the stationary set of f2: {e^{t*}} over the
/// real roots t* of t^3 + 9 t^2 - 3 = 0 (bisection, tol 1e-12).
std::vector<double> f2_stationary_dets();

/// f3(X) = t^4 - t^2 with t = log det X; split g1 = t^4, g2 = 0, h = t^2.
DcProblem make_f3(Eigen::Index n);

/// Determinant values of the stationary set of f3: {1, e^{sqrt(2)/2},
/// e^{-sqrt(2)/2}}.
std::vector<double> f3_stationary_dets();

/// Criticality residual ||rgrad g1 + rgrad g2 - subgrad h||_x for smooth
/// built-ins. Throws std::invalid_argument when the g1 gradient is missing.
double check_criticality(const DcProblem& p, const SpdPoint& x);

/// Real roots of a*t^3 + b*t^2 + c*t + d on [-bound, bound] by sign-change
/// bisection (test oracle support and f2 stationary set).
std::vector<double> cubic_real_roots(double a, double b, double c, double d,
                                     double bound = 1e3, double tol = 1e-12);

} // namespace rppm
