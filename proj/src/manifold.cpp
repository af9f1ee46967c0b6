#include "rppm/manifold.hpp"

#include <cmath>
#include <utility>

namespace rppm {

namespace {

void check_symmetric(const Matrix& m, double sym_tol, const char* what) {
  if (m.rows() != m.cols()) {
    throw ManifoldError(std::string(what) + ": matrix is not square");
  }
  if (!m.allFinite()) {
    throw ManifoldError(std::string(what) + ": non-finite entries");
  }
  const double scale = std::max(1.0, m.norm());
  if ((m - m.transpose()).norm() > sym_tol * scale) {
    throw ManifoldError(std::string(what) + ": matrix is not symmetric");
  }
}

// Eigendecomposition with a per-eigenvalue scalar function applied.
Matrix apply_spectral(const Matrix& a, double (*fn)(double), bool need_pd,
                      double eig_floor, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym(a));
  if (es.info() != Eigen::Success) {
    throw ManifoldError(std::string(what) + ": eigendecomposition failed");
  }
  Eigen::VectorXd d = es.eigenvalues();
  if (need_pd && d.minCoeff() <= eig_floor) {
    throw ManifoldError(std::string(what) + ": matrix is not positive definite");
  }
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    d(i) = fn(d(i));
  }
  if (!d.allFinite()) {
    throw ManifoldError(std::string(what) + ": overflow in spectral function");
  }
  return sym(es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose());
}

double fn_sqrt(double x) { return std::sqrt(x); }
double fn_inv_sqrt(double x) { return 1.0 / std::sqrt(x); }
double fn_log(double x) { return std::log(x); }
double fn_exp(double x) { return std::exp(x); }

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace

Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Matrix spd_sqrt(const Matrix& a) {
  return apply_spectral(a, fn_sqrt, true, 0.0, "spd_sqrt");
}

Matrix spd_inv_sqrt(const Matrix& a) {
  return apply_spectral(a, fn_inv_sqrt, true, 0.0, "spd_inv_sqrt");
}

Matrix spd_logm(const Matrix& a) {
  return apply_spectral(a, fn_log, true, 0.0, "spd_logm");
}

Matrix spd_expm(const Matrix& a) {
  return apply_spectral(a, fn_exp, false, 0.0, "spd_expm");
}

Matrix logm_dir_adjoint(const Matrix& s, const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym(s));
  if (es.info() != Eigen::Success) {
    throw ManifoldError("logm_dir_adjoint: eigendecomposition failed");
  }
  const Eigen::VectorXd& d = es.eigenvalues();
  if (d.minCoeff() <= 0.0) {
    throw ManifoldError("logm_dir_adjoint: matrix is not positive definite");
  }
  const Matrix& u = es.eigenvectors();
  Matrix ht = u.transpose() * sym(h) * u;
  // Loewner matrix of divided differences of log.
  const Eigen::Index n = d.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double di = d(i), dj = d(j);
      double w;
      if (std::abs(di - dj) < 1e-12 * std::max(di, dj)) {
        w = 1.0 / (0.5 * (di + dj));
      } else {
        w = (std::log(di) - std::log(dj)) / (di - dj);
      }
      ht(i, j) *= w;
    }
  }
  return sym(u * ht * u.transpose());
}

SpdPoint::SpdPoint(const Matrix& m, const ManifoldConfig& cfg) {
  check_symmetric(m, cfg.sym_tol, "SpdPoint");
  mat_ = sym(m);
  Eigen::SelfAdjointEigenSolver<Matrix> es(mat_, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw ManifoldError("SpdPoint: eigendecomposition failed");
  }
  if (es.eigenvalues().minCoeff() <= cfg.eig_floor) {
    throw ManifoldError("SpdPoint: matrix is not positive definite");
  }
}

SpdPoint SpdPoint::identity(Eigen::Index n) {
  return SpdPoint(Matrix::Identity(n, n));
}

TangentVector::TangentVector(const SpdPoint& base, const Matrix& v,
                             const ManifoldConfig& cfg)
    : base_(base) {
  if (v.rows() != base.size() || v.cols() != base.size()) {
    throw ManifoldError("TangentVector: size mismatch with base point");
  }
  check_symmetric(v, cfg.sym_tol, "TangentVector");
  vec_ = sym(v);
}

TangentVector TangentVector::zero(const SpdPoint& base) {
  return TangentVector(base, Matrix::Zero(base.size(), base.size()));
}

namespace {
void require_same_base(const TangentVector& a, const TangentVector& b) {
  if (a.base().mat() != b.base().mat()) {
    throw ManifoldError("tangent vectors have different base points");
  }
}
} // namespace

TangentVector TangentVector::operator+(const TangentVector& o) const {
  require_same_base(*this, o);
  return TangentVector(base_, vec_ + o.vec_);
}

TangentVector TangentVector::operator-(const TangentVector& o) const {
  require_same_base(*this, o);
  return TangentVector(base_, vec_ - o.vec_);
}

TangentVector TangentVector::operator*(double s) const {
  return TangentVector(base_, s * vec_);
}

SpdPoint exp_map(const SpdPoint& x, const TangentVector& v) {
  if (v.base().mat() != x.mat()) {
    throw ManifoldError("exp_map: tangent vector based at a different point");
  }
  Matrix xs = spd_sqrt(x.mat());
  Matrix xis = spd_inv_sqrt(x.mat());
  Matrix inner = spd_expm(sym(xis * v.vec() * xis));
  return SpdPoint(sym(xs * inner * xs));
}

TangentVector log_map(const SpdPoint& x, const SpdPoint& y) {
  if (!x.same_size(y)) {
    throw ManifoldError("log_map: size mismatch");
  }
  Matrix xs = spd_sqrt(x.mat());
  Matrix xis = spd_inv_sqrt(x.mat());
  Matrix inner = spd_logm(sym(xis * y.mat() * xis));
  return TangentVector(x, sym(xs * inner * xs));
}

double distance(const SpdPoint& x, const SpdPoint& y) {
  if (!x.same_size(y)) {
    throw ManifoldError("distance: size mismatch");
  }
  Matrix xis = spd_inv_sqrt(x.mat());
  return spd_logm(sym(xis * y.mat() * xis)).norm();
}

double inner(const TangentVector& u, const TangentVector& v) {
  if (u.base().mat() != v.base().mat()) {
    throw ManifoldError("inner: tangent vectors have different base points");
  }
  Matrix xi = u.base().mat().llt().solve(Matrix::Identity(
      u.base().size(), u.base().size()));
  return (xi * u.vec() * xi * v.vec()).trace();
}

double norm(const TangentVector& v) { return std::sqrt(inner(v, v)); }

TangentVector parallel_transport(const TangentVector& u, const SpdPoint& to) {
  // E = (Y X^-1)^{1/2} = X^{1/2} (X^{-1/2} Y X^{-1/2})^{1/2} X^{-1/2}
  Matrix xs = spd_sqrt(u.base().mat());
  Matrix xis = spd_inv_sqrt(u.base().mat());
  Matrix e = xs * spd_sqrt(sym(xis * to.mat() * xis)) * xis;
  return TangentVector(to, sym(e * u.vec() * e.transpose()));
}

TangentVector grad_half_sq_dist(const SpdPoint& x, const SpdPoint& y) {
  return log_map(x, y) * -1.0;
}

TangentVector egrad_to_rgrad(const SpdPoint& x, const Matrix& euclid_grad) {
  return TangentVector(x, sym(x.mat() * sym(euclid_grad) * x.mat()));
}

SpdPoint random_point(Eigen::Index n, std::mt19937_64& rng,
                      const ManifoldConfig& cfg) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      a(i, j) = gauss(rng);
    }
  }
  return SpdPoint(spd_expm(0.5 * sym(a)), cfg);
}

TangentVector random_tangent(const SpdPoint& x, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::Index n = x.size();
  Matrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      a(i, j) = gauss(rng);
    }
  }
  return TangentVector(x, sym(a));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t case_id) {
  return splitmix64(splitmix64(seed) ^ case_id);
}

} // namespace rppm
