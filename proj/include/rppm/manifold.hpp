#pragma once

// Geometric kernel for the SPD manifold P^n_++ with the affine-invariant
// metric <U,V>_X = tr(X^-1 U X^-1 V). Under this metric P^n_++ is a
// Hadamard manifold and exp/log/transport have closed forms through the
// symmetric eigendecomposition.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>

namespace rppm {

using Matrix = Eigen::MatrixXd;

struct ManifoldConfig {
  double sym_tol = 1e-12;   // relative Frobenius asymmetry allowed on input
  double eig_floor = 1e-14; // smallest eigenvalue accepted as positive
};

/// Thrown when an input leaves the manifold (asymmetry, nonpositive
/// eigenvalues, non-finite entries).
class ManifoldError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Symmetrize as (M + M^T)/2.
Matrix sym(const Matrix& m);

// Symmetric-matrix function toolbox (eigendecomposition based).
// sqrt/inv_sqrt/logm require a positive definite argument.
Matrix spd_sqrt(const Matrix& a);
Matrix spd_inv_sqrt(const Matrix& a);
Matrix spd_logm(const Matrix& a);
Matrix spd_expm(const Matrix& a);

/// Directional (Frechet) derivative adjoint of logm at the SPD matrix s,
/// applied to the symmetric matrix h, via the Daleckii-Krein formula.
Matrix logm_dir_adjoint(const Matrix& s, const Matrix& h);

/// A point on P^n_++. The stored matrix is exactly symmetrized; the
/// constructor rejects asymmetric or non-positive-definite input.
class SpdPoint {
public:
  explicit SpdPoint(const Matrix& m, const ManifoldConfig& cfg = {});

  static SpdPoint identity(Eigen::Index n);

  const Matrix& mat() const { return mat_; }
  Eigen::Index size() const { return mat_.rows(); }

  bool same_size(const SpdPoint& other) const {
    return size() == other.size();
  }

private:
  Matrix mat_;
};

/// A tangent vector: a symmetric matrix carried with its base point.
class TangentVector {
public:
  TangentVector(const SpdPoint& base, const Matrix& v,
                const ManifoldConfig& cfg = {});

  static TangentVector zero(const SpdPoint& base);

  const SpdPoint& base() const { return base_; }
  const Matrix& vec() const { return vec_; }

  TangentVector operator+(const TangentVector& o) const;
  TangentVector operator-(const TangentVector& o) const;
  TangentVector operator*(double s) const;

private:
  SpdPoint base_;
  Matrix vec_;
};

// Core manifold operations (affine-invariant metric).

/// exp_X(V) = X^{1/2} expm(X^{-1/2} V X^{-1/2}) X^{1/2}
SpdPoint exp_map(const SpdPoint& x, const TangentVector& v);

/// log_X(Y) = X^{1/2} logm(X^{-1/2} Y X^{-1/2}) X^{1/2}
TangentVector log_map(const SpdPoint& x, const SpdPoint& y);

/// d(X,Y) = ||logm(X^{-1/2} Y X^{-1/2})||_F
double distance(const SpdPoint& x, const SpdPoint& y);

/// <U,V>_X = tr(X^-1 U X^-1 V); bases must coincide.
double inner(const TangentVector& u, const TangentVector& v);

double norm(const TangentVector& v);

/// Parallel transport along the geodesic from u.base to `to`:
/// E = (Y X^-1)^{1/2}, U -> E U E^T.
TangentVector parallel_transport(const TangentVector& u, const SpdPoint& to);

/// Gradient of x -> (1/2) d^2(x, y): equals -log_map(x, y).
TangentVector grad_half_sq_dist(const SpdPoint& x, const SpdPoint& y);

/// Euclidean-to-Riemannian gradient conversion: G -> X sym(G) X.
TangentVector egrad_to_rgrad(const SpdPoint& x, const Matrix& euclid_grad);

// Seeded random generation. RNG state is owned by the caller.
SpdPoint random_point(Eigen::Index n, std::mt19937_64& rng,
                      const ManifoldConfig& cfg = {});
TangentVector random_tangent(const SpdPoint& x, std::mt19937_64& rng);

/// Deterministic per-case seed derivation (splitmix64 combine).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t case_id);

} // namespace rppm
