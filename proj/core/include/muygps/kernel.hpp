#pragma once

#include <Eigen/Cholesky>

#include "muygps/types.hpp"

namespace muygps {

/// Isotropic Matérn hyperparameters.
struct KernelParams {
  /// Smoothness; only 0.5, 1.5 and 2.5 have closed forms here.
  double nu = 1.5;
  double length_scale = 1.0;
  /// Homoscedastic noise variance added to training diagonals.
  double noise = 1e-5;
  /// Variance scale; multiplies the unit-variance correlation.
  double sigma2 = 1.0;

  void validate() const;
  /// Same parameters with sigma2 = 1.
  KernelParams unit_variance() const;

  friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

/// sigma2 * rho_nu(d / length_scale), with rho the standard Matérn correlation
/// using the sqrt(2 nu) distance scaling.
double matern(double distance, const KernelParams& p);

/// Entry (i, j) = matern(||a_i - b_j||). No noise.
Matrix cross_covariance(const FeatureMatrix& a, const FeatureMatrix& b, const KernelParams& p);

/// Applies matern() elementwise to a matrix of distances.
Matrix covariance_from_distances(const Matrix& distances, const KernelParams& p);

/// Cholesky factor of a covariance matrix together with the diagonal jitter
/// that had to be added to obtain it.
struct JitteredCholesky {
  Eigen::LLT<Matrix> llt;
  double jitter = 0.0;
};

/// Factorizes k. On failure adds 1e-8 * scale to the diagonal and escalates by
/// 10x up to 1e-4 * scale before throwing NumericalError.
JitteredCholesky factorize_with_jitter(Matrix k, double scale);

/// Noised Gram matrix K + noise * I, already factorized.
struct CovarianceMatrix {
  Matrix values;
  double jitter_applied = 0.0;
  Eigen::LLT<Matrix> factor;
};

CovarianceMatrix train_covariance(const FeatureMatrix& x, const KernelParams& p);

/// Euclidean distances between all row pairs of a and b.
Matrix pairwise_distances(const FeatureMatrix& a, const FeatureMatrix& b);

}  // namespace muygps
