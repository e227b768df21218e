#include "muygps/kernel.hpp"

#include <cmath>
#include <string>

#include "muygps/error.hpp"

namespace muygps {

namespace {

enum class Smoothness { Half, ThreeHalves, FiveHalves };

Smoothness smoothness_of(double nu) {
  if (std::abs(nu - 0.5) < 1e-12) return Smoothness::Half;
  if (std::abs(nu - 1.5) < 1e-12) return Smoothness::ThreeHalves;
  if (std::abs(nu - 2.5) < 1e-12) return Smoothness::FiveHalves;
  throw InvalidArgument("matern: unsupported smoothness nu = " + std::to_string(nu) +
                        " (closed forms exist for 0.5, 1.5, 2.5)");
}

double correlation(double scaled, Smoothness s) {
  switch (s) {
    case Smoothness::Half:
      return std::exp(-scaled);
    case Smoothness::ThreeHalves: {
      const double a = std::sqrt(3.0) * scaled;
      return (1.0 + a) * std::exp(-a);
    }
    case Smoothness::FiveHalves: {
      const double a = std::sqrt(5.0) * scaled;
      return (1.0 + a + a * a / 3.0) * std::exp(-a);
    }
  }
  return 0.0;
}

}  // namespace

void KernelParams::validate() const {
  if (!(length_scale > 0.0) || !std::isfinite(length_scale))
    throw InvalidArgument("kernel: length scale must be positive");
  if (!(nu > 0.0)) throw InvalidArgument("kernel: nu must be positive");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw InvalidArgument("kernel: noise must be non-negative");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw InvalidArgument("kernel: sigma2 must be positive");
  smoothness_of(nu);
}

KernelParams KernelParams::unit_variance() const {
  KernelParams p = *this;
  p.sigma2 = 1.0;
  return p;
}

double matern(double distance, const KernelParams& p) {
  if (!(distance >= 0.0)) throw InvalidArgument("matern: distance must be non-negative");
  return p.sigma2 * correlation(distance / p.length_scale, smoothness_of(p.nu));
}

Matrix covariance_from_distances(const Matrix& distances, const KernelParams& p) {
  // Array form so Eigen can vectorize the exponentials.
  const double inv_l = 1.0 / p.length_scale;
  switch (smoothness_of(p.nu)) {
    case Smoothness::Half:
      return p.sigma2 * (distances.array() * -inv_l).exp();
    case Smoothness::ThreeHalves: {
      const Eigen::ArrayXXd a = distances.array() * (std::sqrt(3.0) * inv_l);
      return p.sigma2 * (1.0 + a) * (-a).exp();
    }
    case Smoothness::FiveHalves: {
      const Eigen::ArrayXXd a = distances.array() * (std::sqrt(5.0) * inv_l);
      return p.sigma2 * (1.0 + a + a.square() / 3.0) * (-a).exp();
    }
  }
  return {};
}

Matrix pairwise_distances(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.cols() != b.cols())
    throw InvalidArgument("distance: dimension mismatch (" + std::to_string(a.cols()) + " vs " +
                          std::to_string(b.cols()) + ")");
  Matrix d(a.rows(), b.rows());
  if (&a == &b) {
    // Mirror rather than recompute: with FMA contraction |a_i - a_j| and
    // |a_j - a_i| can differ in the last bit, and Gram matrices must be symmetric.
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      d(i, i) = 0.0;
      for (Eigen::Index j = 0; j < i; ++j) d(i, j) = d(j, i) = (a.row(i) - a.row(j)).norm();
    }
    return d;
  }
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j) d(i, j) = (a.row(i) - b.row(j)).norm();
  return d;
}

Matrix cross_covariance(const FeatureMatrix& a, const FeatureMatrix& b, const KernelParams& p) {
  p.validate();
  return covariance_from_distances(pairwise_distances(a, b), p);
}

JitteredCholesky factorize_with_jitter(Matrix k, double scale) {
  if (!k.allFinite()) throw NumericalError("cholesky: covariance has non-finite entries");
  JitteredCholesky out;
  out.llt.compute(k);
  if (out.llt.info() == Eigen::Success) return out;
  for (double jitter = 1e-8; jitter <= 1e-4 * (1.0 + 1e-9); jitter *= 10.0) {
    Matrix shifted = k;
    shifted.diagonal().array() += jitter * scale;
    out.llt.compute(shifted);
    if (out.llt.info() == Eigen::Success) {
      out.jitter = jitter * scale;
      return out;
    }
  }
  throw NumericalError("cholesky: matrix of order " + std::to_string(k.rows()) +
                       " not positive definite after jitter 1e-4 * sigma2");
}

CovarianceMatrix train_covariance(const FeatureMatrix& x, const KernelParams& p) {
  p.validate();
  if (x.rows() == 0) throw InvalidArgument("train_covariance: empty point set");
  CovarianceMatrix out;
  out.values = covariance_from_distances(pairwise_distances(x, x), p);
  // SIMD and scalar exp paths may differ by an ulp; keep the lower triangle,
  // which is what the factorization reads.
  out.values.triangularView<Eigen::StrictlyUpper>() = out.values.transpose();
  out.values.diagonal().array() += p.noise;
  auto fac = factorize_with_jitter(out.values, p.sigma2);
  out.jitter_applied = fac.jitter;
  if (fac.jitter > 0.0) out.values.diagonal().array() += fac.jitter;
  out.factor = std::move(fac.llt);
  return out;
}

}  // namespace muygps
