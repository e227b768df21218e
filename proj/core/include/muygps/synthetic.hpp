#pragma once

#include <cstddef>

#include "muygps/dataset.hpp"
#include "muygps/kernel.hpp"
#include "muygps/types.hpp"

namespace muygps {

struct SyntheticSpec {
  std::size_t n = 100;
  std::size_t dimension = 2;
  KernelParams params;
  Seed seed = 0;

  void validate() const;
};

struct SyntheticDraw {
  /// Uniform in [0, 1]^dimension.
  FeatureMatrix points;
  /// One draw of f ~ N(0, sigma2 * K).
  Vector latent;
  /// sign(latent), with 0 -> -1.
  Vector labels;
};

/// One draw of f ~ N(0, sigma2 * K) at the given points (1e-10 jitter).
Vector draw_latent(const FeatureMatrix& points, const KernelParams& p, Seed seed);

/// Samples the latent GP prior at uniformly drawn points. A 1e-10 jitter is
/// added to the covariance before factorization.
SyntheticDraw draw_gp(const SyntheticSpec& spec);

/// Class 0 for positive latent, class 1 otherwise.
Dataset to_dataset(const SyntheticDraw& draw);

}  // namespace muygps
