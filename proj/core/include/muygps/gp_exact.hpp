#pragma once

#include <cstddef>
#include <vector>

#include "muygps/kernel.hpp"
#include "muygps/types.hpp"

namespace muygps {

/// Largest training set the dense solver accepts.
inline constexpr std::size_t kGpMaxTrain = 20000;

/// Posterior of the full GP at the test points.
struct GpPosterior {
  Vector mean;
  /// sigma2 * diag(C), floored at 1e-12.
  Vector variance;
  double jitter_applied = 0.0;
};

/// Full GP regression on the given targets (for classification, +1/-1 labels).
///
/// One Cholesky factor of K_ff + noise * I serves both the mean
/// K_*f (K_ff + noise I)^-1 z and the variance
/// sigma2 * (K_** - K_*f (K_ff + noise I)^-1 K_f*), using the unit-variance
/// kernel inside. Test points are processed in column blocks.
GpPosterior gp_fit_predict(const FeatureMatrix& train, const Vector& targets, const FeatureMatrix& test,
                           const KernelParams& p);

/// +1 where mean > 0, otherwise -1 (an exact zero goes to -1).
std::vector<int> classify(const GpPosterior& posterior);

}  // namespace muygps
