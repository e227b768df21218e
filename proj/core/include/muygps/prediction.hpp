#pragma once

#include <map>

namespace muygps {

/// Posterior summary for one test point.
///
/// For a single binary head `label` is the sign (+1/-1) of the mean; for a
/// combined classifier prediction it is the class id. `ambiguous_at` maps an
/// interval multiplier tau to whether the interval straddles the boundary.
struct LatentPrediction {
  double mean = 0.0;
  double variance = 0.0;
  int label = 0;
  std::map<double, bool> ambiguous_at;
};

}  // namespace muygps
