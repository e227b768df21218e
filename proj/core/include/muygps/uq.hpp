#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "muygps/muygps.hpp"
#include "muygps/prediction.hpp"

namespace muygps {

/// Interval half-width multipliers and their nominal confidence levels.
struct TauGrid {
  std::vector<double> taus;
  std::vector<double> confidences;

  /// {0.994, 1.28, 1.64, 1.96, 2.58} <-> {68, 80, 90, 95, 99} %.
  static TauGrid standard();
  /// Confidence of each tau from the two-sided normal quantile.
  static TauGrid from_taus(std::vector<double> taus);

  void validate() const;
  std::size_t size() const { return taus.size(); }
};

/// True iff boundary lies in the closed interval mean +- tau * sqrt(variance).
bool flag_ambiguous(double mean, double variance, double tau, double boundary = 0.0);
bool flag_ambiguous(const LatentPrediction& pred, double tau, double boundary = 0.0);

/// Same closed-interval rule with boundary 0.5, for probability outputs.
bool probabilistic_ambiguity(double mean_prob, double var_prob, double tau);

/// Fills ambiguous_at for every tau of the grid.
void annotate_ambiguity(std::span<LatentPrediction> preds, const TauGrid& grid, double boundary = 0.0);

/// Entry j is true iff point j is ambiguous for at least one class head.
std::vector<bool> ova_uncertain_union(const std::vector<std::vector<LatentPrediction>>& per_class, double tau);

struct CalibrationPoint {
  double sigma2 = 0.0;
  double alpha = 0.0;
  double one_minus_beta = 0.0;
  double objective() const { return alpha + one_minus_beta; }
};

struct CalibrationResult {
  double sigma2 = 1.0;
  /// Confident-but-wrong fraction.
  double alpha = 0.0;
  /// Ambiguous-but-correct fraction.
  double one_minus_beta = 0.0;
  double objective = 0.0;
  std::size_t n = 0;
  double tau = 0.0;
  std::vector<CalibrationPoint> grid;
};

/// 25 log-spaced multiples of unit_scale over [1e-2, 1e2].
std::vector<double> calibration_grid(double unit_scale, std::size_t points = 25, double lo = 1e-2, double hi = 1e2);

/// Scale that makes the mean scaled variance equal 1 (the prior variance).
double unit_variance_scale(std::span<const double> unit_variances);

/// Grid search minimizing alpha + (1 - beta), ties to the smallest scale.
///
/// means/unit_variances are predictions at sigma2 = 1; `correct[i]` says
/// whether the hard decision for point i matches the truth.
CalibrationResult calibrate_sigma2(std::span<const double> means, std::span<const double> unit_variances,
                                   std::span<const bool> correct, double tau, std::span<const double> scale_grid);

/// Predicts the holdout with `model` and calibrates its variance scale.
/// truth_signs holds +1/-1 for the model's binary target.
CalibrationResult calibrate_sigma2(const MuyGpsModel& model, const FeatureMatrix& holdout,
                                   std::span<const double> truth_signs, double tau,
                                   std::span<const double> scale_grid);

/// Leave-one-out variant over training rows of the model itself, so no
/// training data has to be held back.
CalibrationResult calibrate_sigma2_loo(const MuyGpsModel& model, std::span<const std::size_t> rows, double tau,
                                       std::span<const double> scale_grid);

}  // namespace muygps
