#include "muygps/uq.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <string>

#include "muygps/error.hpp"
#include "muygps/parallel.hpp"

namespace muygps {

namespace {
constexpr double kVarianceFloor = 1e-12;

bool interval_contains(double center, double variance, double tau, double boundary) {
  const double half = tau * std::sqrt(std::max(variance, 0.0));
  return center - half <= boundary && boundary <= center + half;
}
}  // namespace

TauGrid TauGrid::standard() {
  return TauGrid{{0.994, 1.28, 1.64, 1.96, 2.58}, {0.68, 0.80, 0.90, 0.95, 0.99}};
}

TauGrid TauGrid::from_taus(std::vector<double> taus) {
  TauGrid grid;
  for (double t : taus) grid.confidences.push_back(std::erf(t / std::sqrt(2.0)));
  grid.taus = std::move(taus);
  grid.validate();
  return grid;
}

void TauGrid::validate() const {
  if (taus.empty()) throw InvalidArgument("tau grid: empty");
  if (taus.size() != confidences.size()) throw InvalidArgument("tau grid: taus and confidences differ in length");
  for (std::size_t i = 0; i < taus.size(); ++i) {
    if (!(taus[i] > 0.0)) throw InvalidArgument("tau grid: tau must be positive");
    if (i > 0 && !(taus[i] > taus[i - 1] && confidences[i] > confidences[i - 1]))
      throw InvalidArgument("tau grid: values must be strictly increasing");
  }
}

bool flag_ambiguous(double mean, double variance, double tau, double boundary) {
  if (!(tau > 0.0)) throw InvalidArgument("flag_ambiguous: tau must be positive");
  return interval_contains(mean, variance, tau, boundary);
}

bool flag_ambiguous(const LatentPrediction& pred, double tau, double boundary) {
  return flag_ambiguous(pred.mean, pred.variance, tau, boundary);
}

bool probabilistic_ambiguity(double mean_prob, double var_prob, double tau) {
  if (!(mean_prob >= 0.0 && mean_prob <= 1.0)) throw InvalidArgument("probabilistic_ambiguity: mean outside [0, 1]");
  if (!(var_prob >= 0.0)) throw InvalidArgument("probabilistic_ambiguity: negative variance");
  return flag_ambiguous(mean_prob, var_prob, tau, 0.5);
}

void annotate_ambiguity(std::span<LatentPrediction> preds, const TauGrid& grid, double boundary) {
  grid.validate();
  for (auto& p : preds)
    for (double tau : grid.taus) p.ambiguous_at[tau] = flag_ambiguous(p, tau, boundary);
}

std::vector<bool> ova_uncertain_union(const std::vector<std::vector<LatentPrediction>>& per_class, double tau) {
  if (per_class.empty()) throw InvalidArgument("ova_uncertain_union: no class predictions");
  const std::size_t m = per_class.front().size();
  for (const auto& preds : per_class)
    if (preds.size() != m) throw InvalidArgument("ova_uncertain_union: prediction lists differ in length");
  std::vector<bool> uncertain(m, false);
  for (const auto& preds : per_class)
    for (std::size_t j = 0; j < m; ++j)
      if (flag_ambiguous(preds[j], tau)) uncertain[j] = true;
  return uncertain;
}

std::vector<double> calibration_grid(double unit_scale, std::size_t points, double lo, double hi) {
  if (!(unit_scale > 0.0) || !(lo > 0.0 && lo <= hi) || points == 0)
    throw InvalidArgument("calibration_grid: invalid range");
  std::vector<double> grid(points);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
    grid[i] = unit_scale * std::pow(10.0, a + t * (b - a));
  }
  return grid;
}

double unit_variance_scale(std::span<const double> unit_variances) {
  if (unit_variances.empty()) throw InvalidArgument("unit_variance_scale: no variances");
  double sum = 0.0;
  for (double v : unit_variances) sum += std::max(v, kVarianceFloor);
  return static_cast<double>(unit_variances.size()) / sum;
}

CalibrationResult calibrate_sigma2(std::span<const double> means, std::span<const double> unit_variances,
                                   std::span<const bool> correct, double tau, std::span<const double> scale_grid) {
  if (scale_grid.empty()) throw InvalidArgument("calibrate_sigma2: empty scale grid");
  if (means.empty()) throw InvalidArgument("calibrate_sigma2: empty holdout");
  if (means.size() != unit_variances.size() || means.size() != correct.size())
    throw InvalidArgument("calibrate_sigma2: input lengths differ");
  if (!(tau > 0.0)) throw InvalidArgument("calibrate_sigma2: tau must be positive");
  for (double s : scale_grid)
    if (!(s > 0.0)) throw InvalidArgument("calibrate_sigma2: scales must be positive");

  const auto n = static_cast<double>(means.size());
  CalibrationResult result;
  result.n = means.size();
  result.tau = tau;
  result.grid.resize(scale_grid.size());
  parallel_for(scale_grid.size(), [&](std::size_t g) {
    const double s = scale_grid[g];
    std::size_t wrong_confident = 0;
    std::size_t right_ambiguous = 0;
    for (std::size_t i = 0; i < means.size(); ++i) {
      const double variance = std::max(s * unit_variances[i], kVarianceFloor);
      const bool ambiguous = interval_contains(means[i], variance, tau, 0.0);
      if (!correct[i] && !ambiguous) ++wrong_confident;
      if (correct[i] && ambiguous) ++right_ambiguous;
    }
    result.grid[g] = CalibrationPoint{s, static_cast<double>(wrong_confident) / n,
                                      static_cast<double>(right_ambiguous) / n};
  });

  std::size_t best = 0;
  for (std::size_t g = 1; g < result.grid.size(); ++g) {
    const double obj = result.grid[g].objective();
    const double best_obj = result.grid[best].objective();
    if (obj < best_obj || (obj == best_obj && result.grid[g].sigma2 < result.grid[best].sigma2)) best = g;
  }
  result.sigma2 = result.grid[best].sigma2;
  result.alpha = result.grid[best].alpha;
  result.one_minus_beta = result.grid[best].one_minus_beta;
  result.objective = result.grid[best].objective();
  return result;
}

namespace {

CalibrationResult calibrate_from_estimates(const std::vector<LocalEstimate>& est, std::span<const double> truth,
                                           double tau, std::span<const double> scale_grid) {
  std::vector<double> means(est.size());
  std::vector<double> vars(est.size());
  auto correct = std::make_unique<bool[]>(est.size());
  for (std::size_t i = 0; i < est.size(); ++i) {
    means[i] = est[i].mean;
    vars[i] = est[i].unit_variance;
    correct[i] = (est[i].mean > 0.0 ? 1.0 : -1.0) == truth[i];
  }
  return calibrate_sigma2(means, vars, std::span<const bool>(correct.get(), est.size()), tau, scale_grid);
}

}  // namespace

CalibrationResult calibrate_sigma2(const MuyGpsModel& model, const FeatureMatrix& holdout,
                                   std::span<const double> truth_signs, double tau,
                                   std::span<const double> scale_grid) {
  if (static_cast<std::size_t>(holdout.rows()) != truth_signs.size())
    throw InvalidArgument("calibrate_sigma2: holdout and truth lengths differ");
  if (holdout.rows() == 0) throw InvalidArgument("calibrate_sigma2: empty holdout");
  const auto nbrs = model.index().query_batch(holdout, model.nn_count());
  std::vector<LocalEstimate> est(nbrs.size());
  parallel_for(est.size(), [&](std::size_t i) {
    est[i] = model.estimate(holdout.row(static_cast<Eigen::Index>(i)), nbrs[i]);
  });
  return calibrate_from_estimates(est, truth_signs, tau, scale_grid);
}

CalibrationResult calibrate_sigma2_loo(const MuyGpsModel& model, std::span<const std::size_t> rows, double tau,
                                       std::span<const double> scale_grid) {
  if (rows.empty()) throw InvalidArgument("calibrate_sigma2: empty holdout");
  const auto nbrs = model.index().query_training_rows(rows, model.nn_count());
  std::vector<LocalEstimate> est(rows.size());
  std::vector<double> truth(rows.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    est[i] = model.estimate(model.index().features().row(static_cast<Eigen::Index>(rows[i])), nbrs[i]);
    truth[i] = model.targets()[static_cast<Eigen::Index>(rows[i])];
  });
  return calibrate_from_estimates(est, truth, tau, scale_grid);
}

}  // namespace muygps
