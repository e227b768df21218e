#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "muygps/dataset.hpp"
#include "muygps/kernel.hpp"
#include "muygps/nn_index.hpp"
#include "muygps/prediction.hpp"
#include "muygps/types.hpp"

namespace muygps {

/// Kriging output with the variance before sigma2 scaling.
struct LocalEstimate {
  double mean = 0.0;
  double unit_variance = 0.0;
};

/// Solves the k x k local system (K_NN + noise I) by Cholesky.
///
/// neighbor_distances is the k x k matrix of distances among neighbors,
/// query_distances the k distances from the query. Only the correlation part
/// of `p` is used; sigma2 is ignored here.
LocalEstimate krige(const Matrix& neighbor_distances, const Vector& query_distances, const Vector& neighbor_targets,
                    const KernelParams& p);

/// Nearest-neighbor GP over a shared training index.
///
/// Targets are usually +1/-1 class indicators, but any real response works
/// (the coverage tests regress on latent values directly).
class MuyGpsModel {
 public:
  MuyGpsModel(std::shared_ptr<const NnIndex> index, Vector targets, KernelParams params, std::size_t nn_count);

  const KernelParams& params() const { return params_; }
  void set_params(const KernelParams& p);
  void set_sigma2(double sigma2);

  std::size_t nn_count() const { return nn_count_; }
  std::size_t n_train() const { return index_->size(); }
  const Vector& targets() const { return targets_; }
  const NnIndex& index() const { return *index_; }
  const std::shared_ptr<const NnIndex>& shared_index() const { return index_; }

  /// Neighborhood of x; exclude_self gives the leave-one-out set of a training row.
  NeighborSet neighbors(const RowVector& x, std::optional<std::size_t> exclude_self = std::nullopt) const;

  double local_mean(const RowVector& x, std::optional<std::size_t> exclude_self = std::nullopt) const;
  /// sigma2 * (1 - k_xN (K_NN + noise I)^-1 k_Nx), floored at 1e-12.
  double local_variance(const RowVector& x, std::optional<std::size_t> exclude_self = std::nullopt) const;

  /// Mean, scaled variance and sign label from a precomputed neighborhood.
  LatentPrediction predict_one(const RowVector& x, const NeighborSet& neighbors) const;
  LocalEstimate estimate(const RowVector& x, const NeighborSet& neighbors) const;

  /// Parallel over test rows; no self exclusion.
  std::vector<LatentPrediction> predict(const FeatureMatrix& test) const;
  std::vector<LatentPrediction> predict(const FeatureMatrix& test, std::span<const NeighborSet> neighbors) const;

 private:
  std::shared_ptr<const NnIndex> index_;
  Vector targets_;
  KernelParams params_;
  std::size_t nn_count_;
};

/// (e^a / (e^a + e^-a), e^-a / (e^a + e^-a)), stable for large |a|.
/// The first entry is the probability assigned to the +1 class.
std::pair<double, double> softmax_pair(double a);

/// Cross-entropy contribution of one point with latent mean `latent` and label z.
/// Probabilities are clamped to [1e-12, 1 - 1e-12] before the log.
double cross_entropy_term(double latent, double z);

/// Leave-one-out cross-entropy summed over the batch rows.
double cross_entropy_loss(const MuyGpsModel& model, std::span<const std::size_t> batch);

/// Loss over a fixed batch with neighborhoods resolved once in feature space.
///
/// Only distances are cached, so evaluating at new hyperparameters costs one
/// k x k factorization per batch point and no neighbor search.
class BatchObjective {
 public:
  BatchObjective(const NnIndex& index, const Vector& targets, std::vector<std::size_t> batch, std::size_t nn_count);

  double operator()(const KernelParams& p) const;

  const std::vector<std::size_t>& batch() const { return batch_; }
  /// True when every batch label is the same.
  bool single_class() const;

 private:
  std::vector<std::size_t> batch_;
  std::vector<Matrix> neighbor_distances_;
  std::vector<Vector> query_distances_;
  std::vector<Vector> neighbor_targets_;
  std::vector<double> batch_targets_;
};

struct TrainConfig {
  std::size_t nn_count = 50;
  std::size_t batch_size = 500;
  Seed seed = 0;
  double length_scale_lower = 1e-2;
  double length_scale_upper = 1e2;
  /// Also fit the noise variance (Nelder-Mead over log scale) instead of
  /// golden-section over the length scale alone.
  bool optimize_noise = false;
  double noise_lower = 1e-8;
  double noise_upper = 1e-1;
  std::size_t max_evaluations = 60;

  /// Checks bounds and that the batch and neighborhoods fit in n_train rows.
  void validate(std::size_t n_train) const;
};

struct TrainSummary {
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::size_t evaluations = 0;
  bool single_class_batch = false;
  std::size_t batch_size = 0;
};

struct TrainedModel {
  MuyGpsModel model;
  TrainSummary summary;
};

/// Minimizes the batch cross-entropy over the length scale (and optionally the
/// noise), starting from `init`. The returned loss never exceeds the loss at
/// `init`. The batch is sampled once from cfg.seed.
TrainedModel optimize(std::shared_ptr<const NnIndex> index, const SignedLabels& z, const TrainConfig& cfg,
                      const KernelParams& init);

TrainedModel optimize(const Dataset& train, const SignedLabels& z, const TrainConfig& cfg, const KernelParams& init);

}  // namespace muygps
