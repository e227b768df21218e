#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "muygps/dataset.hpp"
#include "muygps/nn_index.hpp"

namespace muygps {

struct KnnVote {
  int label = 0;
  /// Fraction of the k neighbors in each class; multiples of 1/k.
  std::vector<double> fractions;
};

/// Majority-vote k-nearest-neighbor classifier. Vote ties go to the smallest class id.
class KnnModel {
 public:
  KnnModel(std::shared_ptr<const NnIndex> index, std::vector<int> labels, std::size_t n_classes, std::size_t k = 3);

  static KnnModel fit(const Dataset& train, std::size_t k = 3);

  KnnVote predict(const RowVector& x) const;
  std::vector<KnnVote> predict(const FeatureMatrix& test) const;

  std::size_t k() const { return k_; }
  std::size_t n_classes() const { return n_classes_; }
  const NnIndex& index() const { return *index_; }
  const std::vector<int>& labels() const { return labels_; }

 private:
  std::shared_ptr<const NnIndex> index_;
  std::vector<int> labels_;
  std::size_t n_classes_;
  std::size_t k_;
};

/// Vote fractions of an ensemble of KNN models fit on bootstrap resamples.
struct RepeatedRuns {
  /// fractions[c](run, point): vote fraction of class c.
  std::vector<Matrix> fractions;
  /// (point, class) mean across runs.
  Matrix mean;
  /// (point, class) unbiased variance across runs.
  Matrix variance;
  std::size_t runs = 0;
};

/// Fits `runs` KNN models, each on a bootstrap resample of the training rows
/// drawn from a seed derived from (seed, run). Test points are scored in parallel.
RepeatedRuns knn_repeated_runs(const Dataset& train, const FeatureMatrix& test, std::size_t k, std::size_t runs,
                               Seed seed);

/// Same with an explicit bootstrap seed per run.
RepeatedRuns knn_repeated_runs(const Dataset& train, const FeatureMatrix& test, std::size_t k,
                               std::span<const Seed> run_seeds);

/// Mean and unbiased variance per column of a runs x points matrix.
void column_moments(const Matrix& samples, Vector& mean, Vector& variance);

}  // namespace muygps
