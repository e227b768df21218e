#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "muygps/types.hpp"

namespace muygps {

/// k training rows nearest a query, ascending by distance, ties by row index.
struct NeighborSet {
  std::vector<std::size_t> indices;
  std::vector<double> distances;

  std::size_t size() const { return indices.size(); }
};

/// Exact brute-force Euclidean k-NN over an immutable training matrix.
class NnIndex {
 public:
  /// Throws InvalidArgument on an empty matrix.
  static NnIndex build(std::shared_ptr<const FeatureMatrix> train);
  static NnIndex build(FeatureMatrix train);

  /// exclude_self drops that training row from the candidates (leave-one-out).
  NeighborSet query(const RowVector& x, std::size_t k,
                    std::optional<std::size_t> exclude_self = std::nullopt) const;

  /// One query per row of `queries`, parallel over rows.
  std::vector<NeighborSet> query_batch(const FeatureMatrix& queries, std::size_t k) const;

  /// Leave-one-out neighborhoods of training rows.
  std::vector<NeighborSet> query_training_rows(std::span<const std::size_t> rows, std::size_t k) const;

  std::size_t size() const { return static_cast<std::size_t>(train_->rows()); }
  std::size_t dims() const { return static_cast<std::size_t>(train_->cols()); }
  const FeatureMatrix& features() const { return *train_; }
  const std::shared_ptr<const FeatureMatrix>& shared_features() const { return train_; }

 private:
  explicit NnIndex(std::shared_ptr<const FeatureMatrix> train) : train_(std::move(train)) {}

  std::shared_ptr<const FeatureMatrix> train_;
};

}  // namespace muygps
