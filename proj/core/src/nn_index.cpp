#include "muygps/nn_index.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "muygps/error.hpp"
#include "muygps/parallel.hpp"

namespace muygps {

NnIndex NnIndex::build(std::shared_ptr<const FeatureMatrix> train) {
  if (!train || train->rows() == 0) throw InvalidArgument("nn_index: empty training matrix");
  if (train->cols() == 0) throw InvalidArgument("nn_index: training matrix has no features");
  return NnIndex(std::move(train));
}

NnIndex NnIndex::build(FeatureMatrix train) {
  return build(std::make_shared<const FeatureMatrix>(std::move(train)));
}

NeighborSet NnIndex::query(const RowVector& x, std::size_t k, std::optional<std::size_t> exclude_self) const {
  const FeatureMatrix& train = *train_;
  if (static_cast<Eigen::Index>(x.size()) != train.cols())
    throw InvalidArgument("nn_index: query has " + std::to_string(x.size()) + " features, index has " +
                          std::to_string(train.cols()));
  const std::size_t n = size();
  if (exclude_self && *exclude_self >= n)
    throw InvalidArgument("nn_index: excluded row " + std::to_string(*exclude_self) + " out of range");
  const std::size_t available = exclude_self ? n - 1 : n;
  if (k < 1 || k > available)
    throw InvalidArgument("nn_index: k = " + std::to_string(k) + " not in [1, " + std::to_string(available) + "]");

  // Squared distances summed directly from differences so exact ties stay exact.
  std::vector<std::pair<double, std::size_t>> candidates;
  candidates.reserve(available);
  for (std::size_t i = 0; i < n; ++i) {
    if (exclude_self && i == *exclude_self) continue;
    candidates.emplace_back((train.row(static_cast<Eigen::Index>(i)) - x).squaredNorm(), i);
  }
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end());

  NeighborSet out;
  out.indices.reserve(k);
  out.distances.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    out.indices.push_back(candidates[j].second);
    out.distances.push_back(std::sqrt(candidates[j].first));
  }
  return out;
}

std::vector<NeighborSet> NnIndex::query_batch(const FeatureMatrix& queries, std::size_t k) const {
  std::vector<NeighborSet> out(static_cast<std::size_t>(queries.rows()));
  parallel_for(out.size(), [&](std::size_t i) { out[i] = query(queries.row(static_cast<Eigen::Index>(i)), k); });
  return out;
}

std::vector<NeighborSet> NnIndex::query_training_rows(std::span<const std::size_t> rows, std::size_t k) const {
  std::vector<NeighborSet> out(rows.size());
  parallel_for(out.size(), [&](std::size_t i) {
    if (rows[i] >= size()) throw InvalidArgument("nn_index: training row " + std::to_string(rows[i]) + " out of range");
    out[i] = query(train_->row(static_cast<Eigen::Index>(rows[i])), k, rows[i]);
  });
  return out;
}

}  // namespace muygps
