#include "muygps/knn.hpp"

#include <random>
#include <string>

#include "muygps/error.hpp"
#include "muygps/parallel.hpp"
#include "muygps/random.hpp"

namespace muygps {

KnnModel::KnnModel(std::shared_ptr<const NnIndex> index, std::vector<int> labels, std::size_t n_classes,
                   std::size_t k)
    : index_(std::move(index)), labels_(std::move(labels)), n_classes_(n_classes), k_(k) {
  if (!index_) throw InvalidArgument("knn: missing neighbor index");
  if (labels_.size() != index_->size()) throw InvalidArgument("knn: label count does not match index");
  if (k_ < 1 || k_ > index_->size())
    throw InvalidArgument("knn: k = " + std::to_string(k_) + " not in [1, " + std::to_string(index_->size()) + "]");
  for (int label : labels_)
    if (label < 0 || static_cast<std::size_t>(label) >= n_classes_) throw InvalidArgument("knn: label out of range");
}

KnnModel KnnModel::fit(const Dataset& train, std::size_t k) {
  train.validate();
  return KnnModel(std::make_shared<const NnIndex>(NnIndex::build(train.features)), train.labels, train.n_classes(), k);
}

KnnVote KnnModel::predict(const RowVector& x) const {
  const NeighborSet nbrs = index_->query(x, k_);
  std::vector<std::size_t> votes(n_classes_, 0);
  for (std::size_t i : nbrs.indices) ++votes[static_cast<std::size_t>(labels_[i])];
  KnnVote out;
  out.fractions.resize(n_classes_);
  std::size_t best = 0;
  for (std::size_t c = 0; c < n_classes_; ++c) {
    out.fractions[c] = static_cast<double>(votes[c]) / static_cast<double>(k_);
    if (votes[c] > votes[best]) best = c;
  }
  out.label = static_cast<int>(best);
  return out;
}

std::vector<KnnVote> KnnModel::predict(const FeatureMatrix& test) const {
  std::vector<KnnVote> out(static_cast<std::size_t>(test.rows()));
  parallel_for(out.size(), [&](std::size_t i) { out[i] = predict(RowVector(test.row(static_cast<Eigen::Index>(i)))); });
  return out;
}

void column_moments(const Matrix& samples, Vector& mean, Vector& variance) {
  const Eigen::Index runs = samples.rows();
  if (runs < 2) throw InvalidArgument("column_moments: need at least two rows");
  mean = samples.colwise().mean().transpose();
  variance.resize(samples.cols());
  for (Eigen::Index j = 0; j < samples.cols(); ++j)
    variance[j] = (samples.col(j).array() - mean[j]).square().sum() / static_cast<double>(runs - 1);
}

RepeatedRuns knn_repeated_runs(const Dataset& train, const FeatureMatrix& test, std::size_t k,
                               std::span<const Seed> run_seeds) {
  train.validate();
  if (run_seeds.size() < 2) throw InvalidArgument("knn_repeated_runs: need at least two runs");
  const std::size_t n = train.size();
  const std::size_t n_classes = train.n_classes();
  const auto m = test.rows();

  RepeatedRuns out;
  out.runs = run_seeds.size();
  out.fractions.assign(n_classes, Matrix::Zero(static_cast<Eigen::Index>(run_seeds.size()), m));
  for (std::size_t r = 0; r < run_seeds.size(); ++r) {
    std::mt19937_64 rng(run_seeds[r]);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    auto rows = std::make_shared<FeatureMatrix>(static_cast<Eigen::Index>(n), train.features.cols());
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t src = pick(rng);
      rows->row(static_cast<Eigen::Index>(i)) = train.features.row(static_cast<Eigen::Index>(src));
      labels[i] = train.labels[src];
    }
    const KnnModel model(std::make_shared<const NnIndex>(NnIndex::build(std::shared_ptr<const FeatureMatrix>(rows))),
                         std::move(labels), n_classes, k);
    const auto votes = model.predict(test);
    for (Eigen::Index j = 0; j < m; ++j)
      for (std::size_t c = 0; c < n_classes; ++c)
        out.fractions[c](static_cast<Eigen::Index>(r), j) = votes[static_cast<std::size_t>(j)].fractions[c];
  }

  out.mean.resize(m, static_cast<Eigen::Index>(n_classes));
  out.variance.resize(m, static_cast<Eigen::Index>(n_classes));
  for (std::size_t c = 0; c < n_classes; ++c) {
    Vector mean, variance;
    column_moments(out.fractions[c], mean, variance);
    out.mean.col(static_cast<Eigen::Index>(c)) = mean;
    out.variance.col(static_cast<Eigen::Index>(c)) = variance;
  }
  return out;
}

RepeatedRuns knn_repeated_runs(const Dataset& train, const FeatureMatrix& test, std::size_t k, std::size_t runs,
                               Seed seed) {
  if (runs < 2) throw InvalidArgument("knn_repeated_runs: need at least two runs");
  std::vector<Seed> seeds(runs);
  for (std::size_t r = 0; r < runs; ++r) seeds[r] = derive_seed(seed, r);
  return knn_repeated_runs(train, test, k, seeds);
}

}  // namespace muygps
