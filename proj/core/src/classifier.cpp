#include "muygps/classifier.hpp"

#include <string>

#include "muygps/error.hpp"
#include "muygps/parallel.hpp"

namespace muygps {

ClassifierPrediction combine_heads(std::vector<std::vector<LatentPrediction>> per_head, std::size_t n_classes) {
  const bool binary = n_classes == 2 && per_head.size() == 1;
  if (!binary && per_head.size() != n_classes)
    throw InvalidArgument("classifier: " + std::to_string(per_head.size()) + " heads for " +
                          std::to_string(n_classes) + " classes");
  if (per_head.empty()) throw InvalidArgument("classifier: no heads");
  const std::size_t m = per_head.front().size();
  for (const auto& h : per_head)
    if (h.size() != m) throw InvalidArgument("classifier: head predictions differ in length");

  ClassifierPrediction out;
  out.labels.resize(m);
  out.combined.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t winner = 0;
    int label = 0;
    if (binary) {
      label = per_head[0][j].mean > 0.0 ? 0 : 1;
    } else {
      for (std::size_t h = 1; h < per_head.size(); ++h)
        if (per_head[h][j].mean > per_head[winner][j].mean) winner = h;
      label = static_cast<int>(winner);
    }
    out.labels[j] = label;
    out.combined[j] = per_head[winner][j];
    out.combined[j].label = label;
    out.combined[j].ambiguous_at.clear();
  }
  out.per_head = std::move(per_head);
  return out;
}

void ClassifierPrediction::annotate(const TauGrid& grid) {
  for (auto& head : per_head) annotate_ambiguity(head, grid);
  for (double tau : grid.taus) {
    const auto uncertain = ova_uncertain_union(per_head, tau);
    for (std::size_t j = 0; j < combined.size(); ++j) combined[j].ambiguous_at[tau] = uncertain[j];
  }
}

MuyGpsClassifier::MuyGpsClassifier(std::shared_ptr<const NnIndex> index, std::vector<int> labels,
                                   std::vector<std::string> class_names, std::vector<MuyGpsModel> heads)
    : index_(std::move(index)),
      labels_(std::move(labels)),
      class_names_(std::move(class_names)),
      heads_(std::move(heads)) {
  if (!index_) throw InvalidArgument("classifier: missing neighbor index");
  if (class_names_.size() < 2) throw InvalidArgument("classifier: need at least two classes");
  const std::size_t expected = binary() ? 1 : class_names_.size();
  if (heads_.size() != expected)
    throw InvalidArgument("classifier: expected " + std::to_string(expected) + " heads, got " +
                          std::to_string(heads_.size()));
  if (labels_.size() != index_->size()) throw InvalidArgument("classifier: label count does not match index");
  for (const auto& h : heads_) {
    if (h.shared_index() != index_) throw InvalidArgument("classifier: heads must share the classifier's index");
    if (h.nn_count() != heads_.front().nn_count()) throw InvalidArgument("classifier: heads disagree on nn_count");
  }
}

MuyGpsClassifier MuyGpsClassifier::train(const Dataset& train, const TrainConfig& cfg, const KernelParams& init,
                                         std::vector<TrainSummary>* summaries) {
  train.validate();
  if (train.n_classes() < 2) throw InvalidArgument("classifier: need at least two classes");
  auto index = std::make_shared<const NnIndex>(NnIndex::build(train.features));
  const std::size_t n_heads = train.n_classes() == 2 ? 1 : train.n_classes();
  std::vector<MuyGpsModel> heads;
  if (summaries) summaries->clear();
  for (std::size_t h = 0; h < n_heads; ++h) {
    const SignedLabels z(train.labels, static_cast<int>(h));
    TrainedModel trained = optimize(index, z, cfg, init);
    if (summaries) summaries->push_back(trained.summary);
    heads.push_back(std::move(trained.model));
  }
  return MuyGpsClassifier(std::move(index), train.labels, train.class_names, std::move(heads));
}

int MuyGpsClassifier::head_class(std::size_t h) const {
  if (h >= heads_.size()) throw InvalidArgument("classifier: head index out of range");
  return static_cast<int>(h);
}

ClassifierPrediction MuyGpsClassifier::predict(const FeatureMatrix& test) const {
  std::vector<std::vector<LatentPrediction>> per_head(heads_.size());
  if (test.rows() > 0) {
    if (static_cast<std::size_t>(test.cols()) != index_->dims())
      throw InvalidArgument("classifier: test has " + std::to_string(test.cols()) + " features, model has " +
                            std::to_string(index_->dims()));
    const auto nbrs = index_->query_batch(test, nn_count());
    for (std::size_t h = 0; h < heads_.size(); ++h) per_head[h] = heads_[h].predict(test, nbrs);
  }
  return combine_heads(std::move(per_head), class_names_.size());
}

std::vector<CalibrationResult> MuyGpsClassifier::calibrate(std::span<const std::size_t> rows, double tau,
                                                           std::size_t grid_points) {
  if (rows.empty()) throw InvalidArgument("classifier: empty calibration slice");
  const auto nbrs = index_->query_training_rows(rows, nn_count());
  std::vector<CalibrationResult> results;
  for (auto& head : heads_) {
    std::vector<double> means(rows.size());
    std::vector<double> vars(rows.size());
    auto correct = std::make_unique<bool[]>(rows.size());
    parallel_for(rows.size(), [&](std::size_t i) {
      const auto est = head.estimate(index_->features().row(static_cast<Eigen::Index>(rows[i])), nbrs[i]);
      means[i] = est.mean;
      vars[i] = est.unit_variance;
      correct[i] = (est.mean > 0.0 ? 1.0 : -1.0) == head.targets()[static_cast<Eigen::Index>(rows[i])];
    });
    const auto grid = calibration_grid(unit_variance_scale(vars), grid_points);
    results.push_back(
        calibrate_sigma2(means, vars, std::span<const bool>(correct.get(), rows.size()), tau, grid));
    head.set_sigma2(results.back().sigma2);
  }
  return results;
}

}  // namespace muygps
