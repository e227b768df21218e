#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "muygps/dataset.hpp"
#include "muygps/muygps.hpp"
#include "muygps/uq.hpp"

namespace muygps {

/// Per-point output of a MuyGPs classifier.
struct ClassifierPrediction {
  /// Class ids.
  std::vector<int> labels;
  /// One list per head, aligned by test point.
  std::vector<std::vector<LatentPrediction>> per_head;
  /// Winning head's mean/variance with the class id as label. Ambiguity flags
  /// are the union over heads once annotate() has run.
  std::vector<LatentPrediction> combined;

  /// Fills ambiguous_at on every head and the union on `combined`.
  void annotate(const TauGrid& grid);
};

/// Turns aligned per-head predictions into class decisions. Binary: one head,
/// mean > 0 -> class 0. Otherwise argmax over head means, ties to the smaller id.
ClassifierPrediction combine_heads(std::vector<std::vector<LatentPrediction>> per_head, std::size_t n_classes);

/// Binary or one-versus-all MuyGPs sharing one neighbor index.
///
/// With two classes there is a single head whose +1 side is class 0 (the
/// "normal" class of the ECG corpora); a mean <= 0 predicts class 1. With more
/// classes there is one head per class and the largest mean wins, ties going
/// to the smaller class id.
class MuyGpsClassifier {
 public:
  MuyGpsClassifier(std::shared_ptr<const NnIndex> index, std::vector<int> labels,
                   std::vector<std::string> class_names, std::vector<MuyGpsModel> heads);

  /// Trains every head independently; summaries are returned in head order.
  static MuyGpsClassifier train(const Dataset& train, const TrainConfig& cfg, const KernelParams& init,
                                std::vector<TrainSummary>* summaries = nullptr);

  /// Class whose indicator is +1 in head h.
  int head_class(std::size_t h) const;
  bool binary() const { return class_names_.size() == 2; }

  ClassifierPrediction predict(const FeatureMatrix& test) const;

  /// Leave-one-out variance calibration on the given training rows, one scale
  /// per head. Stores the scales in the heads and returns the per-head results.
  std::vector<CalibrationResult> calibrate(std::span<const std::size_t> rows, double tau,
                                           std::size_t grid_points = 25);

  const std::vector<MuyGpsModel>& heads() const { return heads_; }
  std::vector<MuyGpsModel>& heads() { return heads_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::string>& class_names() const { return class_names_; }
  const NnIndex& index() const { return *index_; }
  std::size_t nn_count() const { return heads_.front().nn_count(); }

 private:
  std::shared_ptr<const NnIndex> index_;
  std::vector<int> labels_;
  std::vector<std::string> class_names_;
  std::vector<MuyGpsModel> heads_;
};

}  // namespace muygps
