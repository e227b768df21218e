#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "muygps/classifier.hpp"
#include "muygps/kernel.hpp"
#include "muygps/knn.hpp"
#include "muygps/types.hpp"

namespace muygps {

enum class ModelKind { MuyGps, Gp, Knn };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& text);

struct ModelHead {
  int positive_class = 0;
  KernelParams params;
  /// +1/-1 indicator of positive_class over the training rows.
  Vector targets;
};

/// Self-contained trained model: hyperparameters plus the full training set.
///
/// On disk: 8-byte magic "MUYGPSMF", uint32 format version, uint64 header
/// length, a JSON header, then little-endian int32 labels, float64 training
/// matrix (row-major) and one float64 target vector per head.
struct ModelFile {
  static constexpr std::uint32_t kFormatVersion = 1;

  ModelKind kind = ModelKind::MuyGps;
  /// Neighbors per prediction (MuyGPs) or voters (KNN); unused for the full GP.
  std::size_t nn_count = 0;
  std::vector<std::string> class_names;
  std::vector<int> labels;
  FeatureMatrix features;
  std::vector<ModelHead> heads;
  std::map<std::string, std::string> metadata;

  std::size_t n_train() const { return labels.size(); }
  std::size_t n_features() const { return static_cast<std::size_t>(features.cols()); }
  void validate() const;
};

void save_model(const ModelFile& model, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

ModelFile to_model_file(const MuyGpsClassifier& clf);
MuyGpsClassifier to_classifier(const ModelFile& model);
KnnModel to_knn(const ModelFile& model);

/// Full-GP predictions for every head of a ModelKind::Gp file.
ClassifierPrediction gp_predict(const ModelFile& model, const FeatureMatrix& test);

/// One +1/-1 head per class (a single class-0 head when binary), built from `labels`.
std::vector<ModelHead> indicator_heads(const std::vector<int>& labels, std::size_t n_classes, const KernelParams& p);

}  // namespace muygps
