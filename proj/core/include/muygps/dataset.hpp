#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "muygps/types.hpp"

namespace muygps {

/// Fixed-width feature rows with integer class labels in [0, n_classes).
struct Dataset {
  FeatureMatrix features;
  std::vector<int> labels;
  std::vector<std::string> class_names;

  std::size_t size() const { return labels.size(); }
  std::size_t n_features() const { return static_cast<std::size_t>(features.cols()); }
  std::size_t n_classes() const { return class_names.size(); }

  /// Throws InvalidArgument when a structural invariant is broken.
  /// Empty datasets pass only when allow_empty is set.
  void validate(bool allow_empty = false) const;
};

/// Default display names: normal/abnormal for two classes, AAMI N,S,V,F,Q for five.
std::vector<std::string> default_class_names(std::size_t n_classes);

struct CsvOptions {
  /// Column holding the label; defaults to the last one.
  std::optional<std::size_t> label_column;
  /// Declared class count. When unset it is inferred as max(label) + 1.
  std::optional<std::size_t> n_classes;
  std::vector<std::string> class_names;
  bool allow_empty = false;
};

/// Reads one sample per line, comma separated. A first row that does not parse
/// as numbers is treated as a header and skipped. Errors carry the 1-based line.
Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Concatenates several files with the same layout (e.g. per-class PTB files).
Dataset load_csv(std::span<const std::filesystem::path> paths, const CsvOptions& options = {});

/// Writes features followed by the label, with round-trip exact (%.17g) numbers.
void write_csv(const Dataset& ds, const std::filesystem::path& path);

/// Keeps columns [0, width).
Dataset truncate(const Dataset& ds, std::size_t width);

/// Rows in the given order.
Dataset subset(const Dataset& ds, std::span<const std::size_t> rows);

std::vector<std::size_t> class_counts(const Dataset& ds);

struct Split {
  Dataset train;
  Dataset test;
  /// Source row ids, ascending.
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

/// Per class, round(count * test_fraction) rows go to the test part. Each part
/// preserves the source row order.
Split stratified_split(const Dataset& ds, double test_fraction, Seed seed);

/// Labels mapped to +1 for positive_class and -1 otherwise.
class SignedLabels {
 public:
  SignedLabels(std::span<const int> labels, int positive_class);
  explicit SignedLabels(Vector values);

  const Vector& values() const { return values_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

 private:
  Vector values_;
};

struct SmoteConfig {
  std::size_t k_neighbors = 5;
  /// Target count for every non-majority class: ceil(ratio * majority count).
  double ratio = 1.0;
  Seed seed = 0;

  void validate() const;
};

/// How synthetic row `row` was made: source + r * (neighbor - source).
struct SmoteProvenance {
  std::size_t row = 0;
  std::size_t source = 0;
  std::size_t neighbor = 0;
  double r = 0.0;
};

struct SmoteResult {
  Dataset data;
  std::vector<SmoteProvenance> provenance;
};

/// x + r * (neighbor - x)
RowVector smote_interpolate(const RowVector& x, const RowVector& neighbor, double r);

/// Oversamples every class below the target ratio. Originals form an unchanged
/// prefix of the output; synthetic rows follow in class order. Source rows are
/// drawn uniformly with replacement from the class, the neighbor uniformly from
/// the source's k nearest same-class rows (exact Euclidean), r uniformly in [0, 1].
SmoteResult smote_oversample(const Dataset& ds, const SmoteConfig& cfg);

/// One JSON object per line: {"row":..,"source":..,"neighbor":..,"r":..}.
void write_provenance_jsonl(std::span<const SmoteProvenance> records, const std::filesystem::path& path);
std::vector<SmoteProvenance> read_provenance_jsonl(const std::filesystem::path& path);

/// batch_size distinct indices drawn uniformly from [0, n_train).
std::vector<std::size_t> sample_batch(std::size_t n_train, std::size_t batch_size, Seed seed);

}  // namespace muygps
