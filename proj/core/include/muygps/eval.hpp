#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "muygps/prediction.hpp"
#include "muygps/uq.hpp"

namespace muygps {

/// Fraction of exact matches. Throws on empty or mismatched inputs.
double accuracy(std::span<const int> preds, std::span<const int> truth);

/// counts[truth][pred].
using ConfusionMatrix = std::vector<std::vector<std::size_t>>;

ConfusionMatrix confusion_matrix(std::span<const int> preds, std::span<const int> truth, std::size_t n_classes);

struct TauRow {
  double tau = 0.0;
  double confidence = 0.0;
  std::size_t n_ambiguous = 0;
  std::size_t n_total = 0;
  double accuracy_all = 0.0;
  /// Empty when every point is ambiguous.
  std::optional<double> accuracy_non_ambiguous;
  /// Over non-ambiguous points only.
  ConfusionMatrix confusion;

  friend bool operator==(const TauRow&, const TauRow&) = default;
};

/// Accuracy and ambiguity as a function of tau, plus provenance.
struct UqReport {
  std::vector<TauRow> rows;
  std::vector<std::string> class_names;
  /// Flat string metadata: model path/hash, dataset path, seeds, method notes.
  std::map<std::string, std::string> metadata;
  std::vector<CalibrationResult> calibration;

  friend bool operator==(const UqReport& a, const UqReport& b) {
    return a.rows == b.rows && a.class_names == b.class_names && a.metadata == b.metadata;
  }
};

/// Partitions predictions by their ambiguous_at flags, which must already be
/// set for every tau in the grid (see annotate_ambiguity).
UqReport tau_sweep(std::span<const LatentPrediction> preds, std::span<const int> truth, const TauGrid& grid,
                   std::vector<std::string> class_names);

enum class ReportFormat { Json, Csv };

void emit_report(const UqReport& report, const std::filesystem::path& path, ReportFormat format);
std::string report_to_json(const UqReport& report);
std::string report_to_csv(const UqReport& report);
UqReport report_from_json(const std::string& text);

/// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_fingerprint(const std::filesystem::path& path);

}  // namespace muygps
