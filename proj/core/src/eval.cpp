#include "muygps/eval.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "muygps/error.hpp"

namespace muygps {

using json = nlohmann::ordered_json;

double accuracy(std::span<const int> preds, std::span<const int> truth) {
  if (preds.size() != truth.size()) throw InvalidArgument("accuracy: length mismatch");
  if (preds.empty()) throw InvalidArgument("accuracy: empty inputs");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

ConfusionMatrix confusion_matrix(std::span<const int> preds, std::span<const int> truth, std::size_t n_classes) {
  if (preds.size() != truth.size()) throw InvalidArgument("confusion_matrix: length mismatch");
  ConfusionMatrix cm(n_classes, std::vector<std::size_t>(n_classes, 0));
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] < 0 || truth[i] < 0 || static_cast<std::size_t>(preds[i]) >= n_classes ||
        static_cast<std::size_t>(truth[i]) >= n_classes)
      throw InvalidArgument("confusion_matrix: label out of range");
    ++cm[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(preds[i])];
  }
  return cm;
}

UqReport tau_sweep(std::span<const LatentPrediction> preds, std::span<const int> truth, const TauGrid& grid,
                   std::vector<std::string> class_names) {
  grid.validate();
  if (preds.size() != truth.size()) throw InvalidArgument("tau_sweep: predictions and truth differ in length");
  if (preds.empty()) throw InvalidArgument("tau_sweep: no predictions");

  std::vector<int> labels(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) labels[i] = preds[i].label;
  const double acc_all = accuracy(labels, truth);

  UqReport report;
  report.class_names = std::move(class_names);
  for (std::size_t t = 0; t < grid.size(); ++t) {
    const double tau = grid.taus[t];
    TauRow row;
    row.tau = tau;
    row.confidence = grid.confidences[t];
    row.n_total = preds.size();
    row.accuracy_all = acc_all;
    std::vector<int> kept_pred;
    std::vector<int> kept_truth;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const auto it = preds[i].ambiguous_at.find(tau);
      if (it == preds[i].ambiguous_at.end())
        throw InvalidArgument("tau_sweep: prediction " + std::to_string(i) + " has no ambiguity flag for tau " +
                              std::to_string(tau));
      if (it->second) {
        ++row.n_ambiguous;
      } else {
        kept_pred.push_back(labels[i]);
        kept_truth.push_back(truth[i]);
      }
    }
    if (!kept_pred.empty()) row.accuracy_non_ambiguous = accuracy(kept_pred, kept_truth);
    row.confusion = confusion_matrix(kept_pred, kept_truth, report.class_names.size());
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace {

std::string number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json calibration_to_json(const CalibrationResult& c) {
  json j;
  j["sigma2"] = c.sigma2;
  j["alpha"] = c.alpha;
  j["one_minus_beta"] = c.one_minus_beta;
  j["objective"] = c.objective;
  j["n"] = c.n;
  j["tau"] = c.tau;
  json grid = json::array();
  for (const auto& g : c.grid) grid.push_back({{"sigma2", g.sigma2}, {"alpha", g.alpha}, {"one_minus_beta", g.one_minus_beta}});
  j["grid"] = std::move(grid);
  return j;
}

CalibrationResult calibration_from_json(const json& j) {
  CalibrationResult c;
  c.sigma2 = j.at("sigma2").get<double>();
  c.alpha = j.at("alpha").get<double>();
  c.one_minus_beta = j.at("one_minus_beta").get<double>();
  c.objective = j.at("objective").get<double>();
  c.n = j.at("n").get<std::size_t>();
  c.tau = j.at("tau").get<double>();
  for (const auto& g : j.at("grid"))
    c.grid.push_back({g.at("sigma2").get<double>(), g.at("alpha").get<double>(), g.at("one_minus_beta").get<double>()});
  return c;
}

}  // namespace

std::string report_to_json(const UqReport& report) {
  json j;
  j["class_names"] = report.class_names;
  json meta = json::object();
  for (const auto& [k, v] : report.metadata) meta[k] = v;
  j["metadata"] = std::move(meta);
  json rows = json::array();
  for (const auto& r : report.rows) {
    json row;
    row["tau"] = r.tau;
    row["confidence"] = r.confidence;
    row["n_ambiguous"] = r.n_ambiguous;
    row["n_total"] = r.n_total;
    row["accuracy_all"] = r.accuracy_all;
    row["accuracy_non_ambiguous"] = r.accuracy_non_ambiguous ? json(*r.accuracy_non_ambiguous) : json(nullptr);
    row["confusion"] = r.confusion;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  json cal = json::array();
  for (const auto& c : report.calibration) cal.push_back(calibration_to_json(c));
  j["calibration"] = std::move(cal);
  return j.dump(2) + "\n";
}

std::string report_to_csv(const UqReport& report) {
  std::string out = "tau,confidence,n_ambiguous,n_total,accuracy_all,accuracy_non_ambiguous\n";
  for (const auto& r : report.rows) {
    out += number(r.tau) + "," + number(r.confidence) + "," + std::to_string(r.n_ambiguous) + "," +
           std::to_string(r.n_total) + "," + number(r.accuracy_all) + "," +
           (r.accuracy_non_ambiguous ? number(*r.accuracy_non_ambiguous) : std::string()) + "\n";
  }
  return out;
}

UqReport report_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    UqReport report;
    report.class_names = j.at("class_names").get<std::vector<std::string>>();
    for (const auto& [k, v] : j.at("metadata").items()) report.metadata[k] = v.get<std::string>();
    for (const auto& row : j.at("rows")) {
      TauRow r;
      r.tau = row.at("tau").get<double>();
      r.confidence = row.at("confidence").get<double>();
      r.n_ambiguous = row.at("n_ambiguous").get<std::size_t>();
      r.n_total = row.at("n_total").get<std::size_t>();
      r.accuracy_all = row.at("accuracy_all").get<double>();
      if (!row.at("accuracy_non_ambiguous").is_null())
        r.accuracy_non_ambiguous = row.at("accuracy_non_ambiguous").get<double>();
      r.confusion = row.at("confusion").get<ConfusionMatrix>();
      report.rows.push_back(std::move(r));
    }
    if (j.contains("calibration"))
      for (const auto& c : j.at("calibration")) report.calibration.push_back(calibration_from_json(c));
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("report: ") + e.what());
  }
}

void emit_report(const UqReport& report, const std::filesystem::path& path, ReportFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << (format == ReportFormat::Json ? report_to_json(report) : report_to_csv(report));
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

std::string file_fingerprint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kHex[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace muygps
