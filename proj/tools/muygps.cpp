// muygps: command-line driver for ECG heartbeat classification with
// nearest-neighbor Gaussian processes, exact GP and KNN baselines.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "muygps/classifier.hpp"
#include "muygps/dataset.hpp"
#include "muygps/error.hpp"
#include "muygps/eval.hpp"
#include "muygps/gp_exact.hpp"
#include "muygps/knn.hpp"
#include "muygps/model_io.hpp"
#include "muygps/parallel.hpp"
#include "muygps/random.hpp"
#include "muygps/uq.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace muygps;

namespace {

constexpr double kCalibrationTau = 1.96;

struct CommonOptions {
  Seed seed = 42;
  std::size_t threads = 0;
};

struct DataOptions {
  std::vector<std::string> paths;
  std::size_t truncate = 0;
  std::optional<std::size_t> classes;
};

std::string number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

std::string join_paths(const std::vector<std::string>& paths) {
  std::string out;
  for (const auto& p : paths) out += (out.empty() ? "" : ";") + p;
  return out;
}

Dataset load_data(const std::vector<std::string>& paths, std::optional<std::size_t> classes, bool allow_empty = false) {
  for (const auto& p : paths)
    if (!fs::exists(p)) throw IoError("no such file: '" + p + "'");
  std::vector<fs::path> files(paths.begin(), paths.end());
  CsvOptions opts;
  opts.n_classes = classes;
  opts.allow_empty = allow_empty;
  return load_csv(files, opts);
}

Dataset maybe_truncate(const Dataset& ds, std::size_t width) {
  if (width == 0 || ds.size() == 0) {
    if (width != 0 && ds.size() == 0 && width <= ds.n_features()) {
      Dataset out = ds;
      out.features.resize(0, static_cast<Eigen::Index>(width));
      return out;
    }
    return ds;
  }
  if (width > ds.n_features())
    throw InvalidArgument("--truncate " + std::to_string(width) + " exceeds the " + std::to_string(ds.n_features()) +
                          " features in the data");
  return truncate(ds, width);
}

std::vector<std::size_t> calibration_rows(const std::vector<int>& labels, std::size_t n_classes, double fraction,
                                          Seed seed) {
  Dataset ds;
  ds.labels = labels;
  ds.features = FeatureMatrix::Zero(static_cast<Eigen::Index>(labels.size()), 1);
  ds.class_names = default_class_names(n_classes);
  return stratified_split(ds, fraction, seed).test_rows;
}

json kernel_json(const KernelParams& p) {
  return {{"nu", p.nu}, {"l", p.length_scale}, {"noise", p.noise}, {"sigma2", p.sigma2}};
}

json calibration_json(const CalibrationResult& c) {
  return {{"sigma2", c.sigma2}, {"alpha", c.alpha}, {"one_minus_beta", c.one_minus_beta},
          {"objective", c.objective}, {"n", c.n}, {"tau", c.tau}};
}

// ---------------------------------------------------------------------------

struct SplitCmd {
  DataOptions data;
  double test_fraction = 0.2;
  std::string train_out;
  std::string test_out;
  std::string meta_out;
};

int run_split(const SplitCmd& cmd, const CommonOptions& common) {
  const Dataset ds = maybe_truncate(load_data(cmd.data.paths, cmd.data.classes), cmd.data.truncate);
  const Seed seed = derive_seed(common.seed, seed_stream::kSplit);
  const Split split = stratified_split(ds, cmd.test_fraction, seed);
  write_csv(split.train, cmd.train_out);
  write_csv(split.test, cmd.test_out);
  json meta;
  meta["protocol"] = "stratified";
  meta["test_fraction"] = cmd.test_fraction;
  meta["seed"] = common.seed;
  meta["data"] = cmd.data.paths;
  meta["truncate"] = cmd.data.truncate;
  meta["n_train"] = split.train.size();
  meta["n_test"] = split.test.size();
  meta["train_class_counts"] = class_counts(split.train);
  meta["test_class_counts"] = class_counts(split.test);
  const std::string text = meta.dump(2) + "\n";
  if (!cmd.meta_out.empty()) write_text(cmd.meta_out, text);
  std::cout << text;
  return 0;
}

// ---------------------------------------------------------------------------

struct SmoteCmd {
  DataOptions data;
  std::string out;
  std::string provenance_out;
  double ratio = 0.8;
  std::size_t k = 5;
};

int run_smote(const SmoteCmd& cmd, const CommonOptions& common) {
  const Dataset ds = maybe_truncate(load_data(cmd.data.paths, cmd.data.classes), cmd.data.truncate);
  SmoteConfig cfg;
  cfg.k_neighbors = cmd.k;
  cfg.ratio = cmd.ratio;
  cfg.seed = derive_seed(common.seed, seed_stream::kSmote);
  const SmoteResult res = smote_oversample(ds, cfg);
  write_csv(res.data, cmd.out);
  if (!cmd.provenance_out.empty()) write_provenance_jsonl(res.provenance, cmd.provenance_out);
  json summary;
  summary["input_rows"] = ds.size();
  summary["synthetic_rows"] = res.provenance.size();
  summary["output_rows"] = res.data.size();
  summary["class_counts"] = class_counts(res.data);
  std::cout << summary.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainCmd {
  DataOptions data;
  std::string model_kind = "muygps";
  std::optional<std::size_t> nn;
  std::size_t knn_k = 3;
  KernelParams kernel;
  std::size_t batch = 500;
  std::size_t max_evals = 40;
  double ls_lower = 1e-2;
  double ls_upper = 1e2;
  bool optimize_noise = false;
  double calibration_fraction = 0.1;
  std::string out;
  std::string summary_out;
  bool timing = false;
};

int run_train(const TrainCmd& cmd, const CommonOptions& common) {
  const auto start = std::chrono::steady_clock::now();
  const Dataset ds = maybe_truncate(load_data(cmd.data.paths, cmd.data.classes), cmd.data.truncate);
  const ModelKind kind = parse_model_kind(cmd.model_kind);
  cmd.kernel.validate();

  json summary;
  summary["model"] = to_string(kind);
  summary["data"] = cmd.data.paths;
  summary["truncate"] = cmd.data.truncate;
  summary["seed"] = common.seed;
  summary["n_train"] = ds.size();
  summary["n_features"] = ds.n_features();
  summary["class_counts"] = class_counts(ds);

  ModelFile model;
  if (kind == ModelKind::MuyGps) {
    TrainConfig cfg;
    cfg.nn_count = cmd.nn.value_or(ds.n_classes() == 2 ? 50 : 35);
    cfg.batch_size = std::min(cmd.batch, ds.size());
    cfg.seed = derive_seed(common.seed, seed_stream::kBatch);
    cfg.max_evaluations = cmd.max_evals;
    cfg.length_scale_lower = cmd.ls_lower;
    cfg.length_scale_upper = cmd.ls_upper;
    cfg.optimize_noise = cmd.optimize_noise;
    std::vector<TrainSummary> summaries;
    MuyGpsClassifier clf = MuyGpsClassifier::train(ds, cfg, cmd.kernel, &summaries);
    const auto rows = calibration_rows(ds.labels, ds.n_classes(), cmd.calibration_fraction,
                                       derive_seed(common.seed, seed_stream::kCalibration));
    const auto calibration = clf.calibrate(rows, kCalibrationTau);

    summary["nn_count"] = cfg.nn_count;
    summary["batch_size"] = cfg.batch_size;
    json heads = json::array();
    for (std::size_t h = 0; h < summaries.size(); ++h) {
      if (summaries[h].single_class_batch)
        std::cerr << "warning: head " << h << " trained on a single-class batch\n";
      heads.push_back({{"positive_class", clf.head_class(h)},
                       {"initial_loss", summaries[h].initial_loss},
                       {"final_loss", summaries[h].final_loss},
                       {"evaluations", summaries[h].evaluations},
                       {"single_class_batch", summaries[h].single_class_batch},
                       {"kernel", kernel_json(clf.heads()[h].params())},
                       {"calibration", calibration_json(calibration[h])}});
    }
    summary["heads"] = std::move(heads);
    model = to_model_file(clf);
  } else if (kind == ModelKind::Gp) {
    if (ds.size() > kGpMaxTrain)
      throw InvalidArgument("full GP limited to " + std::to_string(kGpMaxTrain) + " training rows, got " +
                            std::to_string(ds.size()));
    model.kind = ModelKind::Gp;
    model.class_names = ds.class_names;
    model.labels = ds.labels;
    model.features = ds.features;
    model.heads = indicator_heads(ds.labels, ds.n_classes(), cmd.kernel);
    summary["kernel"] = kernel_json(cmd.kernel);
  } else {
    model.kind = ModelKind::Knn;
    model.nn_count = cmd.knn_k;
    model.class_names = ds.class_names;
    model.labels = ds.labels;
    model.features = ds.features;
    summary["k"] = cmd.knn_k;
  }
  model.metadata["truncate"] = std::to_string(cmd.data.truncate);
  model.metadata["seed"] = std::to_string(common.seed);
  save_model(model, cmd.out);

  if (cmd.timing)
    summary["elapsed_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string text = summary.dump(2) + "\n";
  write_text(cmd.summary_out.empty() ? cmd.out + ".summary.json" : cmd.summary_out, text);
  std::cout << text;
  return 0;
}

// ---------------------------------------------------------------------------

Dataset load_for_model(const DataOptions& data, const ModelFile& model, bool allow_empty) {
  std::size_t width = data.truncate;
  if (width == 0) {
    const auto it = model.metadata.find("truncate");
    if (it != model.metadata.end()) width = std::stoul(it->second);
  }
  Dataset ds = maybe_truncate(load_data(data.paths, model.class_names.size(), allow_empty), width);
  ds.class_names = model.class_names;
  if (ds.n_features() != model.n_features() && !(ds.size() == 0 && ds.n_features() == 0))
    throw InvalidArgument("data has " + std::to_string(ds.n_features()) + " features, model expects " +
                          std::to_string(model.n_features()));
  return ds;
}

struct PredictCmd {
  std::string model;
  DataOptions data;
  std::string out;
};

int run_predict(const PredictCmd& cmd, const CommonOptions&) {
  if (!fs::exists(cmd.model)) throw IoError("no such file: '" + cmd.model + "'");
  const ModelFile model = load_model(cmd.model);
  const Dataset ds = load_for_model(cmd.data, model, true);
  FeatureMatrix test = ds.features;
  if (ds.size() == 0) test.resize(0, static_cast<Eigen::Index>(model.n_features()));

  std::string out;
  if (model.kind == ModelKind::Knn) {
    out = "index,probability,variance,predicted_label\n";
    const auto votes = to_knn(model).predict(test);
    for (std::size_t i = 0; i < votes.size(); ++i)
      out += std::to_string(i) + "," + number(votes[i].fractions[static_cast<std::size_t>(votes[i].label)]) +
             ",0," + std::to_string(votes[i].label) + "\n";
  } else {
    const ClassifierPrediction pred =
        model.kind == ModelKind::MuyGps ? to_classifier(model).predict(test) : gp_predict(model, test);
    out = "index,latent_mean,variance,predicted_label\n";
    for (std::size_t i = 0; i < pred.combined.size(); ++i)
      out += std::to_string(i) + "," + number(pred.combined[i].mean) + "," + number(pred.combined[i].variance) +
             "," + std::to_string(pred.labels[i]) + "\n";
  }
  write_text(cmd.out, out);
  return 0;
}

// ---------------------------------------------------------------------------

struct EvaluateCmd {
  std::string predictions;
  DataOptions data;
  std::string out;
};

std::vector<int> read_prediction_labels(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("no such file: '" + path.string() + "'");
  std::ifstream in(path);
  std::string line;
  std::vector<int> labels;
  std::getline(in, line);  // header
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.rfind(',');
    try {
      labels.push_back(std::stoi(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw FormatError("'" + path.string() + "' line " + std::to_string(line_no) + ": bad predicted_label");
    }
  }
  return labels;
}

int run_evaluate(const EvaluateCmd& cmd, const CommonOptions&) {
  const auto preds = read_prediction_labels(cmd.predictions);
  const Dataset truth = load_data(cmd.data.paths, cmd.data.classes);
  const double acc = accuracy(preds, truth.labels);
  json j;
  j["n"] = preds.size();
  j["accuracy"] = acc;
  j["confusion"] = confusion_matrix(preds, truth.labels, truth.n_classes());
  j["class_names"] = truth.class_names;
  const std::string text = j.dump(2) + "\n";
  if (!cmd.out.empty()) write_text(cmd.out, text);
  std::cout << text;
  return 0;
}

// ---------------------------------------------------------------------------

struct UqCmd {
  std::string model;
  DataOptions data;
  std::string out_json;
  std::string out_csv;
  std::vector<double> taus;
  double calibration_fraction = 0.1;
  std::size_t runs = 30;
};

TauGrid tau_grid(const std::vector<double>& taus) {
  return taus.empty() ? TauGrid::standard() : TauGrid::from_taus(taus);
}

void write_reports(const UqReport& report, const std::string& out_json, const std::string& out_csv) {
  if (!out_json.empty()) emit_report(report, out_json, ReportFormat::Json);
  if (!out_csv.empty()) emit_report(report, out_csv, ReportFormat::Csv);
  std::cout << report_to_csv(report);
}

std::size_t floor_hits(const std::vector<std::vector<LatentPrediction>>& per_head) {
  std::size_t hits = 0;
  for (const auto& head : per_head)
    for (const auto& p : head) hits += p.variance <= 1e-12 ? 1 : 0;
  return hits;
}

// Vote-fraction intervals around 0.5, union over classes.
std::vector<LatentPrediction> knn_uq_predictions(const Dataset& train, const FeatureMatrix& test, std::size_t k,
                                                 std::size_t runs, Seed seed, const TauGrid& grid) {
  const KnnModel full = KnnModel::fit(train, k);
  const auto votes = full.predict(test);
  const RepeatedRuns rep = knn_repeated_runs(train, test, k, runs, seed);
  std::vector<LatentPrediction> out(votes.size());
  for (std::size_t j = 0; j < votes.size(); ++j) {
    const auto c = static_cast<Eigen::Index>(votes[j].label);
    const auto row = static_cast<Eigen::Index>(j);
    out[j].label = votes[j].label;
    out[j].mean = rep.mean(row, c);
    out[j].variance = rep.variance(row, c);
    for (double tau : grid.taus) {
      bool amb = false;
      for (Eigen::Index cls = 0; cls < rep.mean.cols(); ++cls)
        amb = amb || probabilistic_ambiguity(std::clamp(rep.mean(row, cls), 0.0, 1.0), rep.variance(row, cls), tau);
      out[j].ambiguous_at[tau] = amb;
    }
  }
  return out;
}

int run_uq_report(const UqCmd& cmd, const CommonOptions& common) {
  if (!fs::exists(cmd.model)) throw IoError("no such file: '" + cmd.model + "'");
  const ModelFile model = load_model(cmd.model);
  const Dataset test = load_for_model(cmd.data, model, false);
  const TauGrid grid = tau_grid(cmd.taus);

  UqReport report;
  std::vector<LatentPrediction> combined;
  std::string notes;
  if (model.kind == ModelKind::MuyGps) {
    MuyGpsClassifier clf = to_classifier(model);
    const auto rows = calibration_rows(model.labels, model.class_names.size(), cmd.calibration_fraction,
                                       derive_seed(common.seed, seed_stream::kCalibration));
    if (rows.size() < 10) std::cerr << "warning: calibration slice has only " << rows.size() << " rows\n";
    report.calibration = clf.calibrate(rows, kCalibrationTau);
    ClassifierPrediction pred = clf.predict(test.features);
    pred.annotate(grid);
    combined = std::move(pred.combined);
    notes = "interval f +- tau*sigma around 0; sigma2 per head minimizes alpha + (1 - beta) at tau 1.96 on a "
            "leave-one-out stratified training slice";
    if (!clf.binary()) notes += "; one-versus-all union of per-class ambiguity";
    const std::size_t hits = floor_hits(pred.per_head);
    report.metadata["variance_floor_hits"] = std::to_string(hits);
    if (hits > 0)
      report.metadata["gaussianity_note"] =
          "variance floor reached; latent Gaussianity is assumed, a Chebyshev bound (1/tau^2 tail) is the "
          "distribution-free fallback";
  } else if (model.kind == ModelKind::Gp) {
    ClassifierPrediction pred = gp_predict(model, test.features);
    pred.annotate(grid);
    combined = std::move(pred.combined);
    notes = "full GP posterior interval around 0 with the stored sigma2 (no calibration)";
    report.metadata["variance_floor_hits"] = std::to_string(floor_hits(pred.per_head));
  } else {
    Dataset train;
    train.features = model.features;
    train.labels = model.labels;
    train.class_names = model.class_names;
    combined = knn_uq_predictions(train, test.features, model.nn_count, cmd.runs,
                                  derive_seed(common.seed, seed_stream::kKnnRuns), grid);
    notes = "bootstrap-resampled KNN ensemble; vote-fraction interval around 0.5, union over classes";
    report.metadata["runs"] = std::to_string(cmd.runs);
  }

  UqReport swept = tau_sweep(combined, test.labels, grid, model.class_names);
  swept.calibration = std::move(report.calibration);
  swept.metadata = std::move(report.metadata);
  swept.metadata["model_path"] = cmd.model;
  swept.metadata["model_fnv1a"] = file_fingerprint(cmd.model);
  swept.metadata["model_kind"] = to_string(model.kind);
  swept.metadata["dataset_path"] = join_paths(cmd.data.paths);
  swept.metadata["seed"] = std::to_string(common.seed);
  swept.metadata["calibration_fraction"] = number(cmd.calibration_fraction);
  swept.metadata["method"] = notes;
  std::string taus;
  for (double t : grid.taus) taus += (taus.empty() ? "" : ",") + number(t);
  swept.metadata["tau_grid"] = taus;
  write_reports(swept, cmd.out_json, cmd.out_csv);
  return 0;
}

// ---------------------------------------------------------------------------

struct BaselineKnnCmd {
  DataOptions train;
  DataOptions test;
  std::size_t k = 3;
  std::size_t runs = 30;
  std::vector<double> taus;
  std::string out_json;
  std::string out_csv;
  std::string predictions_out;
};

int run_baseline_knn(const BaselineKnnCmd& cmd, const CommonOptions& common) {
  const Dataset train = maybe_truncate(load_data(cmd.train.paths, cmd.train.classes), cmd.train.truncate);
  Dataset test = maybe_truncate(load_data(cmd.test.paths, train.n_classes()), cmd.train.truncate);
  test.class_names = train.class_names;
  const TauGrid grid = tau_grid(cmd.taus);
  const auto preds = knn_uq_predictions(train, test.features, cmd.k, cmd.runs,
                                        derive_seed(common.seed, seed_stream::kKnnRuns), grid);
  UqReport report = tau_sweep(preds, test.labels, grid, train.class_names);
  report.metadata["model_kind"] = "knn";
  report.metadata["k"] = std::to_string(cmd.k);
  report.metadata["runs"] = std::to_string(cmd.runs);
  report.metadata["train_path"] = join_paths(cmd.train.paths);
  report.metadata["dataset_path"] = join_paths(cmd.test.paths);
  report.metadata["truncate"] = std::to_string(cmd.train.truncate);
  report.metadata["seed"] = std::to_string(common.seed);
  report.metadata["method"] = "bootstrap-resampled KNN ensemble; vote-fraction interval around 0.5, union over classes";
  if (!cmd.predictions_out.empty()) {
    std::string out = "index,probability,variance,predicted_label\n";
    for (std::size_t i = 0; i < preds.size(); ++i)
      out += std::to_string(i) + "," + number(preds[i].mean) + "," + number(preds[i].variance) + "," +
             std::to_string(preds[i].label) + "\n";
    write_text(cmd.predictions_out, out);
  }
  write_reports(report, cmd.out_json, cmd.out_csv);
  return 0;
}

// ---------------------------------------------------------------------------

// Appends flags from a --config JSON object that are not already on the command line.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::string config_path;
  for (std::size_t i = 0; i + 1 < args.size(); ++i)
    if (args[i] == "--config") config_path = args[i + 1];
  if (config_path.empty()) return args;
  std::ifstream in(config_path);
  if (!in) throw IoError("no such file: '" + config_path + "'");
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError("config '" + config_path + "': " + e.what());
  }
  if (!cfg.is_object()) throw FormatError("config '" + config_path + "': expected a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    bool present = false;
    for (const auto& a : args) present = present || a == flag || a.rfind(flag + "=", 0) == 0;
    if (present) continue;
    auto push = [&](const json& v) {
      args.push_back(flag);
      if (v.is_string()) {
        args.push_back(v.get<std::string>());
      } else if (v.is_boolean()) {
        if (!v.get<bool>()) args.pop_back();
      } else {
        args.push_back(v.dump());
      }
    };
    if (value.is_array()) {
      for (const auto& v : value) push(v);
    } else {
      push(value);
    }
  }
  return args;
}

void add_data_options(CLI::App* app, DataOptions& data, const std::string& flag, bool truncate_default_80) {
  app->add_option(flag, data.paths, "Input CSV file(s); rows are features followed by an integer label")
      ->required()
      ->take_all();
  data.truncate = truncate_default_80 ? 80 : 0;
  app->add_option("--truncate", data.truncate, "Keep only the first N features (0 keeps all)")
      ->capture_default_str();
  app->add_option("--classes", data.classes, "Declared number of classes");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nearest-neighbor Gaussian process ECG heartbeat classifier"};
  app.require_subcommand(1);
  CommonOptions common;
  std::string config;
  std::optional<std::size_t> threads;
  app.add_option("--seed", common.seed, "Master random seed")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads (default: MUYGPS_THREADS or all cores)");
  app.add_option("--config", config, "JSON file of flag values; command-line flags take precedence");
  app.fallthrough();

  SplitCmd split;
  auto* split_app = app.add_subcommand("split", "Stratified train/test split");
  add_data_options(split_app, split.data, "--data", false);
  split_app->add_option("--test-fraction", split.test_fraction)->capture_default_str();
  split_app->add_option("--train-out", split.train_out)->required();
  split_app->add_option("--test-out", split.test_out)->required();
  split_app->add_option("--meta-out", split.meta_out, "Split metadata JSON");

  SmoteCmd smote;
  auto* smote_app = app.add_subcommand("smote", "Oversample minority classes with SMOTE");
  add_data_options(smote_app, smote.data, "--data", false);
  smote_app->add_option("--out", smote.out)->required();
  smote_app->add_option("--provenance-out", smote.provenance_out, "JSON lines {row, source, neighbor, r}");
  smote_app->add_option("--ratio", smote.ratio, "Target minority/majority ratio")->capture_default_str();
  smote_app->add_option("--k", smote.k, "Nearest minority neighbors")->capture_default_str();

  TrainCmd train;
  auto* train_app = app.add_subcommand("train", "Train a muygps, gp or knn model");
  add_data_options(train_app, train.data, "--data", true);
  train_app->add_option("--model", train.model_kind, "muygps | gp | knn")->capture_default_str();
  train_app->add_option("--nn", train.nn, "Neighbors per prediction (default 50 binary, 35 multi-class)");
  train_app->add_option("--k", train.knn_k, "Voters for --model knn")->capture_default_str();
  train_app->add_option("--nu", train.kernel.nu)->capture_default_str();
  train_app->add_option("--length-scale", train.kernel.length_scale, "Initial length scale")->capture_default_str();
  train_app->add_option("--noise", train.kernel.noise)->capture_default_str();
  train_app->add_option("--batch", train.batch, "Leave-one-out batch size")->capture_default_str();
  train_app->add_option("--max-evals", train.max_evals)->capture_default_str();
  train_app->add_option("--ls-lower", train.ls_lower)->capture_default_str();
  train_app->add_option("--ls-upper", train.ls_upper)->capture_default_str();
  train_app->add_flag("--optimize-noise", train.optimize_noise, "Also fit the noise variance");
  train_app->add_option("--calibration-fraction", train.calibration_fraction)->capture_default_str();
  train_app->add_option("--out", train.out)->required();
  train_app->add_option("--summary-out", train.summary_out, "Training summary JSON (default <out>.summary.json)");
  train_app->add_flag("--timing", train.timing, "Record elapsed time in the summary");

  PredictCmd predict;
  auto* predict_app = app.add_subcommand("predict", "Predict a CSV with a trained model");
  predict_app->add_option("--model", predict.model)->required();
  add_data_options(predict_app, predict.data, "--data", false);
  predict_app->add_option("--out", predict.out)->required();

  UqCmd uq;
  auto* uq_app = app.add_subcommand("uq-report", "Calibrate, predict and sweep prediction-interval widths");
  uq_app->add_option("--model", uq.model)->required();
  add_data_options(uq_app, uq.data, "--data", false);
  uq_app->add_option("--out-json", uq.out_json);
  uq_app->add_option("--out-csv", uq.out_csv);
  uq_app->add_option("--tau", uq.taus, "Interval multipliers (default 0.994 1.28 1.64 1.96 2.58)");
  uq_app->add_option("--calibration-fraction", uq.calibration_fraction)->capture_default_str();
  uq_app->add_option("--runs", uq.runs, "Bootstrap runs for knn models")->capture_default_str();

  EvaluateCmd evaluate;
  auto* eval_app = app.add_subcommand("evaluate", "Accuracy and confusion matrix of a predictions CSV");
  eval_app->add_option("--predictions", evaluate.predictions)->required();
  add_data_options(eval_app, evaluate.data, "--data", false);
  eval_app->add_option("--out", evaluate.out);

  BaselineKnnCmd knn;
  auto* knn_app = app.add_subcommand("baseline-knn", "KNN baseline with bootstrap-ensemble ambiguity report");
  add_data_options(knn_app, knn.train, "--train", true);
  knn_app->add_option("--test", knn.test.paths)->required()->take_all();
  knn_app->add_option("--k", knn.k)->capture_default_str();
  knn_app->add_option("--runs", knn.runs)->capture_default_str();
  knn_app->add_option("--tau", knn.taus);
  knn_app->add_option("--out-json", knn.out_json);
  knn_app->add_option("--out-csv", knn.out_csv);
  knn_app->add_option("--predictions-out", knn.predictions_out);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = merge_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  if (!threads) {
    if (const char* env = std::getenv("MUYGPS_THREADS")) threads = std::strtoul(env, nullptr, 10);
  }
  set_thread_count(threads.value_or(0));

  try {
    if (*split_app) return run_split(split, common);
    if (*smote_app) return run_smote(smote, common);
    if (*train_app) return run_train(train, common);
    if (*predict_app) return run_predict(predict, common);
    if (*uq_app) return run_uq_report(uq, common);
    if (*eval_app) return run_evaluate(evaluate, common);
    if (*knn_app) return run_baseline_knn(knn, common);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
