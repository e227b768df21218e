#include "muygps/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string_view>

#include "json.hpp"

#include "muygps/error.hpp"
#include "muygps/nn_index.hpp"
#include "muygps/random.hpp"

namespace muygps {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view cell, double& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const auto* end = cell.data() + cell.size();
  const auto res = std::from_chars(cell.data(), end, out);
  return res.ec == std::errc{} && res.ptr == end;
}

void split_cells(std::string_view line, std::vector<std::string_view>& cells) {
  cells.clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return buf.str();
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct ParsedRows {
  std::vector<double> values;
  std::vector<int> labels;
  std::size_t width = 0;
};

void parse_into(const std::filesystem::path& path, const CsvOptions& options, ParsedRows& rows) {
  const std::string text = read_file(path);
  const std::string where = "'" + path.string() + "' line ";
  std::vector<std::string_view> cells;
  std::string_view rest(text);
  std::size_t line_no = 0;
  bool first_content = true;
  while (!rest.empty()) {
    const std::size_t nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    if (trim(line).empty()) continue;
    split_cells(line, cells);

    const std::size_t n_cols = cells.size();
    if (n_cols < 2) throw FormatError(where + std::to_string(line_no) + ": need at least one feature and a label");
    const std::size_t label_col = options.label_column.value_or(n_cols - 1);
    if (label_col >= n_cols)
      throw FormatError(where + std::to_string(line_no) + ": label column " + std::to_string(label_col) +
                        " out of range");

    double first = 0.0;
    if (first_content && !parse_double(cells[0], first)) {
      first_content = false;
      continue;  // header
    }
    first_content = false;

    if (rows.width == 0) {
      rows.width = n_cols - 1;
    } else if (n_cols - 1 != rows.width) {
      throw FormatError(where + std::to_string(line_no) + ": expected " + std::to_string(rows.width + 1) +
                        " columns, found " + std::to_string(n_cols));
    }
    for (std::size_t c = 0; c < n_cols; ++c) {
      double v = 0.0;
      if (!parse_double(cells[c], v))
        throw FormatError(where + std::to_string(line_no) + ": non-numeric cell in column " + std::to_string(c));
      if (c == label_col) {
        if (!std::isfinite(v) || v != std::floor(v) || v < 0.0 || v > 1e6)
          throw FormatError(where + std::to_string(line_no) + ": label is not a non-negative integer");
        const int label = static_cast<int>(v);
        if (options.n_classes && static_cast<std::size_t>(label) >= *options.n_classes)
          throw FormatError(where + std::to_string(line_no) + ": label " + std::to_string(label) +
                            " outside declared range [0, " + std::to_string(*options.n_classes) + ")");
        rows.labels.push_back(label);
      } else {
        rows.values.push_back(v);
      }
    }
  }
}

Dataset finish(ParsedRows rows, const CsvOptions& options, const std::string& what) {
  if (rows.labels.empty() && !options.allow_empty) throw FormatError(what + ": no samples");
  Dataset ds;
  const auto n = static_cast<Eigen::Index>(rows.labels.size());
  const auto d = static_cast<Eigen::Index>(rows.width);
  ds.features = Eigen::Map<const FeatureMatrix>(rows.values.data(), n, d);
  ds.labels = std::move(rows.labels);
  std::size_t n_classes = 0;
  if (options.n_classes) {
    n_classes = *options.n_classes;
  } else if (!ds.labels.empty()) {
    n_classes = static_cast<std::size_t>(*std::max_element(ds.labels.begin(), ds.labels.end())) + 1;
  }
  if (!options.class_names.empty()) {
    if (options.class_names.size() < n_classes)
      throw InvalidArgument(what + ": " + std::to_string(n_classes) + " classes but only " +
                            std::to_string(options.class_names.size()) + " class names");
    ds.class_names = options.class_names;
  } else {
    ds.class_names = default_class_names(n_classes);
  }
  return ds;
}

}  // namespace

void Dataset::validate(bool allow_empty) const {
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    throw InvalidArgument("dataset: " + std::to_string(features.rows()) + " feature rows but " +
                          std::to_string(labels.size()) + " labels");
  if (!allow_empty && labels.empty()) throw InvalidArgument("dataset: no samples");
  if (!allow_empty && features.cols() == 0) throw InvalidArgument("dataset: no features");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= class_names.size())
      throw InvalidArgument("dataset: label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                            " outside [0, " + std::to_string(class_names.size()) + ")");
  }
}

std::vector<std::string> default_class_names(std::size_t n_classes) {
  if (n_classes == 2) return {"normal", "abnormal"};
  if (n_classes == 5) return {"N", "S", "V", "F", "Q"};
  std::vector<std::string> names;
  for (std::size_t c = 0; c < n_classes; ++c) names.push_back("class" + std::to_string(c));
  return names;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  ParsedRows rows;
  parse_into(path, options, rows);
  return finish(std::move(rows), options, "'" + path.string() + "'");
}

Dataset load_csv(std::span<const std::filesystem::path> paths, const CsvOptions& options) {
  if (paths.empty()) throw InvalidArgument("load_csv: no input files");
  ParsedRows rows;
  std::string what;
  for (const auto& p : paths) {
    const std::size_t before = rows.width;
    parse_into(p, options, rows);
    if (before != 0 && rows.width != before)
      throw FormatError("'" + p.string() + "': feature count differs from earlier files");
    what += (what.empty() ? "'" : ", '") + p.string() + "'";
  }
  return finish(std::move(rows), options, what);
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  std::string line;
  for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < ds.features.cols(); ++j) {
      line += format_double(ds.features(i, j));
      line += ',';
    }
    line += std::to_string(ds.labels[static_cast<std::size_t>(i)]);
    line += '\n';
    out << line;
  }
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

Dataset truncate(const Dataset& ds, std::size_t width) {
  if (width == 0) throw InvalidArgument("truncate: width must be positive");
  if (width > ds.n_features())
    throw InvalidArgument("truncate: width " + std::to_string(width) + " exceeds " +
                          std::to_string(ds.n_features()) + " features");
  Dataset out;
  out.features = ds.features.leftCols(static_cast<Eigen::Index>(width));
  out.labels = ds.labels;
  out.class_names = ds.class_names;
  return out;
}

Dataset subset(const Dataset& ds, std::span<const std::size_t> rows) {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), ds.features.cols());
  out.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= ds.size()) throw InvalidArgument("subset: row " + std::to_string(rows[i]) + " out of range");
    out.features.row(static_cast<Eigen::Index>(i)) = ds.features.row(static_cast<Eigen::Index>(rows[i]));
    out.labels.push_back(ds.labels[rows[i]]);
  }
  out.class_names = ds.class_names;
  return out;
}

std::vector<std::size_t> class_counts(const Dataset& ds) {
  std::vector<std::size_t> counts(ds.n_classes(), 0);
  for (int label : ds.labels) ++counts.at(static_cast<std::size_t>(label));
  return counts;
}

Split stratified_split(const Dataset& ds, double test_fraction, Seed seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw InvalidArgument("stratified_split: test fraction must lie in (0, 1)");
  std::vector<std::vector<std::size_t>> by_class(ds.n_classes());
  for (std::size_t i = 0; i < ds.size(); ++i) by_class[static_cast<std::size_t>(ds.labels[i])].push_back(i);

  std::vector<char> is_test(ds.size(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (members.empty()) continue;
    if (members.size() < 2)
      throw InvalidArgument("stratified_split: class " + std::to_string(c) + " has fewer than 2 samples");
    std::shuffle(members.begin(), members.end(), rng);
    auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(members.size()) * test_fraction));
    n_test = std::clamp<std::size_t>(n_test, 1, members.size() - 1);
    for (std::size_t j = 0; j < n_test; ++j) is_test[members[j]] = 1;
  }

  Split split;
  for (std::size_t i = 0; i < ds.size(); ++i) (is_test[i] ? split.test_rows : split.train_rows).push_back(i);
  split.train = subset(ds, split.train_rows);
  split.test = subset(ds, split.test_rows);
  return split;
}

SignedLabels::SignedLabels(std::span<const int> labels, int positive_class)
    : values_(static_cast<Eigen::Index>(labels.size())) {
  for (std::size_t i = 0; i < labels.size(); ++i)
    values_[static_cast<Eigen::Index>(i)] = labels[i] == positive_class ? 1.0 : -1.0;
}

SignedLabels::SignedLabels(Vector values) : values_(std::move(values)) {
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (values_[i] != 1.0 && values_[i] != -1.0)
      throw InvalidArgument("signed labels must be +1 or -1 (entry " + std::to_string(i) + ")");
  }
}

void SmoteConfig::validate() const {
  if (k_neighbors < 1) throw InvalidArgument("smote: k_neighbors must be at least 1");
  if (!(ratio > 0.0 && ratio <= 1.0)) throw InvalidArgument("smote: ratio must lie in (0, 1]");
}

RowVector smote_interpolate(const RowVector& x, const RowVector& neighbor, double r) {
  return x + r * (neighbor - x);
}

SmoteResult smote_oversample(const Dataset& ds, const SmoteConfig& cfg) {
  cfg.validate();
  ds.validate();
  const auto counts = class_counts(ds);
  std::size_t populated = 0;
  for (auto c : counts) populated += c > 0 ? 1 : 0;
  if (populated < 2) throw InvalidArgument("smote: need at least two populated classes");

  const auto majority = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  const double raw_target = cfg.ratio * static_cast<double>(counts[majority]);
  const double rounded = std::round(raw_target);
  const auto target = static_cast<std::size_t>(std::abs(raw_target - rounded) < 1e-9 ? rounded : std::ceil(raw_target));

  SmoteResult result;
  std::vector<RowVector> synthetic;
  std::vector<int> synthetic_labels;

  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (c == majority || counts[c] == 0 || counts[c] >= target) continue;
    if (counts[c] <= cfg.k_neighbors)
      throw InvalidArgument("smote: class " + std::to_string(c) + " has " + std::to_string(counts[c]) +
                            " samples, need more than k_neighbors = " + std::to_string(cfg.k_neighbors));
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (static_cast<std::size_t>(ds.labels[i]) == c) members.push_back(i);

    auto class_rows = std::make_shared<FeatureMatrix>(static_cast<Eigen::Index>(members.size()), ds.features.cols());
    for (std::size_t j = 0; j < members.size(); ++j)
      class_rows->row(static_cast<Eigen::Index>(j)) = ds.features.row(static_cast<Eigen::Index>(members[j]));
    const auto index = NnIndex::build(std::shared_ptr<const FeatureMatrix>(class_rows));
    std::vector<std::size_t> local(members.size());
    std::iota(local.begin(), local.end(), std::size_t{0});
    const auto neighborhoods = index.query_training_rows(local, cfg.k_neighbors);

    std::mt19937_64 rng(derive_seed(cfg.seed, c));
    std::uniform_int_distribution<std::size_t> pick_source(0, members.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_neighbor(0, cfg.k_neighbors - 1);
    std::uniform_real_distribution<double> pick_r(0.0, 1.0);
    for (std::size_t made = counts[c]; made < target; ++made) {
      const std::size_t src = pick_source(rng);
      const std::size_t nb = neighborhoods[src].indices[pick_neighbor(rng)];
      const double r = pick_r(rng);
      synthetic.push_back(smote_interpolate(class_rows->row(static_cast<Eigen::Index>(src)),
                                            class_rows->row(static_cast<Eigen::Index>(nb)), r));
      synthetic_labels.push_back(static_cast<int>(c));
      result.provenance.push_back({ds.size() + synthetic.size() - 1, members[src], members[nb], r});
    }
  }

  Dataset& out = result.data;
  out.class_names = ds.class_names;
  out.features.resize(static_cast<Eigen::Index>(ds.size() + synthetic.size()), ds.features.cols());
  out.features.topRows(ds.features.rows()) = ds.features;
  for (std::size_t s = 0; s < synthetic.size(); ++s)
    out.features.row(static_cast<Eigen::Index>(ds.size() + s)) = synthetic[s];
  out.labels = ds.labels;
  out.labels.insert(out.labels.end(), synthetic_labels.begin(), synthetic_labels.end());
  return result;
}

void write_provenance_jsonl(std::span<const SmoteProvenance> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (const auto& rec : records) {
    nlohmann::ordered_json j;
    j["row"] = rec.row;
    j["source"] = rec.source;
    j["neighbor"] = rec.neighbor;
    j["r"] = rec.r;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

std::vector<SmoteProvenance> read_provenance_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<SmoteProvenance> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      records.push_back({j.at("row").get<std::size_t>(), j.at("source").get<std::size_t>(),
                         j.at("neighbor").get<std::size_t>(), j.at("r").get<double>()});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("'" + path.string() + "' line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return records;
}

std::vector<std::size_t> sample_batch(std::size_t n_train, std::size_t batch_size, Seed seed) {
  if (batch_size < 1 || batch_size > n_train)
    throw InvalidArgument("sample_batch: batch size " + std::to_string(batch_size) + " not in [1, " +
                          std::to_string(n_train) + "]");
  std::vector<std::size_t> pool(n_train);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < batch_size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n_train - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(batch_size);
  return pool;
}

}  // namespace muygps
