#include "muygps/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"

#include "muygps/error.hpp"
#include "muygps/gp_exact.hpp"

namespace muygps {

static_assert(std::endian::native == std::endian::little, "model files are written in little-endian byte order");

namespace {

constexpr char kMagic[8] = {'M', 'U', 'Y', 'G', 'P', 'S', 'M', 'F'};

using json = nlohmann::ordered_json;

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::string& what) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw FormatError("model file truncated while reading " + what);
  return v;
}

void read_bytes(std::ifstream& in, void* dst, std::size_t bytes, const std::string& what) {
  in.read(static_cast<char*>(dst), static_cast<std::streamsize>(bytes));
  if (!in) throw FormatError("model file truncated while reading " + what);
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::MuyGps:
      return "muygps";
    case ModelKind::Gp:
      return "gp";
    case ModelKind::Knn:
      return "knn";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& text) {
  if (text == "muygps") return ModelKind::MuyGps;
  if (text == "gp") return ModelKind::Gp;
  if (text == "knn") return ModelKind::Knn;
  throw InvalidArgument("unknown model kind '" + text + "' (expected muygps, gp or knn)");
}

void ModelFile::validate() const {
  if (labels.empty()) throw FormatError("model: no training rows");
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    throw FormatError("model: feature rows do not match labels");
  if (class_names.size() < 2) throw FormatError("model: need at least two classes");
  for (int l : labels)
    if (l < 0 || static_cast<std::size_t>(l) >= class_names.size()) throw FormatError("model: label out of range");
  if (kind != ModelKind::Knn) {
    const std::size_t expected = class_names.size() == 2 ? 1 : class_names.size();
    if (heads.size() != expected) throw FormatError("model: wrong number of heads");
    for (const auto& h : heads) {
      if (static_cast<std::size_t>(h.targets.size()) != labels.size())
        throw FormatError("model: head target length does not match training rows");
      h.params.validate();
    }
  }
  if (kind != ModelKind::Gp && (nn_count < 1 || nn_count > labels.size()))
    throw FormatError("model: nn_count out of range");
}

void save_model(const ModelFile& model, const std::filesystem::path& path) {
  model.validate();
  json header;
  header["format_version"] = ModelFile::kFormatVersion;
  header["kind"] = to_string(model.kind);
  header["nn_count"] = model.nn_count;
  header["n_train"] = model.n_train();
  header["n_features"] = model.n_features();
  header["class_names"] = model.class_names;
  json heads = json::array();
  for (const auto& h : model.heads) {
    heads.push_back({{"positive_class", h.positive_class},
                     {"kernel",
                      {{"nu", h.params.nu},
                       {"l", h.params.length_scale},
                       {"noise", h.params.noise},
                       {"sigma2", h.params.sigma2}}}});
  }
  header["heads"] = std::move(heads);
  json meta = json::object();
  for (const auto& [k, v] : model.metadata) meta[k] = v;
  header["metadata"] = std::move(meta);
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, ModelFile::kFormatVersion);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (int l : model.labels) put<std::int32_t>(out, l);
  out.write(reinterpret_cast<const char*>(model.features.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(model.features.size())));
  for (const auto& h : model.heads)
    out.write(reinterpret_cast<const char*>(h.targets.data()),
              static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(h.targets.size())));
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  char magic[8];
  read_bytes(in, magic, sizeof(magic), "magic");
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw FormatError("'" + path.string() + "' is not a muygps model file");
  const auto version = get<std::uint32_t>(in, "format version");
  if (version != ModelFile::kFormatVersion)
    throw FormatError("unsupported model format version " + std::to_string(version));
  const auto header_len = get<std::uint64_t>(in, "header length");
  if (header_len > (1u << 30)) throw FormatError("model header length is implausible");
  std::string text(header_len, '\0');
  read_bytes(in, text.data(), text.size(), "header");

  ModelFile model;
  std::size_t n = 0;
  std::size_t d = 0;
  try {
    const json header = json::parse(text);
    model.kind = parse_model_kind(header.at("kind").get<std::string>());
    model.nn_count = header.at("nn_count").get<std::size_t>();
    n = header.at("n_train").get<std::size_t>();
    d = header.at("n_features").get<std::size_t>();
    model.class_names = header.at("class_names").get<std::vector<std::string>>();
    for (const auto& h : header.at("heads")) {
      ModelHead head;
      head.positive_class = h.at("positive_class").get<int>();
      const auto& k = h.at("kernel");
      head.params.nu = k.at("nu").get<double>();
      head.params.length_scale = k.at("l").get<double>();
      head.params.noise = k.at("noise").get<double>();
      head.params.sigma2 = k.at("sigma2").get<double>();
      model.heads.push_back(std::move(head));
    }
    for (const auto& [k, v] : header.at("metadata").items()) model.metadata[k] = v.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("model header: " + std::string(e.what()));
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("model header: ") + e.what());
  }
  if (n == 0 || d == 0 || n > (1u << 28) || d > (1u << 20)) throw FormatError("model header: implausible shape");

  model.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) model.labels[i] = get<std::int32_t>(in, "labels");
  model.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  read_bytes(in, model.features.data(), sizeof(double) * n * d, "training matrix");
  for (auto& h : model.heads) {
    h.targets.resize(static_cast<Eigen::Index>(n));
    read_bytes(in, h.targets.data(), sizeof(double) * n, "head targets");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("model file has trailing bytes");
  model.validate();
  return model;
}

std::vector<ModelHead> indicator_heads(const std::vector<int>& labels, std::size_t n_classes, const KernelParams& p) {
  const std::size_t n_heads = n_classes == 2 ? 1 : n_classes;
  std::vector<ModelHead> heads;
  for (std::size_t h = 0; h < n_heads; ++h) {
    ModelHead head;
    head.positive_class = static_cast<int>(h);
    head.params = p;
    head.targets = SignedLabels(labels, static_cast<int>(h)).values();
    heads.push_back(std::move(head));
  }
  return heads;
}

ModelFile to_model_file(const MuyGpsClassifier& clf) {
  ModelFile model;
  model.kind = ModelKind::MuyGps;
  model.nn_count = clf.nn_count();
  model.class_names = clf.class_names();
  model.labels = clf.labels();
  model.features = clf.index().features();
  for (std::size_t h = 0; h < clf.heads().size(); ++h) {
    ModelHead head;
    head.positive_class = clf.head_class(h);
    head.params = clf.heads()[h].params();
    head.targets = clf.heads()[h].targets();
    model.heads.push_back(std::move(head));
  }
  return model;
}

MuyGpsClassifier to_classifier(const ModelFile& model) {
  if (model.kind != ModelKind::MuyGps) throw InvalidArgument("model is not a MuyGPs model");
  model.validate();
  auto index = std::make_shared<const NnIndex>(NnIndex::build(model.features));
  std::vector<MuyGpsModel> heads;
  for (std::size_t h = 0; h < model.heads.size(); ++h) {
    if (model.heads[h].positive_class != static_cast<int>(h))
      throw FormatError("model: heads must be stored in class order");
    heads.emplace_back(index, model.heads[h].targets, model.heads[h].params, model.nn_count);
  }
  return MuyGpsClassifier(index, model.labels, model.class_names, std::move(heads));
}

KnnModel to_knn(const ModelFile& model) {
  if (model.kind != ModelKind::Knn) throw InvalidArgument("model is not a KNN model");
  model.validate();
  return KnnModel(std::make_shared<const NnIndex>(NnIndex::build(model.features)), model.labels,
                  model.class_names.size(), model.nn_count);
}

ClassifierPrediction gp_predict(const ModelFile& model, const FeatureMatrix& test) {
  if (model.kind != ModelKind::Gp) throw InvalidArgument("model is not a full-GP model");
  model.validate();
  std::vector<std::vector<LatentPrediction>> per_head(model.heads.size());
  if (test.rows() > 0) {
    if (static_cast<std::size_t>(test.cols()) != model.n_features())
      throw InvalidArgument("gp: test has " + std::to_string(test.cols()) + " features, model has " +
                            std::to_string(model.n_features()));
    for (std::size_t h = 0; h < model.heads.size(); ++h) {
      const GpPosterior post = gp_fit_predict(model.features, model.heads[h].targets, test, model.heads[h].params);
      per_head[h].resize(static_cast<std::size_t>(test.rows()));
      for (Eigen::Index j = 0; j < test.rows(); ++j) {
        auto& p = per_head[h][static_cast<std::size_t>(j)];
        p.mean = post.mean[j];
        p.variance = post.variance[j];
        p.label = post.mean[j] > 0.0 ? 1 : -1;
      }
    }
  }
  return combine_heads(std::move(per_head), model.class_names.size());
}

}  // namespace muygps
