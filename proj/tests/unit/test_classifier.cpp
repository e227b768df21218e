#include <fstream>
#include <sstream>

#include "doctest.h"
#include "muygps/classifier.hpp"
#include "muygps/error.hpp"
#include "muygps/eval.hpp"
#include "muygps/gp_exact.hpp"
#include "muygps/model_io.hpp"
#include "oracles.hpp"

using namespace muygps;

namespace {

// Classes sit in separate corners of the unit square, slightly overlapping.
Dataset corners(std::size_t per_class, std::size_t n_classes, unsigned seed) {
  Dataset ds;
  ds.features = oracle::uniform_matrix(per_class * n_classes, 3, seed, 0.0, 0.6);
  for (std::size_t c = 0; c < n_classes; ++c)
    for (std::size_t i = 0; i < per_class; ++i) {
      const auto row = static_cast<Eigen::Index>(c * per_class + i);
      ds.features(row, static_cast<Eigen::Index>(c % 3)) += 0.5;
      if (c >= 3) ds.features(row, static_cast<Eigen::Index>((c + 1) % 3)) += 0.5;
      ds.labels.push_back(static_cast<int>(c));
    }
  ds.class_names = default_class_names(n_classes);
  return ds;
}

TrainConfig small_config(std::size_t nn) {
  TrainConfig cfg;
  cfg.nn_count = nn;
  cfg.batch_size = 100;
  cfg.seed = 1;
  cfg.max_evaluations = 20;
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("classifier") {
  TEST_CASE("combine heads") {
    LatentPrediction pos, neg, zero;
    pos.mean = 0.4;
    neg.mean = -0.4;
    zero.mean = 0.0;
    const auto bin = combine_heads({{pos, neg, zero}}, 2);
    CHECK(bin.labels == std::vector<int>{0, 1, 1});

    LatentPrediction a, b;
    a.mean = 0.3;
    b.mean = 0.3;
    const auto tie = combine_heads({{neg}, {a}, {b}}, 3);
    CHECK(tie.labels == std::vector<int>{1});
    CHECK(tie.combined[0].mean == 0.3);
  }

  TEST_CASE("binary classifier: one head, +1 side is class 0") {
    const Dataset ds = corners(120, 2, 3);
    std::vector<TrainSummary> summaries;
    const MuyGpsClassifier clf = MuyGpsClassifier::train(ds, small_config(10), KernelParams{}, &summaries);
    CHECK(clf.binary());
    REQUIRE(clf.heads().size() == 1);
    CHECK(clf.head_class(0) == 0);
    CHECK(summaries.size() == 1);
    CHECK(clf.heads()[0].targets()[0] == 1.0);
    CHECK(clf.heads()[0].targets()[200] == -1.0);
    const auto pred = clf.predict(ds.features);
    CHECK(accuracy(pred.labels, ds.labels) > 0.9);
  }

  TEST_CASE("one-versus-all classifier shares an index and annotates the union") {
    const Dataset ds = corners(80, 5, 4);
    const MuyGpsClassifier clf = MuyGpsClassifier::train(ds, small_config(8), KernelParams{});
    REQUIRE(clf.heads().size() == 5);
    for (const auto& h : clf.heads()) CHECK(&h.index() == &clf.index());
    const Dataset test = corners(20, 5, 5);
    ClassifierPrediction pred = clf.predict(test.features);
    CHECK(accuracy(pred.labels, test.labels) > 0.8);
    pred.annotate(TauGrid::standard());
    for (double tau : TauGrid::standard().taus) {
      const auto flags = ova_uncertain_union(pred.per_head, tau);
      for (std::size_t j = 0; j < flags.size(); ++j) CHECK(pred.combined[j].ambiguous_at.at(tau) == flags[j]);
    }
  }

  TEST_CASE("calibration stores a scale per head") {
    const Dataset ds = corners(100, 3, 6);
    MuyGpsClassifier clf = MuyGpsClassifier::train(ds, small_config(10), KernelParams{});
    const std::vector<std::size_t> rows{0, 5, 10, 50, 100, 150, 200, 250, 299, 120, 180, 30};
    const auto res = clf.calibrate(rows, 1.96);
    REQUIRE(res.size() == 3);
    for (std::size_t h = 0; h < 3; ++h) {
      CHECK(clf.heads()[h].params().sigma2 == res[h].sigma2);
      CHECK(res[h].grid.size() == 25);
      for (const auto& g : res[h].grid) CHECK(res[h].objective <= g.objective() + 1e-15);
    }
  }

  TEST_CASE("model file round trip is bit exact and deterministic") {
    const auto dir = oracle::scratch_dir("model");
    const Dataset ds = corners(60, 3, 7);
    MuyGpsClassifier clf = MuyGpsClassifier::train(ds, small_config(8), KernelParams{});
    clf.calibrate(std::vector<std::size_t>{0, 1, 2, 60, 61, 62, 120, 121, 122, 3}, 1.96);
    ModelFile mf = to_model_file(clf);
    mf.metadata["truncate"] = "0";
    save_model(mf, dir / "a.bin");
    save_model(mf, dir / "b.bin");
    CHECK(slurp(dir / "a.bin") == slurp(dir / "b.bin"));

    const ModelFile back = load_model(dir / "a.bin");
    CHECK(back.kind == ModelKind::MuyGps);
    CHECK(back.nn_count == mf.nn_count);
    CHECK(back.features == mf.features);
    CHECK(back.labels == mf.labels);
    CHECK(back.class_names == mf.class_names);
    CHECK(back.metadata == mf.metadata);
    REQUIRE(back.heads.size() == mf.heads.size());
    for (std::size_t h = 0; h < back.heads.size(); ++h) {
      CHECK(back.heads[h].params == mf.heads[h].params);
      CHECK(back.heads[h].targets == mf.heads[h].targets);
    }

    const FeatureMatrix test = oracle::uniform_matrix(30, 3, 8);
    const auto p1 = clf.predict(test);
    const auto p2 = to_classifier(back).predict(test);
    CHECK(p1.labels == p2.labels);
    for (std::size_t j = 0; j < p1.combined.size(); ++j) {
      CHECK(p1.combined[j].mean == p2.combined[j].mean);
      CHECK(p1.combined[j].variance == p2.combined[j].variance);
    }
  }

  TEST_CASE("corrupt model files are rejected") {
    const auto dir = oracle::scratch_dir("corrupt");
    const Dataset ds = corners(30, 2, 9);
    TrainConfig cfg = small_config(5);
    cfg.batch_size = 40;
    const ModelFile mf = to_model_file(MuyGpsClassifier::train(ds, cfg, KernelParams{}));
    save_model(mf, dir / "ok.bin");
    const std::string bytes = slurp(dir / "ok.bin");

    std::ofstream(dir / "magic.bin", std::ios::binary) << "XXXXXXXX" << bytes.substr(8);
    CHECK_THROWS_AS(load_model(dir / "magic.bin"), FormatError);
    std::ofstream(dir / "short.bin", std::ios::binary) << bytes.substr(0, bytes.size() - 9);
    CHECK_THROWS_AS(load_model(dir / "short.bin"), FormatError);
    std::string v2 = bytes;
    v2[8] = 2;
    std::ofstream(dir / "v2.bin", std::ios::binary) << v2;
    CHECK_THROWS_AS(load_model(dir / "v2.bin"), FormatError);
    std::ofstream(dir / "tail.bin", std::ios::binary) << bytes << "x";
    CHECK_THROWS_AS(load_model(dir / "tail.bin"), FormatError);
    CHECK_THROWS_AS(load_model(dir / "missing.bin"), IoError);
  }

  TEST_CASE("full GP and KNN model kinds") {
    const Dataset ds = corners(40, 2, 10);
    ModelFile gp;
    gp.kind = ModelKind::Gp;
    gp.class_names = ds.class_names;
    gp.labels = ds.labels;
    gp.features = ds.features;
    gp.heads = indicator_heads(ds.labels, 2, KernelParams{});
    REQUIRE(gp.heads.size() == 1);
    const FeatureMatrix test = oracle::uniform_matrix(15, 3, 11);
    const auto pred = gp_predict(gp, test);
    const GpPosterior post = gp_fit_predict(ds.features, gp.heads[0].targets, test, KernelParams{});
    for (Eigen::Index j = 0; j < 15; ++j) {
      CHECK(pred.combined[static_cast<std::size_t>(j)].mean == post.mean[j]);
      CHECK(pred.labels[static_cast<std::size_t>(j)] == (post.mean[j] > 0.0 ? 0 : 1));
    }

    ModelFile knn;
    knn.kind = ModelKind::Knn;
    knn.nn_count = 3;
    knn.class_names = ds.class_names;
    knn.labels = ds.labels;
    knn.features = ds.features;
    const KnnModel m = to_knn(knn);
    CHECK(m.k() == 3);
    CHECK_THROWS_AS(to_classifier(knn), InvalidArgument);
    CHECK(parse_model_kind("gp") == ModelKind::Gp);
    CHECK_THROWS_AS(parse_model_kind("forest"), InvalidArgument);
  }
}
