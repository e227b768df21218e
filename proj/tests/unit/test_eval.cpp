#include <charconv>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "muygps/error.hpp"
#include "muygps/eval.hpp"
#include "oracles.hpp"

using namespace muygps;

namespace {

LatentPrediction pred(double mean, double variance, int label) {
  LatentPrediction p;
  p.mean = mean;
  p.variance = variance;
  p.label = label;
  return p;
}

// Six points whose ambiguity thresholds fall between the grid taus.
std::vector<LatentPrediction> six_points() {
  std::vector<LatentPrediction> ps{pred(1.0, 0.01, 0),  pred(0.2, 0.01, 0), pred(-0.15, 0.01, 1),
                                   pred(0.05, 0.0025, 0), pred(-2.0, 1.0, 1), pred(0.0, 0.0, 1)};
  annotate_ambiguity(ps, TauGrid::standard());
  return ps;
}
const std::vector<int> kSixTruth{0, 1, 1, 0, 0, 1};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("accuracy") {
    const std::vector<int> a{1, 1, 0, 0};
    CHECK(accuracy(a, a) == 1.0);
    CHECK(accuracy(a, std::vector<int>{1, 0, 0, 1}) == 0.5);
    CHECK_THROWS_AS(accuracy(a, std::vector<int>{1}), InvalidArgument);
    CHECK_THROWS_AS(accuracy(std::vector<int>{}, std::vector<int>{}), InvalidArgument);
  }

  TEST_CASE("confusion matrix") {
    const auto c = confusion_matrix(std::vector<int>{0, 1, 1, 2}, std::vector<int>{0, 0, 1, 2}, 3);
    CHECK(c == ConfusionMatrix{{1, 1, 0}, {0, 1, 0}, {0, 0, 1}});
  }

  TEST_CASE("hand-enumerated six point sweep") {
    const UqReport r = tau_sweep(six_points(), kSixTruth, TauGrid::standard(), default_class_names(2));
    REQUIRE(r.rows.size() == 5);
    const std::vector<std::size_t> amb{1, 2, 3, 3, 5};
    const std::vector<double> acc{3.0 / 5, 2.0 / 4, 1.0 / 3, 1.0 / 3, 1.0};
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(r.rows[i].n_total == 6);
      CHECK(r.rows[i].n_ambiguous == amb[i]);
      REQUIRE(r.rows[i].accuracy_non_ambiguous.has_value());
      CHECK(*r.rows[i].accuracy_non_ambiguous == doctest::Approx(acc[i]));
      CHECK(r.rows[i].accuracy_all == doctest::Approx(4.0 / 6));
      std::size_t total = 0;
      for (const auto& row : r.rows[i].confusion)
        for (auto v : row) total += v;
      CHECK(total == 6 - amb[i]);
    }
    CHECK(r.rows[0].confusion == ConfusionMatrix{{2, 1}, {1, 1}});
  }

  TEST_CASE("degenerate sweeps") {
    std::vector<LatentPrediction> all(4, pred(0.0, 1.0, 0));
    annotate_ambiguity(all, TauGrid::standard());
    const UqReport r = tau_sweep(all, std::vector<int>{0, 1, 0, 1}, TauGrid::standard(), default_class_names(2));
    for (const auto& row : r.rows) {
      CHECK(row.n_ambiguous == row.n_total);
      CHECK_FALSE(row.accuracy_non_ambiguous.has_value());
    }

    std::vector<LatentPrediction> crisp{pred(0.5, 0.0, 0), pred(-0.5, 0.0, 1), pred(0.0, 0.0, 1)};
    annotate_ambiguity(crisp, TauGrid::standard());
    const UqReport z = tau_sweep(crisp, std::vector<int>{0, 1, 1}, TauGrid::standard(), default_class_names(2));
    for (const auto& row : z.rows) CHECK(row.n_ambiguous == 1);

    std::vector<LatentPrediction> unflagged{pred(1.0, 1.0, 0)};
    CHECK_THROWS_AS(tau_sweep(unflagged, std::vector<int>{0}, TauGrid::standard(), default_class_names(2)),
                    InvalidArgument);
    CHECK_THROWS_AS(tau_sweep(crisp, std::vector<int>{0}, TauGrid::standard(), default_class_names(2)),
                    InvalidArgument);
  }

  TEST_CASE("json round trip and csv fidelity") {
    const auto dir = oracle::scratch_dir("report");
    UqReport r = tau_sweep(six_points(), kSixTruth, TauGrid::standard(), default_class_names(2));
    r.metadata["seed"] = "42";
    r.metadata["model_fnv1a"] = "0123456789abcdef";
    CalibrationResult c;
    c.sigma2 = 0.37;
    c.grid.push_back({0.37, 0.1, 0.2});
    r.calibration.push_back(c);

    emit_report(r, dir / "r.json", ReportFormat::Json);
    const UqReport back = report_from_json(slurp(dir / "r.json"));
    CHECK(back == r);
    REQUIRE(back.calibration.size() == 1);
    CHECK(back.calibration[0].sigma2 == 0.37);

    emit_report(r, dir / "r.csv", ReportFormat::Csv);
    std::istringstream csv(slurp(dir / "r.csv"));
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(csv, line)) lines.push_back(line);
    REQUIRE(lines.size() == r.rows.size() + 1);
    CHECK(lines[0] == "tau,confidence,n_ambiguous,n_total,accuracy_all,accuracy_non_ambiguous");
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      std::vector<double> v;
      std::stringstream ls(lines[i + 1]);
      std::string cell;
      while (std::getline(ls, cell, ',')) v.push_back(std::stod(cell));
      REQUIRE(v.size() == 6);
      CHECK(std::abs(v[0] - r.rows[i].tau) < 1e-9);
      CHECK(std::abs(v[1] - r.rows[i].confidence) < 1e-9);
      CHECK(v[2] == static_cast<double>(r.rows[i].n_ambiguous));
      CHECK(v[3] == static_cast<double>(r.rows[i].n_total));
      CHECK(std::abs(v[4] - r.rows[i].accuracy_all) < 1e-9);
      CHECK(std::abs(v[5] - *r.rows[i].accuracy_non_ambiguous) < 1e-9);
    }
  }

  TEST_CASE("null accuracy serializes as null and empty cell") {
    std::vector<LatentPrediction> all(2, pred(0.0, 1.0, 0));
    annotate_ambiguity(all, TauGrid::standard());
    const UqReport r = tau_sweep(all, std::vector<int>{0, 1}, TauGrid::standard(), default_class_names(2));
    CHECK(report_to_json(r).find("\"accuracy_non_ambiguous\": null") != std::string::npos);
    CHECK(report_to_csv(r).find(",0.5,\n") != std::string::npos);
    CHECK(report_from_json(report_to_json(r)) == r);
    CHECK_THROWS_AS(report_from_json("{\"rows\": 3}"), FormatError);
  }

  TEST_CASE("fnv-1a fingerprint") {
    const auto dir = oracle::scratch_dir("fnv");
    { std::ofstream(dir / "empty", std::ios::binary); }
    std::ofstream(dir / "a", std::ios::binary) << "a";
    CHECK(file_fingerprint(dir / "empty") == "cbf29ce484222325");
    CHECK(file_fingerprint(dir / "a") == "af63dc4c8601ec8c");
    CHECK_THROWS_AS(file_fingerprint(dir / "missing"), IoError);
  }
}
