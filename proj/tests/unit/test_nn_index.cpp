#include "doctest.h"
#include "muygps/error.hpp"
#include "muygps/nn_index.hpp"
#include "muygps/parallel.hpp"
#include "oracles.hpp"

using namespace muygps;

namespace {

void check_against_brute(const FeatureMatrix& train, const FeatureMatrix& queries, const NnIndex& idx, std::size_t k) {
  for (Eigen::Index q = 0; q < queries.rows(); ++q) {
    const NeighborSet got = idx.query(queries.row(q), k);
    const auto want = oracle::brute_knn(train, queries, q, k);
    REQUIRE(got.size() == k);
    for (std::size_t j = 0; j < k; ++j) {
      CHECK(got.indices[j] == want[j].second);
      CHECK(oracle::rel_err(got.distances[j], want[j].first) < 1e-12);
    }
  }
}

}  // namespace

TEST_SUITE("nn_index") {
  TEST_CASE("single row index") {
    FeatureMatrix one(1, 2);
    one << 3.0, 4.0;
    const NnIndex idx = NnIndex::build(one);
    RowVector q(2);
    q << 0.0, 0.0;
    const NeighborSet s = idx.query(q, 1);
    CHECK(s.indices == std::vector<std::size_t>{0});
    CHECK(s.distances[0] == 5.0);
  }

  TEST_CASE("hand geometry with leave-one-out") {
    FeatureMatrix line(3, 1);
    line << 0.0, 1.0, 2.0;
    const NnIndex idx = NnIndex::build(line);
    const NeighborSet s = idx.query(line.row(0), 2, 0);
    CHECK(s.indices == std::vector<std::size_t>{1, 2});
    CHECK(s.distances == std::vector<double>{1.0, 2.0});

    const NeighborSet self = idx.query(line.row(1), 1);
    CHECK(self.indices[0] == 1);
    CHECK(self.distances[0] == 0.0);
  }

  TEST_CASE("ties broken by ascending index") {
    FeatureMatrix pts(4, 1);
    pts << 1.0, -1.0, 1.0, -1.0;
    const NnIndex idx = NnIndex::build(pts);
    RowVector q(1);
    q << 0.0;
    CHECK(idx.query(q, 4).indices == std::vector<std::size_t>{0, 1, 2, 3});
  }

  TEST_CASE("matches brute force on 1000 x 6 and 500 x 80") {
    const FeatureMatrix a = oracle::uniform_matrix(1000, 6, 21);
    const FeatureMatrix qa = oracle::uniform_matrix(40, 6, 22);
    check_against_brute(a, qa, NnIndex::build(a), 10);

    const FeatureMatrix b = oracle::uniform_matrix(500, 80, 23);
    const FeatureMatrix qb = oracle::uniform_matrix(25, 80, 24);
    check_against_brute(b, qb, NnIndex::build(b), 50);
  }

  TEST_CASE("leave-one-out matches brute force") {
    const FeatureMatrix a = oracle::uniform_matrix(300, 5, 31);
    const NnIndex idx = NnIndex::build(a);
    const std::vector<std::size_t> rows{0, 17, 299};
    const auto batch = idx.query_training_rows(rows, 12);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto want = oracle::brute_knn(a, a, static_cast<Eigen::Index>(rows[r]), 12, rows[r]);
      for (std::size_t j = 0; j < 12; ++j) CHECK(batch[r].indices[j] == want[j].second);
    }
  }

  TEST_CASE("k = n returns everything sorted; prefixes nest") {
    const FeatureMatrix a = oracle::uniform_matrix(60, 3, 41);
    const NnIndex idx = NnIndex::build(a);
    const RowVector q = oracle::uniform_matrix(1, 3, 42).row(0);
    const NeighborSet all = idx.query(q, 60);
    CHECK(std::is_sorted(all.distances.begin(), all.distances.end()));
    auto sorted = all.indices;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == oracle::all_rows(60));
    for (std::size_t k = 1; k < 60; ++k) {
      const NeighborSet s = idx.query(q, k);
      CHECK(std::equal(s.indices.begin(), s.indices.end(), all.indices.begin()));
    }
  }

  TEST_CASE("batch queries independent of thread count and rebuild") {
    const FeatureMatrix a = oracle::uniform_matrix(400, 8, 51);
    const FeatureMatrix q = oracle::uniform_matrix(64, 8, 52);
    set_thread_count(1);
    const auto one = NnIndex::build(a).query_batch(q, 9);
    set_thread_count(4);
    const auto four = NnIndex::build(a).query_batch(q, 9);
    set_thread_count(0);
    for (std::size_t i = 0; i < one.size(); ++i) {
      CHECK(one[i].indices == four[i].indices);
      CHECK(one[i].distances == four[i].distances);
    }
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(NnIndex::build(FeatureMatrix(0, 3)), InvalidArgument);
    const FeatureMatrix a = oracle::uniform_matrix(5, 2, 1);
    const NnIndex idx = NnIndex::build(a);
    CHECK_THROWS_AS(idx.query(a.row(0), 0), InvalidArgument);
    CHECK_THROWS_AS(idx.query(a.row(0), 6), InvalidArgument);
    CHECK_THROWS_AS(idx.query(a.row(0), 5, 0), InvalidArgument);
    CHECK_NOTHROW(idx.query(a.row(0), 4, 0));
    CHECK_THROWS_AS(idx.query(RowVector::Zero(3), 1), InvalidArgument);
  }
}
