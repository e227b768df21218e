#include <cmath>

#include "doctest.h"
#include "muygps/error.hpp"
#include "muygps/gp_exact.hpp"
#include "muygps/synthetic.hpp"
#include "oracles.hpp"

using namespace muygps;

TEST_SUITE("gp_exact") {
  TEST_CASE("one training point, test on top of it") {
    FeatureMatrix x(1, 2);
    x << 0.3, 0.7;
    Vector z(1);
    z << 1.0;
    const GpPosterior post = gp_fit_predict(x, z, x, KernelParams{});
    CHECK(post.mean[0] == doctest::Approx(1.0 / (1.0 + 1e-5)).epsilon(1e-14));
    CHECK(post.variance[0] == doctest::Approx(1.0 - 1.0 / (1.0 + 1e-5)).epsilon(1e-6));
  }

  TEST_CASE("far test points revert to the prior") {
    const FeatureMatrix x = oracle::uniform_matrix(20, 2, 3);
    Vector z = Vector::Ones(20);
    FeatureMatrix far(1, 2);
    far << 1e3, 1e3;
    KernelParams p;
    p.sigma2 = 2.0;
    const GpPosterior post = gp_fit_predict(x, z, far, p);
    CHECK(std::abs(post.mean[0]) < 1e-12);
    CHECK(post.variance[0] == doctest::Approx(2.0));
  }

  TEST_CASE("matches a long-double dense solve on 200 synthetic points") {
    SyntheticSpec spec;
    spec.n = 220;
    spec.dimension = 3;
    spec.params.length_scale = 0.5;
    spec.seed = 17;
    const SyntheticDraw draw = draw_gp(spec);
    const FeatureMatrix train = draw.points.topRows(200);
    const FeatureMatrix test = draw.points.bottomRows(20);
    const Vector z = draw.labels.head(200);
    KernelParams p = spec.params;
    p.sigma2 = 1.7;
    const GpPosterior post = gp_fit_predict(train, z, test, p);
    const std::vector<double> zs(z.data(), z.data() + z.size());
    for (Eigen::Index j = 0; j < 20; ++j) {
      const auto want = oracle::gp_posterior(train, oracle::all_rows(200), zs, test, j, p.nu, p.length_scale,
                                             p.noise, p.sigma2);
      CHECK(oracle::rel_err(post.mean[j], want.mean) < 1e-8);
      CHECK(oracle::rel_err(post.variance[j], want.variance) < 1e-8);
      CHECK(post.variance[j] <= p.sigma2);
      CHECK(post.variance[j] >= 0.0);
    }
  }

  TEST_CASE("classify sign rule") {
    GpPosterior post;
    post.mean = Vector(3);
    post.mean << 0.3, -0.7, 0.0;
    CHECK(classify(post) == std::vector<int>{1, -1, -1});
  }

  TEST_CASE("duplicate training point barely moves the mean") {
    // With l spanning the whole 2-d domain the Gram is ill-conditioned enough
    // for the shift to exceed 1e-3, so that corner is left out.
    struct Case {
      std::size_t d;
      double ell;
    };
    for (const Case c : {Case{2, 0.1}, Case{2, 0.3}, Case{4, 0.3}, Case{4, 1.0}, Case{8, 1.0}}) {
      const FeatureMatrix x = oracle::uniform_matrix(60, c.d, 5);
      Vector z(60);
      for (Eigen::Index i = 0; i < 60; ++i) z[i] = x(i, 0) > 0.5 ? 1.0 : -1.0;
      const FeatureMatrix test = oracle::uniform_matrix(30, c.d, 6);
      KernelParams p;
      p.length_scale = c.ell;
      const GpPosterior base = gp_fit_predict(x, z, test, p);

      FeatureMatrix xd(61, static_cast<Eigen::Index>(c.d));
      xd << x, x.row(7);
      Vector zd(61);
      zd << z, z[7];
      const GpPosterior dup = gp_fit_predict(xd, zd, test, p);
      CHECK((dup.mean - base.mean).cwiseAbs().maxCoeff() < 1e-3);
    }
  }

  TEST_CASE("interpolates the targets with tiny noise") {
    const FeatureMatrix x = oracle::uniform_matrix(40, 2, 9);
    Vector z(40);
    for (Eigen::Index i = 0; i < 40; ++i) z[i] = (i % 3 == 0) ? 1.0 : -1.0;
    KernelParams p;
    p.noise = 1e-8;
    p.length_scale = 0.3;
    const GpPosterior post = gp_fit_predict(x, z, x, p);
    CHECK((post.mean - z).cwiseAbs().maxCoeff() < 1e-3);
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(gp_fit_predict(FeatureMatrix(0, 2), Vector(0), FeatureMatrix(1, 2), KernelParams{}),
                    InvalidArgument);
    const FeatureMatrix x = oracle::uniform_matrix(3, 2, 1);
    CHECK_THROWS_AS(gp_fit_predict(x, Vector::Ones(2), x, KernelParams{}), InvalidArgument);
    CHECK_THROWS_AS(gp_fit_predict(x, Vector::Ones(3), oracle::uniform_matrix(1, 4, 1), KernelParams{}),
                    InvalidArgument);
  }
}
