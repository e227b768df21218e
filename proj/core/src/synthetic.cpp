#include "muygps/synthetic.hpp"

#include <random>
#include <string>

#include "muygps/error.hpp"
#include "muygps/random.hpp"

namespace muygps {

void SyntheticSpec::validate() const {
  if (n < 1) throw InvalidArgument("synthetic: need at least one point");
  if (dimension < 1) throw InvalidArgument("synthetic: dimension must be at least 1");
  params.validate();
}

Vector draw_latent(const FeatureMatrix& points, const KernelParams& p, Seed seed) {
  p.validate();
  const Eigen::Index n = points.rows();
  Matrix k = covariance_from_distances(pairwise_distances(points, points), p);
  k.diagonal().array() += 1e-10;
  const Eigen::LLT<Matrix> llt(k);
  if (llt.info() != Eigen::Success)
    throw NumericalError("synthetic: prior covariance of " + std::to_string(n) + " points not factorizable");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector u(n);
  for (Eigen::Index i = 0; i < n; ++i) u[i] = normal(rng);
  return llt.matrixL() * u;
}

SyntheticDraw draw_gp(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SyntheticDraw draw;
  draw.points.resize(static_cast<Eigen::Index>(spec.n), static_cast<Eigen::Index>(spec.dimension));
  for (Eigen::Index i = 0; i < draw.points.rows(); ++i)
    for (Eigen::Index j = 0; j < draw.points.cols(); ++j) draw.points(i, j) = unit(rng);

  draw.latent = draw_latent(draw.points, spec.params, derive_seed(spec.seed, 0));
  draw.labels = draw.latent.unaryExpr([](double f) { return f > 0.0 ? 1.0 : -1.0; });
  return draw;
}

Dataset to_dataset(const SyntheticDraw& draw) {
  Dataset ds;
  ds.features = draw.points;
  ds.labels.resize(static_cast<std::size_t>(draw.labels.size()));
  for (Eigen::Index i = 0; i < draw.labels.size(); ++i)
    ds.labels[static_cast<std::size_t>(i)] = draw.labels[i] > 0.0 ? 0 : 1;
  ds.class_names = default_class_names(2);
  return ds;
}

}  // namespace muygps
