#include "muygps/gp_exact.hpp"

#include <algorithm>
#include <string>

#include "muygps/error.hpp"
#include "muygps/parallel.hpp"

namespace muygps {

namespace {
constexpr double kVarianceFloor = 1e-12;
constexpr Eigen::Index kTestBlock = 256;
}  // namespace

GpPosterior gp_fit_predict(const FeatureMatrix& train, const Vector& targets, const FeatureMatrix& test,
                           const KernelParams& p) {
  p.validate();
  const auto n = static_cast<std::size_t>(train.rows());
  if (n == 0) throw InvalidArgument("gp: empty training set");
  if (n > kGpMaxTrain)
    throw InvalidArgument("gp: " + std::to_string(n) + " training rows exceed the dense-solver cap of " +
                          std::to_string(kGpMaxTrain));
  if (targets.size() != train.rows()) throw InvalidArgument("gp: target count does not match training rows");
  if (test.rows() > 0 && test.cols() != train.cols())
    throw InvalidArgument("gp: test has " + std::to_string(test.cols()) + " features, training has " +
                          std::to_string(train.cols()));

  const KernelParams unit = p.unit_variance();
  const CovarianceMatrix kff = train_covariance(train, unit);
  const Vector alpha = kff.factor.solve(targets);
  const auto& lower = kff.factor.matrixL();

  GpPosterior post;
  post.jitter_applied = kff.jitter_applied;
  post.mean.resize(test.rows());
  post.variance.resize(test.rows());

  const Eigen::Index blocks = (test.rows() + kTestBlock - 1) / kTestBlock;
  parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b) {
    const Eigen::Index begin = static_cast<Eigen::Index>(b) * kTestBlock;
    const Eigen::Index len = std::min(kTestBlock, test.rows() - begin);
    const FeatureMatrix block = test.middleRows(begin, len);
    const Matrix kfs = cross_covariance(train, block, unit);  // n x len
    post.mean.segment(begin, len) = kfs.transpose() * alpha;
    const Matrix v = lower.solve(kfs);
    for (Eigen::Index j = 0; j < len; ++j) {
      const double c = 1.0 - v.col(j).squaredNorm();
      post.variance[begin + j] = std::max(p.sigma2 * c, kVarianceFloor);
    }
  });
  return post;
}

std::vector<int> classify(const GpPosterior& posterior) {
  std::vector<int> labels(static_cast<std::size_t>(posterior.mean.size()));
  for (Eigen::Index i = 0; i < posterior.mean.size(); ++i)
    labels[static_cast<std::size_t>(i)] = posterior.mean[i] > 0.0 ? 1 : -1;
  return labels;
}

}  // namespace muygps
