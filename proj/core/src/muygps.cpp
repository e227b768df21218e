#include "muygps/muygps.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "muygps/error.hpp"
#include "muygps/parallel.hpp"

namespace muygps {

namespace {

constexpr double kVarianceFloor = 1e-12;
constexpr double kProbabilityClamp = 1e-12;

Matrix neighbor_distance_matrix(const FeatureMatrix& train, const NeighborSet& nbrs) {
  const auto k = static_cast<Eigen::Index>(nbrs.size());
  Matrix d = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto ri = train.row(static_cast<Eigen::Index>(nbrs.indices[static_cast<std::size_t>(i)]));
    for (Eigen::Index j = 0; j < i; ++j) {
      const double dist =
          (ri - train.row(static_cast<Eigen::Index>(nbrs.indices[static_cast<std::size_t>(j)]))).norm();
      d(i, j) = dist;
      d(j, i) = dist;
    }
  }
  return d;
}

Vector gather(const Vector& values, const std::vector<std::size_t>& idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = values[static_cast<Eigen::Index>(idx[i])];
  return out;
}

Vector as_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

LocalEstimate krige(const Matrix& neighbor_distances, const Vector& query_distances, const Vector& neighbor_targets,
                    const KernelParams& p) {
  const KernelParams unit = p.unit_variance();
  Matrix k_nn = covariance_from_distances(neighbor_distances, unit);
  k_nn.diagonal().array() += p.noise;
  const Vector k_xn = covariance_from_distances(query_distances, unit);
  const JitteredCholesky fac = factorize_with_jitter(std::move(k_nn), 1.0);

  // With K = L L^T: mean = (L^-1 k)^T (L^-1 z), variance = 1 - |L^-1 k|^2.
  const auto l = fac.llt.matrixL();
  const Vector v = l.solve(k_xn);
  LocalEstimate est;
  est.mean = v.dot(l.solve(neighbor_targets));
  est.unit_variance = 1.0 - v.squaredNorm();
  return est;
}

MuyGpsModel::MuyGpsModel(std::shared_ptr<const NnIndex> index, Vector targets, KernelParams params,
                         std::size_t nn_count)
    : index_(std::move(index)), targets_(std::move(targets)), params_(params), nn_count_(nn_count) {
  if (!index_) throw InvalidArgument("muygps: missing neighbor index");
  params_.validate();
  if (static_cast<std::size_t>(targets_.size()) != index_->size())
    throw InvalidArgument("muygps: " + std::to_string(targets_.size()) + " targets for " +
                          std::to_string(index_->size()) + " training rows");
  if (nn_count_ < 1 || nn_count_ > index_->size())
    throw InvalidArgument("muygps: nn_count " + std::to_string(nn_count_) + " not in [1, " +
                          std::to_string(index_->size()) + "]");
}

void MuyGpsModel::set_params(const KernelParams& p) {
  p.validate();
  params_ = p;
}

void MuyGpsModel::set_sigma2(double sigma2) {
  KernelParams p = params_;
  p.sigma2 = sigma2;
  set_params(p);
}

NeighborSet MuyGpsModel::neighbors(const RowVector& x, std::optional<std::size_t> exclude_self) const {
  return index_->query(x, nn_count_, exclude_self);
}

LocalEstimate MuyGpsModel::estimate(const RowVector& x, const NeighborSet& nbrs) const {
  (void)x;  // distances to x are already in nbrs
  return krige(neighbor_distance_matrix(index_->features(), nbrs), as_vector(nbrs.distances),
               gather(targets_, nbrs.indices), params_);
}

double MuyGpsModel::local_mean(const RowVector& x, std::optional<std::size_t> exclude_self) const {
  return estimate(x, neighbors(x, exclude_self)).mean;
}

double MuyGpsModel::local_variance(const RowVector& x, std::optional<std::size_t> exclude_self) const {
  const LocalEstimate est = estimate(x, neighbors(x, exclude_self));
  return std::max(params_.sigma2 * est.unit_variance, kVarianceFloor);
}

LatentPrediction MuyGpsModel::predict_one(const RowVector& x, const NeighborSet& nbrs) const {
  const LocalEstimate est = estimate(x, nbrs);
  LatentPrediction pred;
  pred.mean = est.mean;
  pred.variance = std::max(params_.sigma2 * est.unit_variance, kVarianceFloor);
  pred.label = est.mean > 0.0 ? 1 : -1;
  return pred;
}

std::vector<LatentPrediction> MuyGpsModel::predict(const FeatureMatrix& test) const {
  if (test.rows() == 0) return {};
  const auto nbrs = index_->query_batch(test, nn_count_);
  return predict(test, nbrs);
}

std::vector<LatentPrediction> MuyGpsModel::predict(const FeatureMatrix& test,
                                                   std::span<const NeighborSet> neighbors) const {
  if (neighbors.size() != static_cast<std::size_t>(test.rows()))
    throw InvalidArgument("muygps: neighbor sets do not match test rows");
  std::vector<LatentPrediction> out(neighbors.size());
  parallel_for(out.size(),
               [&](std::size_t i) { out[i] = predict_one(test.row(static_cast<Eigen::Index>(i)), neighbors[i]); });
  return out;
}

std::pair<double, double> softmax_pair(double a) {
  // e^a / (e^a + e^-a) = 1 / (1 + e^-2a); expm only ever sees a non-positive argument.
  const double t = std::exp(-2.0 * std::abs(a));
  const double big = 1.0 / (1.0 + t);
  const double small = t / (1.0 + t);
  return a >= 0.0 ? std::pair{big, small} : std::pair{small, big};
}

double cross_entropy_term(double latent, double z) {
  const auto [p0, p1] = softmax_pair(latent);
  const double w = (z + 1.0) / 2.0;
  const double c0 = std::clamp(p0, kProbabilityClamp, 1.0 - kProbabilityClamp);
  const double c1 = std::clamp(p1, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return -(w * std::log(c0) + (1.0 - w) * std::log(c1));
}

double cross_entropy_loss(const MuyGpsModel& model, std::span<const std::size_t> batch) {
  for (std::size_t i : batch)
    if (i >= model.n_train()) throw InvalidArgument("loss: batch index " + std::to_string(i) + " out of range");
  const auto nbrs = model.index().query_training_rows(batch, model.nn_count());
  std::vector<double> terms(batch.size());
  parallel_for(batch.size(), [&](std::size_t j) {
    const auto row = model.index().features().row(static_cast<Eigen::Index>(batch[j]));
    const double mean = model.estimate(row, nbrs[j]).mean;
    terms[j] = cross_entropy_term(mean, model.targets()[static_cast<Eigen::Index>(batch[j])]);
  });
  return std::accumulate(terms.begin(), terms.end(), 0.0);
}

BatchObjective::BatchObjective(const NnIndex& index, const Vector& targets, std::vector<std::size_t> batch,
                               std::size_t nn_count)
    : batch_(std::move(batch)) {
  for (std::size_t i : batch_)
    if (i >= index.size()) throw InvalidArgument("loss: batch index " + std::to_string(i) + " out of range");
  const auto nbrs = index.query_training_rows(batch_, nn_count);
  neighbor_distances_.resize(batch_.size());
  query_distances_.resize(batch_.size());
  neighbor_targets_.resize(batch_.size());
  batch_targets_.resize(batch_.size());
  parallel_for(batch_.size(), [&](std::size_t j) {
    neighbor_distances_[j] = neighbor_distance_matrix(index.features(), nbrs[j]);
    query_distances_[j] = as_vector(nbrs[j].distances);
    neighbor_targets_[j] = gather(targets, nbrs[j].indices);
    batch_targets_[j] = targets[static_cast<Eigen::Index>(batch_[j])];
  });
}

double BatchObjective::operator()(const KernelParams& p) const {
  p.validate();
  std::vector<double> terms(batch_.size());
  parallel_for(batch_.size(), [&](std::size_t j) {
    const double mean = krige(neighbor_distances_[j], query_distances_[j], neighbor_targets_[j], p).mean;
    terms[j] = cross_entropy_term(mean, batch_targets_[j]);
  });
  return std::accumulate(terms.begin(), terms.end(), 0.0);
}

bool BatchObjective::single_class() const {
  return std::all_of(batch_targets_.begin(), batch_targets_.end(),
                     [&](double z) { return z == batch_targets_.front(); });
}

void TrainConfig::validate(std::size_t n_train) const {
  if (n_train < 2) throw InvalidArgument("train: need at least two training rows");
  if (nn_count < 1 || nn_count > n_train - 1)
    throw InvalidArgument("train: nn_count " + std::to_string(nn_count) + " must lie in [1, " +
                          std::to_string(n_train - 1) + "]");
  if (batch_size < 1 || batch_size > n_train)
    throw InvalidArgument("train: batch size " + std::to_string(batch_size) + " must lie in [1, " +
                          std::to_string(n_train) + "]");
  if (!(length_scale_lower > 0.0 && length_scale_lower < length_scale_upper))
    throw InvalidArgument("train: length scale bounds must satisfy 0 < lower < upper");
  if (optimize_noise && !(noise_lower > 0.0 && noise_lower < noise_upper))
    throw InvalidArgument("train: noise bounds must satisfy 0 < lower < upper");
  if (max_evaluations < 3) throw InvalidArgument("train: max_evaluations must be at least 3");
}

namespace {

struct SearchResult {
  KernelParams best;
  double best_loss;
  std::size_t evaluations;
};

// Golden-section search on log(length scale); the starting point counts as an
// evaluation and stays the incumbent unless something beats it.
SearchResult golden_section(const BatchObjective& objective, const TrainConfig& cfg, const KernelParams& init,
                            double init_loss) {
  constexpr double kInvPhi = 0.6180339887498949;
  constexpr double kLogTolerance = 1e-3;
  SearchResult res{init, init_loss, 1};
  auto eval = [&](double t) {
    KernelParams p = init;
    p.length_scale = std::exp(t);
    const double loss = objective(p);
    ++res.evaluations;
    if (loss < res.best_loss) {
      res.best_loss = loss;
      res.best = p;
    }
    return loss;
  };
  double a = std::log(cfg.length_scale_lower);
  double b = std::log(cfg.length_scale_upper);
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  while (res.evaluations < cfg.max_evaluations && (b - a) > kLogTolerance) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = eval(d);
    }
  }
  return res;
}

// Nelder-Mead over (log length scale, log noise), with vertices clamped to the box.
SearchResult nelder_mead(const BatchObjective& objective, const TrainConfig& cfg, const KernelParams& init,
                         double init_loss) {
  using Point = std::array<double, 2>;
  const Point lo{std::log(cfg.length_scale_lower), std::log(cfg.noise_lower)};
  const Point hi{std::log(cfg.length_scale_upper), std::log(cfg.noise_upper)};
  auto clamp = [&](Point p) {
    for (int i = 0; i < 2; ++i) p[i] = std::clamp(p[i], lo[i], hi[i]);
    return p;
  };
  SearchResult res{init, init_loss, 1};
  auto eval = [&](const Point& x) {
    KernelParams p = init;
    p.length_scale = std::exp(x[0]);
    p.noise = std::exp(x[1]);
    const double loss = objective(p);
    ++res.evaluations;
    if (loss < res.best_loss) {
      res.best_loss = loss;
      res.best = p;
    }
    return loss;
  };

  const Point start = clamp({std::log(init.length_scale), std::log(std::max(init.noise, cfg.noise_lower))});
  std::array<Point, 3> simplex{start, clamp({start[0] + 0.5, start[1]}), clamp({start[0], start[1] + 1.0})};
  if (simplex[1] == start) simplex[1] = clamp({start[0] - 0.5, start[1]});
  if (simplex[2] == start) simplex[2] = clamp({start[0], start[1] - 1.0});
  std::array<double, 3> f{};
  f[0] = start[0] == std::log(init.length_scale) && init.noise >= cfg.noise_lower &&
                 start[1] == std::log(init.noise)
             ? init_loss
             : eval(start);
  f[1] = eval(simplex[1]);
  f[2] = eval(simplex[2]);

  while (res.evaluations + 2 <= cfg.max_evaluations) {
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(), [&](int x, int y) { return f[x] < f[y]; });
    const Point best = simplex[order[0]];
    const Point mid = simplex[order[1]];
    const Point worst = simplex[order[2]];
    const double fb = f[order[0]], fm = f[order[1]], fw = f[order[2]];
    if (std::abs(fw - fb) < 1e-10 * (1.0 + std::abs(fb))) break;

    const Point centroid{(best[0] + mid[0]) / 2.0, (best[1] + mid[1]) / 2.0};
    auto along = [&](double t) {
      return clamp({centroid[0] + t * (worst[0] - centroid[0]), centroid[1] + t * (worst[1] - centroid[1])});
    };
    const Point xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < fb) {
      const Point xe = along(-2.0);
      const double fe = eval(xe);
      simplex[order[2]] = fe < fr ? xe : xr;
      f[order[2]] = std::min(fe, fr);
    } else if (fr < fm) {
      simplex[order[2]] = xr;
      f[order[2]] = fr;
    } else {
      const Point xc = fr < fw ? along(-0.5) : along(0.5);
      const double fcon = eval(xc);
      if (fcon < std::min(fr, fw)) {
        simplex[order[2]] = xc;
        f[order[2]] = fcon;
      } else {
        for (int v : {order[1], order[2]}) {
          simplex[v] = clamp({(simplex[v][0] + best[0]) / 2.0, (simplex[v][1] + best[1]) / 2.0});
          f[v] = eval(simplex[v]);
        }
      }
    }
  }
  return res;
}

}  // namespace

TrainedModel optimize(std::shared_ptr<const NnIndex> index, const SignedLabels& z, const TrainConfig& cfg,
                      const KernelParams& init) {
  if (!index) throw InvalidArgument("train: missing neighbor index");
  const std::size_t n = index->size();
  cfg.validate(n);
  init.validate();
  if (z.size() != n) throw InvalidArgument("train: label count does not match training rows");
  if (init.length_scale < cfg.length_scale_lower || init.length_scale > cfg.length_scale_upper)
    throw InvalidArgument("train: initial length scale outside optimizer bounds");
  if (cfg.optimize_noise && (init.noise < cfg.noise_lower || init.noise > cfg.noise_upper))
    throw InvalidArgument("train: initial noise outside optimizer bounds");

  const BatchObjective objective(*index, z.values(), sample_batch(n, cfg.batch_size, cfg.seed), cfg.nn_count);
  const double init_loss = objective(init);
  const SearchResult found = cfg.optimize_noise ? nelder_mead(objective, cfg, init, init_loss)
                                                : golden_section(objective, cfg, init, init_loss);

  TrainSummary summary;
  summary.initial_loss = init_loss;
  summary.final_loss = found.best_loss;
  summary.evaluations = found.evaluations;
  summary.single_class_batch = objective.single_class();
  summary.batch_size = cfg.batch_size;
  return TrainedModel{MuyGpsModel(std::move(index), z.values(), found.best, cfg.nn_count), summary};
}

TrainedModel optimize(const Dataset& train, const SignedLabels& z, const TrainConfig& cfg, const KernelParams& init) {
  train.validate();
  auto index = std::make_shared<const NnIndex>(NnIndex::build(train.features));
  return optimize(std::move(index), z, cfg, init);
}

}  // namespace muygps
