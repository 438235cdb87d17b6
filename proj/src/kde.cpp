#include "harmonic/kde.hpp"

#include <algorithm>
#include <cmath>

namespace harmonic {

namespace {

std::int64_t cell_of(double coordinate, double radius) {
  const double c = std::floor(coordinate / radius);
  return static_cast<std::int64_t>(std::clamp(c, -1e15, 1e15));
}

}  // namespace

KdeModel::KdeModel(Metric metric, const Eigen::MatrixXd& samples, double radius)
    : metric_(std::move(metric)), radius_(radius), samples_(samples) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("KdeModel: radius must be positive and finite");
  }
  if (samples.rows() == 0) throw FitError("KdeModel: no training samples");
  if (samples.cols() != metric_.ndim()) throw std::invalid_argument("KdeModel: sample dimension mismatch");
  if (samples.rows() > static_cast<Eigen::Index>(UINT32_MAX)) throw std::invalid_argument("KdeModel: too many samples");
  const int d = metric_.ndim();
  nsamples_ = static_cast<std::size_t>(samples.rows());
  ln_kernel_volume_ = ln_unit_ball_volume(d) + d * std::log(radius_) + metric_.half_ln_det();

  whitened_.resize(nsamples_ * static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < nsamples_; ++i) {
    const Eigen::VectorXd w = metric_.whiten(samples.row(static_cast<Eigen::Index>(i)).transpose());
    std::copy(w.data(), w.data() + d, whitened_.begin() + static_cast<std::ptrdiff_t>(i * d));
  }
  if (d <= kMaxGridDim) {
    std::vector<std::int64_t> cell(static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < nsamples_; ++i) {
      for (int k = 0; k < d; ++k) cell[static_cast<std::size_t>(k)] = cell_of(whitened_[i * d + k], radius_);
      grid_[cell_key(cell.data())].push_back(static_cast<std::uint32_t>(i));
    }
  }
}

std::uint64_t KdeModel::cell_key(const std::int64_t* cell) const {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  for (int k = 0; k < metric_.ndim(); ++k) h = derive_seed(h, static_cast<std::uint64_t>(cell[k]));
  return h;
}

std::size_t KdeModel::count_inside(const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  const int d = metric_.ndim();
  const Eigen::VectorXd w = metric_.whiten(theta);
  const double r2 = radius_ * radius_;
  auto inside = [&](std::size_t i) {
    double acc = 0.0;
    const double* p = &whitened_[i * static_cast<std::size_t>(d)];
    for (int k = 0; k < d; ++k) {
      const double u = w(k) - p[k];
      acc += u * u;
    }
    return acc < r2;
  };

  std::size_t count = 0;
  if (d > kMaxGridDim) {
    for (std::size_t i = 0; i < nsamples_; ++i) count += inside(i) ? 1 : 0;
    return count;
  }

  // Any kernel covering theta is centred in one of the 3^d neighbouring cells.
  std::int64_t base[kMaxGridDim], cell[kMaxGridDim];
  for (int k = 0; k < d; ++k) base[k] = cell_of(w(k), radius_);
  int total = 1;
  for (int k = 0; k < d; ++k) total *= 3;
  std::uint64_t seen[243];
  int nseen = 0;
  for (int code = 0; code < total; ++code) {
    int rest = code;
    for (int k = 0; k < d; ++k) {
      cell[k] = base[k] + (rest % 3) - 1;
      rest /= 3;
    }
    const std::uint64_t key = cell_key(cell);
    // Distinct cells may share a hash; visit each bucket once.
    if (std::find(seen, seen + nseen, key) != seen + nseen) continue;
    seen[nseen++] = key;
    const auto it = grid_.find(key);
    if (it == grid_.end()) continue;
    for (const std::uint32_t i : it->second) count += inside(i) ? 1 : 0;
  }
  return count;
}

double KdeModel::ln_phi(const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  if (!fitted()) throw std::logic_error("KdeModel: not fitted");
  if (theta.size() != ndim()) throw std::invalid_argument("KdeModel: wrong dimension");
  const std::size_t count = count_inside(theta);
  if (count == 0) return kNegInf;
  return std::log(static_cast<double>(count)) - std::log(static_cast<double>(nsamples_)) - ln_kernel_volume_;
}

nlohmann::json KdeModel::to_json() const {
  return {{"kind", kind()},
          {"ndim", ndim()},
          {"radius", radius_},
          {"centre", vector_to_json(metric_.centre())},
          {"covariance", matrix_to_json(metric_.covariance())},
          {"covariance_kind", to_string(metric_.kind())},
          {"ln_kernel_volume", ln_kernel_volume_},
          {"samples", matrix_to_json(samples_)}};
}

KdeModel KdeModel::from_json(const nlohmann::json& j) {
  if (j.at("kind") != "kde") throw std::invalid_argument("not a kde model");
  Metric metric(vector_from_json(j.at("centre")), matrix_from_json(j.at("covariance")),
                covariance_kind_from_string(j.at("covariance_kind")));
  return KdeModel(std::move(metric), matrix_from_json(j.at("samples")), j.at("radius").get<double>());
}

KdeModel fit_kde(const ChainStore& training, double radius, CovarianceKind covariance) {
  if (training.nchains() == 0) throw FitError("fit_kde: empty training set");
  const Eigen::MatrixXd samples = training.stacked_samples();
  Metric metric = Metric::from_samples(samples, covariance);
  return KdeModel(std::move(metric), samples, radius);
}

}  // namespace harmonic
