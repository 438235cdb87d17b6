#include "harmonic/hypersphere.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/minima.hpp>

namespace harmonic {

double hypersphere_ln_volume(int d, double radius, const Eigen::MatrixXd& covariance) {
  if (d < 1) throw std::invalid_argument("hypersphere_ln_volume: d must be positive");
  if (!(radius > 0.0)) throw std::invalid_argument("hypersphere_ln_volume: radius must be positive");
  if (covariance.rows() != d || covariance.cols() != d) {
    throw std::invalid_argument("hypersphere_ln_volume: covariance must be d x d");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("hypersphere_ln_volume: covariance is not positive-definite");
  }
  const double half_ln_det = Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  return ln_unit_ball_volume(d) + d * std::log(radius) + half_ln_det;
}

HypersphereModel::HypersphereModel(Metric metric, double radius)
    : metric_(std::move(metric)), radius_(radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("HypersphereModel: radius must be positive and finite");
  }
  ln_volume_ = ln_unit_ball_volume(metric_.ndim()) + metric_.ndim() * std::log(radius_) +
               metric_.half_ln_det();
}

double HypersphereModel::ln_phi(const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  if (!fitted()) throw std::logic_error("HypersphereModel: not fitted");
  if (theta.size() != ndim()) throw std::invalid_argument("HypersphereModel: wrong dimension");
  return metric_.distance2(theta) < radius_ * radius_ ? -ln_volume_ : kNegInf;
}

nlohmann::json HypersphereModel::to_json() const {
  return {{"kind", kind()},
          {"ndim", ndim()},
          {"centre", vector_to_json(metric_.centre())},
          {"covariance", matrix_to_json(metric_.covariance())},
          {"covariance_kind", to_string(metric_.kind())},
          {"radius", radius_},
          {"ln_volume", ln_volume_},
          {"fit", {{"training_ln_mu2", std::isfinite(training_ln_mu2) ? nlohmann::json(training_ln_mu2)
                                                                      : nlohmann::json(nullptr)}}}};
}

HypersphereModel HypersphereModel::from_json(const nlohmann::json& j) {
  if (j.at("kind") != "hypersphere") throw std::invalid_argument("not a hypersphere model");
  Metric metric(vector_from_json(j.at("centre")), matrix_from_json(j.at("covariance")),
                covariance_kind_from_string(j.at("covariance_kind")));
  HypersphereModel model(std::move(metric), j.at("radius").get<double>());
  if (j.contains("fit") && j["fit"].contains("training_ln_mu2") && !j["fit"]["training_ln_mu2"].is_null()) {
    model.training_ln_mu2 = j["fit"]["training_ln_mu2"].get<double>();
  }
  return model;
}

HypersphereObjective::HypersphereObjective(const Metric& metric, const Eigen::MatrixXd& samples,
                                           const Eigen::VectorXd& ln_posterior)
    : ndim_(metric.ndim()),
      half_ln_det_(metric.half_ln_det()),
      ln_n_(std::log(static_cast<double>(samples.rows()))) {
  const auto n = static_cast<std::size_t>(samples.rows());
  if (n == 0) throw std::invalid_argument("HypersphereObjective: no samples");
  std::vector<std::pair<double, double>> entries(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    entries[i] = {metric.distance2(samples.row(row).transpose()), -2.0 * ln_posterior(row)};
  }
  std::sort(entries.begin(), entries.end());
  dist2_.reserve(n);
  prefix_lse_.reserve(n + 1);
  prefix_lse_.push_back(kNegInf);
  LogSumExp acc;
  for (const auto& [d2, term] : entries) {
    dist2_.push_back(d2);
    acc.add(term);
    prefix_lse_.push_back(acc.value());
  }
}

double HypersphereObjective::ln_mu2(double radius) const {
  if (!(radius > 0.0)) return kPosInf;
  const auto inside = static_cast<std::size_t>(
      std::lower_bound(dist2_.begin(), dist2_.end(), radius * radius) - dist2_.begin());
  if (inside == 0) return kPosInf;
  const double ln_volume = ln_unit_ball_volume(ndim_) + ndim_ * std::log(radius) + half_ln_det_;
  return prefix_lse_[inside] - 2.0 * ln_volume - ln_n_;
}

HypersphereModel fit_hypersphere(const ChainStore& training, const HypersphereOptions& options) {
  if (training.nchains() == 0) throw FitError("fit_hypersphere: empty training set");
  const Eigen::MatrixXd samples = training.stacked_samples();
  const Eigen::VectorXd ln_posterior = training.stacked_ln_posterior();
  Metric metric = Metric::from_samples(samples, options.covariance);
  const HypersphereObjective objective(metric, samples, ln_posterior);

  double lo = 0.0, hi = 0.0;
  if (options.radius_bounds) {
    std::tie(lo, hi) = *options.radius_bounds;
  } else {
    // Smallest radius holding one sample to the smallest holding all of them.
    constexpr double kNudge = 1e-9;
    hi = objective.max_distance() * (1.0 + kNudge);
    lo = std::max(objective.min_distance(), hi * 1e-6) * (1.0 + kNudge);
  }
  if (!(lo > 0.0) || !(hi > lo)) throw FitError("fit_hypersphere: invalid radius bracket");

  const int nprobe = std::max(options.bracket_probes, 3);
  std::vector<double> probes(static_cast<std::size_t>(nprobe));
  std::vector<double> values(probes.size());
  const double ln_lo = std::log(lo), ln_hi = std::log(hi);
  std::size_t best = 0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    probes[i] = std::exp(ln_lo + (ln_hi - ln_lo) * static_cast<double>(i) / (nprobe - 1));
    values[i] = objective.ln_mu2(probes[i]);
    if (values[i] < values[best]) best = i;
  }
  if (!std::isfinite(values[best])) throw FitError("fit_hypersphere: optimizer bracket failure");

  const double a = probes[best == 0 ? 0 : best - 1];
  const double b = probes[std::min(best + 1, probes.size() - 1)];
  double radius = probes[best];
  double ln_mu2 = values[best];
  if (b > a) {
    auto f = [&](double r) { return objective.ln_mu2(r); };
    const auto [r_opt, f_opt] = boost::math::tools::brent_find_minima(f, a, b, 40);
    if (f_opt < ln_mu2) {
      radius = r_opt;
      ln_mu2 = f_opt;
    }
  }

  HypersphereModel model(std::move(metric), radius);
  model.training_ln_mu2 = ln_mu2;
  return model;
}

}  // namespace harmonic
