#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "harmonic/numerics.hpp"
#include "harmonic/target_model.hpp"

namespace harmonic {

/// ln V_S = ln[pi^{d/2} / Gamma(d/2 + 1)] + d ln R + 0.5 ln |Sigma|.
double hypersphere_ln_volume(int d, double radius, const Eigen::MatrixXd& covariance);

/// Uniform density on the Mahalanobis ball (theta - centre)^T Sigma^{-1} (theta - centre) < R^2.
class HypersphereModel final : public TargetModel {
 public:
  HypersphereModel() = default;
  HypersphereModel(Metric metric, double radius);

  std::string kind() const override { return "hypersphere"; }
  int ndim() const override { return metric_.ndim(); }
  bool fitted() const override { return radius_ > 0.0; }
  double ln_phi(const Eigen::Ref<const Eigen::VectorXd>& theta) const override;
  nlohmann::json to_json() const override;
  std::unique_ptr<TargetModel> clone() const override {
    return std::make_unique<HypersphereModel>(*this);
  }

  static HypersphereModel from_json(const nlohmann::json& j);

  const Metric& metric() const { return metric_; }
  double radius() const { return radius_; }
  double ln_volume() const { return ln_volume_; }

  /// ln of the training second harmonic moment at the fitted radius.
  double training_ln_mu2 = kPosInf;

 private:
  Metric metric_;
  double radius_ = 0.0;
  double ln_volume_ = 0.0;
};

/// ln mu2(R) = ln[(1/N) sum_i C_i^2], C_i = phi_R(theta_i) / (L pi)(theta_i), as a
/// function of the radius for a fixed metric. Evaluates in O(log N).
class HypersphereObjective {
 public:
  HypersphereObjective(const Metric& metric, const Eigen::MatrixXd& samples,
                       const Eigen::VectorXd& ln_posterior);

  /// +inf when no sample lies strictly inside the ball.
  double ln_mu2(double radius) const;

  double min_distance() const { return std::sqrt(dist2_.front()); }
  double max_distance() const { return std::sqrt(dist2_.back()); }

 private:
  std::vector<double> dist2_;       // ascending
  std::vector<double> prefix_lse_;  // prefix_lse_[k] = ln sum_{i<k} exp(-2 ln P_i)
  int ndim_;
  double half_ln_det_;
  double ln_n_;
};

struct HypersphereOptions {
  CovarianceKind covariance = CovarianceKind::diagonal;
  /// Search interval for R in whitened units. Defaults to
  /// [smallest, largest] training distance from the centre.
  std::optional<std::pair<double, double>> radius_bounds;
  /// Log-spaced probes used to bracket the minimum before Brent refinement.
  int bracket_probes = 200;
};

/// Centre and covariance from the training samples, radius by minimising
/// the training second harmonic moment (bracketing scan + Brent).
HypersphereModel fit_hypersphere(const ChainStore& training, const HypersphereOptions& options = {});

}  // namespace harmonic
