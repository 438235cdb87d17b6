#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "harmonic/numerics.hpp"
#include "harmonic/target_model.hpp"

namespace harmonic {

/// Average of uniform ellipsoidal kernels centred on the training samples:
///   phi(theta) = (1/N) sum_i [ (theta - theta_i)^T Sigma_K^{-1} (theta - theta_i) < R^2 ] / V_K
/// with V_K = V_unit(d) R^d |Sigma_K|^{1/2}, so phi integrates to one exactly.
class KdeModel final : public TargetModel {
 public:
  KdeModel() = default;
  /// The metric's covariance is the kernel covariance; its centre only sets
  /// the origin of the whitened frame.
  KdeModel(Metric metric, const Eigen::MatrixXd& samples, double radius);

  std::string kind() const override { return "kde"; }
  int ndim() const override { return metric_.ndim(); }
  bool fitted() const override { return radius_ > 0.0; }
  double ln_phi(const Eigen::Ref<const Eigen::VectorXd>& theta) const override;
  nlohmann::json to_json() const override;
  std::unique_ptr<TargetModel> clone() const override { return std::make_unique<KdeModel>(*this); }

  static KdeModel from_json(const nlohmann::json& j);

  const Metric& metric() const { return metric_; }
  double radius() const { return radius_; }
  double ln_kernel_volume() const { return ln_kernel_volume_; }
  std::size_t nsamples() const { return nsamples_; }

  /// Number of training samples whose kernel covers theta.
  std::size_t count_inside(const Eigen::Ref<const Eigen::VectorXd>& theta) const;

 private:
  static constexpr int kMaxGridDim = 5;

  std::uint64_t cell_key(const std::int64_t* cell) const;

  Metric metric_;
  double radius_ = 0.0;
  double ln_kernel_volume_ = 0.0;
  std::size_t nsamples_ = 0;
  std::vector<double> whitened_;  // row-major N x d
  Eigen::MatrixXd samples_;       // kept for serialisation
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> grid_;  // cell side = R
};

/// Kernel covariance from the training samples (diagonal by default) and a
/// fixed radius in whitened units.
KdeModel fit_kde(const ChainStore& training, double radius,
                 CovarianceKind covariance = CovarianceKind::diagonal);

}  // namespace harmonic
