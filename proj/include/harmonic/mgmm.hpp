#pragma once

#include <cstdint>
#include <vector>

#include "harmonic/numerics.hpp"
#include "harmonic/target_model.hpp"

namespace harmonic {

struct KMeansResult {
  Eigen::MatrixXd centres;          // K x d
  std::vector<int> labels;          // one per row
  std::vector<std::size_t> counts;  // one per cluster
  double inertia = kPosInf;
};

/// Lloyd's algorithm with k-means++ seeding; the restart with the lowest
/// inertia wins. Throws FitError if a cluster is left empty.
KMeansResult kmeans(const Eigen::MatrixXd& points, int nclusters, std::uint64_t seed,
                    int restarts = 10, int max_iterations = 300);

/// Mixture of K diagonal Gaussians whose centres and covariances come from
/// K-means clusters, with softmax weights w = softmax(z) and per-component
/// scales s widening or narrowing each covariance:
///   phi(theta) = sum_k w_k N(theta; centre_k, s_k^2 Sigma_k).
class MgmmModel final : public TargetModel {
 public:
  MgmmModel() = default;
  MgmmModel(Eigen::MatrixXd centres, Eigen::MatrixXd variances, Eigen::VectorXd raw_weights,
            Eigen::VectorXd scales, double lambda);

  std::string kind() const override { return "mgmm"; }
  int ndim() const override { return static_cast<int>(centres_.cols()); }
  bool fitted() const override { return centres_.rows() > 0; }
  double ln_phi(const Eigen::Ref<const Eigen::VectorXd>& theta) const override;
  nlohmann::json to_json() const override;
  std::unique_ptr<TargetModel> clone() const override { return std::make_unique<MgmmModel>(*this); }

  static MgmmModel from_json(const nlohmann::json& j);

  int ncomponents() const { return static_cast<int>(centres_.rows()); }
  const Eigen::MatrixXd& centres() const { return centres_; }
  const Eigen::MatrixXd& variances() const { return variances_; }
  const Eigen::VectorXd& raw_weights() const { return raw_weights_; }
  const Eigen::VectorXd& scales() const { return scales_; }
  double lambda() const { return lambda_; }
  Eigen::VectorXd weights() const;

  /// Same centres and covariances with new trainable parameters.
  MgmmModel with_parameters(Eigen::VectorXd raw_weights, Eigen::VectorXd scales) const;

  /// ln of the per-component terms w_k N_k(theta) and the squared
  /// Mahalanobis distances (theta - centre_k)^T Sigma_k^{-1} (theta - centre_k).
  void component_terms(const Eigen::Ref<const Eigen::VectorXd>& theta, Eigen::VectorXd& ln_terms,
                       Eigen::VectorXd& distance2) const;

  // Fit diagnostics, filled by fit_mgmm.
  double initial_objective = kPosInf;
  double final_objective = kPosInf;
  double objective_ln_shift = 0.0;

 private:
  Eigen::MatrixXd centres_;
  Eigen::MatrixXd variances_;
  Eigen::VectorXd raw_weights_;
  Eigen::VectorXd scales_;
  double lambda_ = 0.0;
  Eigen::VectorXd ln_norm_;  // -(d/2) ln 2pi - 0.5 ln|Sigma_k|
};

struct MgmmObjective {
  double value = 0.0;
  Eigen::VectorXd grad_raw_weights;
  Eigen::VectorXd grad_scales;
};

/// C = sum_i C_i^2 + (lambda/2) sum_k s_k^2 over the batch, with
/// C_i = sum_k C_ik and C_ik = w_k N_k(theta_i) / (L pi)(theta_i) * exp(ln_shift),
/// plus analytic gradients with respect to z_k and s_k (regulariser included).
MgmmObjective mgmm_objective_and_gradients(const MgmmModel& model, const Eigen::MatrixXd& samples,
                                           const Eigen::VectorXd& ln_posterior, double ln_shift = 0.0);

struct SgdOptions {
  double step = 1e-3;
  std::size_t batch = 0;  // 0 = whole set up to 10^4 samples, else 10^3
  int epochs = 50;
  std::uint64_t seed = 0;
};

struct MgmmOptions {
  int ncomponents = 1;
  double lambda = 0.0;
  SgdOptions sgd;
  double min_scale = 0.1;
  double max_scale = 5.0;
  int kmeans_restarts = 10;
};

/// K-means on the standardised training samples, per-cluster centres and
/// diagonal covariances, then SGD on (z, s) from z = 0, s = 1. The training
/// objective is the mean of C_i^2 with C_i shifted so that it starts at one,
/// plus (lambda/2) sum s_k^2. The best epoch is kept, so the final objective
/// never exceeds the initial one.
MgmmModel fit_mgmm(const ChainStore& training, const MgmmOptions& options);

}  // namespace harmonic
