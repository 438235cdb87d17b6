#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "harmonic/chains.hpp"

namespace harmonic {

/// Raised when a target cannot be fitted to the supplied samples.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A normalised density phi(theta) learnt from training chains.
/// Fitted models are immutable; ln_phi may be called concurrently.
class TargetModel {
 public:
  virtual ~TargetModel() = default;

  virtual std::string kind() const = 0;
  virtual int ndim() const = 0;
  virtual bool fitted() const = 0;

  /// ln phi(theta); -inf outside the support. Throws std::logic_error when
  /// the model has not been fitted.
  virtual double ln_phi(const Eigen::Ref<const Eigen::VectorXd>& theta) const = 0;

  virtual nlohmann::json to_json() const = 0;
  virtual std::unique_ptr<TargetModel> clone() const = 0;
};

enum class CovarianceKind { diagonal, full };

CovarianceKind covariance_kind_from_string(const std::string& name);
std::string to_string(CovarianceKind kind);

/// Mahalanobis metric (theta - centre)^T Sigma^{-1} (theta - centre) with a
/// diagonal or Cholesky-factored covariance.
class Metric {
 public:
  Metric() = default;
  Metric(Eigen::VectorXd centre, const Eigen::MatrixXd& covariance, CovarianceKind kind);

  /// Sample mean and covariance (1/(N-1)) of the rows. Throws FitError when a
  /// dimension has zero variance or the full covariance is not positive-definite.
  static Metric from_samples(const Eigen::MatrixXd& samples, CovarianceKind kind);

  double distance2(const Eigen::Ref<const Eigen::VectorXd>& theta) const;
  /// L^{-1} (theta - centre), so that distance2 = |whiten(theta)|^2.
  Eigen::VectorXd whiten(const Eigen::Ref<const Eigen::VectorXd>& theta) const;

  const Eigen::VectorXd& centre() const { return centre_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  CovarianceKind kind() const { return kind_; }
  /// 0.5 ln |Sigma|
  double half_ln_det() const { return half_ln_det_; }
  int ndim() const { return static_cast<int>(centre_.size()); }

 private:
  Eigen::VectorXd centre_;
  Eigen::MatrixXd covariance_;
  CovarianceKind kind_ = CovarianceKind::diagonal;
  Eigen::VectorXd inv_sd_;   // diagonal case
  Eigen::MatrixXd chol_l_;   // full case, lower factor
  double half_ln_det_ = 0.0;
};

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

}  // namespace harmonic
