#include "harmonic/target_model.hpp"

#include <cmath>

namespace harmonic {

CovarianceKind covariance_kind_from_string(const std::string& name) {
  if (name == "diagonal") return CovarianceKind::diagonal;
  if (name == "full") return CovarianceKind::full;
  throw std::invalid_argument("unknown covariance kind '" + name + "'");
}

std::string to_string(CovarianceKind kind) {
  return kind == CovarianceKind::diagonal ? "diagonal" : "full";
}

Metric::Metric(Eigen::VectorXd centre, const Eigen::MatrixXd& covariance, CovarianceKind kind)
    : centre_(std::move(centre)), kind_(kind) {
  const auto d = centre_.size();
  if (covariance.rows() != d || covariance.cols() != d) {
    throw std::invalid_argument("Metric: covariance shape does not match centre");
  }
  if (kind == CovarianceKind::diagonal) {
    const Eigen::VectorXd var = covariance.diagonal();
    if (!((var.array() > 0.0).all()) || !var.allFinite()) {
      throw FitError("degenerate covariance: a dimension has zero variance");
    }
    covariance_ = var.asDiagonal();
    inv_sd_ = var.array().sqrt().inverse();
    half_ln_det_ = 0.5 * var.array().log().sum();
  } else {
    Eigen::LLT<Eigen::MatrixXd> llt(covariance);
    if (llt.info() != Eigen::Success) {
      throw FitError("degenerate covariance: matrix is not positive-definite");
    }
    covariance_ = covariance;
    chol_l_ = llt.matrixL();
    half_ln_det_ = chol_l_.diagonal().array().log().sum();
    if (!std::isfinite(half_ln_det_)) throw FitError("degenerate covariance: zero determinant");
  }
}

Metric Metric::from_samples(const Eigen::MatrixXd& samples, CovarianceKind kind) {
  const auto n = samples.rows();
  if (n < 2) throw FitError("covariance needs at least two samples");
  Eigen::VectorXd mean = samples.colwise().mean().transpose();
  const Eigen::MatrixXd centred = samples.rowwise() - mean.transpose();
  Eigen::MatrixXd cov;
  if (kind == CovarianceKind::diagonal) {
    cov = (centred.array().square().colwise().sum() / static_cast<double>(n - 1)).matrix().asDiagonal();
  } else {
    cov = centred.transpose() * centred / static_cast<double>(n - 1);
  }
  return Metric(std::move(mean), cov, kind);
}

Eigen::VectorXd Metric::whiten(const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  if (kind_ == CovarianceKind::diagonal) {
    return (theta - centre_).cwiseProduct(inv_sd_);
  }
  return chol_l_.triangularView<Eigen::Lower>().solve(theta - centre_);
}

double Metric::distance2(const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  if (kind_ == CovarianceKind::diagonal) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < centre_.size(); ++i) {
      const double u = (theta(i) - centre_(i)) * inv_sd_(i);
      acc += u * u;
    }
    return acc;
  }
  return whiten(theta).squaredNorm();
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto nrows = static_cast<Eigen::Index>(j.size());
  const auto ncols = nrows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(nrows, ncols);
  for (Eigen::Index i = 0; i < nrows; ++i) {
    const auto& row = j.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != ncols) throw std::invalid_argument("ragged matrix in json");
    for (Eigen::Index k = 0; k < ncols; ++k) m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
  }
  return m;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace harmonic
