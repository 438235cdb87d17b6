#include "harmonic/mgmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace harmonic {

namespace {

double squared_distance(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b,
                        Eigen::Index k) {
  return (a.row(i) - b.row(k)).squaredNorm();
}

// One k-means++ seeded Lloyd run. Returns false when a cluster empties.
bool lloyd(const Eigen::MatrixXd& points, int nclusters, Rng& rng, int max_iterations,
           KMeansResult& out) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centres(nclusters, points.cols());
  centres.row(0) = points.row(static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(n))));
  Eigen::VectorXd nearest = Eigen::VectorXd::Constant(n, kPosInf);
  for (int k = 1; k < nclusters; ++k) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      nearest(i) = std::min(nearest(i), squared_distance(points, i, centres, k - 1));
      total += nearest(i);
    }
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = uniform01(rng) * total;
      for (pick = 0; pick < n - 1; ++pick) {
        target -= nearest(pick);
        if (target < 0.0) break;
      }
    } else {
      pick = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
    }
    centres.row(k) = points.row(pick);
  }

  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  std::vector<std::size_t> counts(static_cast<std::size_t>(nclusters), 0);
  double inertia = 0.0;
  for (int iter = 0; iter < max_iterations; ++iter) {
    bool changed = false;
    inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(points, i, centres, 0);
      for (int k = 1; k < nclusters; ++k) {
        const double dk = squared_distance(points, i, centres, k);
        if (dk < best_d) {
          best_d = dk;
          best = k;
        }
      }
      inertia += best_d;
      auto& label = labels[static_cast<std::size_t>(i)];
      if (label != best) {
        label = best;
        changed = true;
      }
    }
    std::fill(counts.begin(), counts.end(), 0);
    centres.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      const int k = labels[static_cast<std::size_t>(i)];
      centres.row(k) += points.row(i);
      ++counts[static_cast<std::size_t>(k)];
    }
    for (int k = 0; k < nclusters; ++k) {
      if (counts[static_cast<std::size_t>(k)] == 0) return false;
      centres.row(k) /= static_cast<double>(counts[static_cast<std::size_t>(k)]);
    }
    if (!changed) break;
  }
  out = KMeansResult{std::move(centres), std::move(labels), std::move(counts), inertia};
  return true;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, int nclusters, std::uint64_t seed, int restarts,
                    int max_iterations) {
  if (nclusters < 1) throw std::invalid_argument("kmeans: need at least one cluster");
  if (points.rows() < nclusters) throw FitError("kmeans: fewer points than clusters");
  KMeansResult best;
  for (int attempt = 0; attempt < 2 && !std::isfinite(best.inertia); ++attempt) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(attempt)));
    for (int r = 0; r < std::max(restarts, 1); ++r) {
      KMeansResult run;
      if (lloyd(points, nclusters, rng, max_iterations, run) && run.inertia < best.inertia) {
        best = std::move(run);
      }
    }
  }
  if (!std::isfinite(best.inertia)) throw FitError("kmeans: empty cluster after reseeding");
  return best;
}

MgmmModel::MgmmModel(Eigen::MatrixXd centres, Eigen::MatrixXd variances, Eigen::VectorXd raw_weights,
                     Eigen::VectorXd scales, double lambda)
    : centres_(std::move(centres)),
      variances_(std::move(variances)),
      raw_weights_(std::move(raw_weights)),
      scales_(std::move(scales)),
      lambda_(lambda) {
  const auto k = centres_.rows();
  if (k < 1) throw std::invalid_argument("MgmmModel: need at least one component");
  if (variances_.rows() != k || variances_.cols() != centres_.cols() || raw_weights_.size() != k ||
      scales_.size() != k) {
    throw std::invalid_argument("MgmmModel: inconsistent parameter shapes");
  }
  if (!(variances_.array() > 0.0).all()) throw std::invalid_argument("MgmmModel: variances must be positive");
  if (!(scales_.array() > 0.0).all()) throw std::invalid_argument("MgmmModel: scales must be positive");
  if (!(lambda_ >= 0.0)) throw std::invalid_argument("MgmmModel: lambda must be non-negative");
  const double d = static_cast<double>(centres_.cols());
  ln_norm_ = -0.5 * d * std::log(2.0 * std::numbers::pi) -
             0.5 * variances_.array().log().rowwise().sum();
}

Eigen::VectorXd MgmmModel::weights() const {
  const double m = raw_weights_.maxCoeff();
  Eigen::VectorXd w = (raw_weights_.array() - m).exp();
  return w / w.sum();
}

MgmmModel MgmmModel::with_parameters(Eigen::VectorXd raw_weights, Eigen::VectorXd scales) const {
  return MgmmModel(centres_, variances_, std::move(raw_weights), std::move(scales), lambda_);
}

void MgmmModel::component_terms(const Eigen::Ref<const Eigen::VectorXd>& theta,
                                Eigen::VectorXd& ln_terms, Eigen::VectorXd& distance2) const {
  const auto k = centres_.rows();
  const double d = static_cast<double>(centres_.cols());
  const double ln_total = std::log((raw_weights_.array() - raw_weights_.maxCoeff()).exp().sum()) +
                          raw_weights_.maxCoeff();
  ln_terms.resize(k);
  distance2.resize(k);
  for (Eigen::Index c = 0; c < k; ++c) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < centres_.cols(); ++i) {
      const double u = theta(i) - centres_(c, i);
      m += u * u / variances_(c, i);
    }
    const double s = scales_(c);
    distance2(c) = m;
    ln_terms(c) = (raw_weights_(c) - ln_total) + ln_norm_(c) - d * std::log(s) - m / (2.0 * s * s);
  }
}

double MgmmModel::ln_phi(const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  if (!fitted()) throw std::logic_error("MgmmModel: not fitted");
  if (theta.size() != ndim()) throw std::invalid_argument("MgmmModel: wrong dimension");
  Eigen::VectorXd ln_terms, distance2;
  component_terms(theta, ln_terms, distance2);
  return logsumexp(std::span<const double>(ln_terms.data(), static_cast<std::size_t>(ln_terms.size())));
}

nlohmann::json MgmmModel::to_json() const {
  return {{"kind", kind()},
          {"ndim", ndim()},
          {"ncomponents", ncomponents()},
          {"centres", matrix_to_json(centres_)},
          {"variances", matrix_to_json(variances_)},
          {"raw_weights", vector_to_json(raw_weights_)},
          {"scales", vector_to_json(scales_)},
          {"lambda", lambda_},
          {"fit",
           {{"initial_objective", finite_or_null(initial_objective)},
            {"final_objective", finite_or_null(final_objective)},
            {"objective_ln_shift", objective_ln_shift}}}};
}

MgmmModel MgmmModel::from_json(const nlohmann::json& j) {
  if (j.at("kind") != "mgmm") throw std::invalid_argument("not an mgmm model");
  MgmmModel model(matrix_from_json(j.at("centres")), matrix_from_json(j.at("variances")),
                  vector_from_json(j.at("raw_weights")), vector_from_json(j.at("scales")),
                  j.at("lambda").get<double>());
  if (j.contains("fit")) {
    const auto& fit = j["fit"];
    if (fit.contains("initial_objective") && !fit["initial_objective"].is_null())
      model.initial_objective = fit["initial_objective"].get<double>();
    if (fit.contains("final_objective") && !fit["final_objective"].is_null())
      model.final_objective = fit["final_objective"].get<double>();
    model.objective_ln_shift = fit.value("objective_ln_shift", 0.0);
  }
  return model;
}

MgmmObjective mgmm_objective_and_gradients(const MgmmModel& model, const Eigen::MatrixXd& samples,
                                           const Eigen::VectorXd& ln_posterior, double ln_shift) {
  if (!model.fitted()) throw std::logic_error("mgmm_objective_and_gradients: model not fitted");
  if (samples.rows() == 0) throw std::invalid_argument("mgmm_objective_and_gradients: empty batch");
  if (samples.rows() != ln_posterior.size() || samples.cols() != model.ndim()) {
    throw std::invalid_argument("mgmm_objective_and_gradients: batch shape mismatch");
  }
  const Eigen::VectorXd& s = model.scales();
  if (!(s.array() > 0.0).all()) throw std::invalid_argument("mgmm_objective_and_gradients: scales must be positive");

  const auto k = model.ncomponents();
  const double d = static_cast<double>(model.ndim());
  const Eigen::VectorXd w = model.weights();
  MgmmObjective out;
  out.grad_raw_weights = Eigen::VectorXd::Zero(k);
  out.grad_scales = Eigen::VectorXd::Zero(k);

  Eigen::VectorXd ln_terms, distance2, c_ik(k);
  double data_term = 0.0;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    model.component_terms(samples.row(i).transpose(), ln_terms, distance2);
    double c_i = 0.0;
    for (Eigen::Index c = 0; c < k; ++c) {
      c_ik(c) = std::exp(ln_terms(c) - ln_posterior(i) + ln_shift);
      c_i += c_ik(c);
    }
    if (c_i == 0.0) continue;
    data_term += c_i * c_i;
    for (Eigen::Index c = 0; c < k; ++c) {
      out.grad_raw_weights(c) += 2.0 * c_i * (c_ik(c) - w(c) * c_i);
      out.grad_scales(c) += 2.0 * c_i * c_ik(c) * (distance2(c) - d * s(c) * s(c)) / (s(c) * s(c) * s(c));
    }
  }
  out.value = data_term + 0.5 * model.lambda() * s.squaredNorm();
  out.grad_scales += model.lambda() * s;
  return out;
}

namespace {

// ln of the mean of C_i^2 over all samples (unshifted).
double ln_mean_square_cost(const MgmmModel& model, const Eigen::MatrixXd& samples,
                           const Eigen::VectorXd& ln_posterior) {
  LogSumExp acc;
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    acc.add(2.0 * (model.ln_phi(samples.row(i).transpose()) - ln_posterior(i)));
  }
  return acc.value() - std::log(static_cast<double>(samples.rows()));
}

// Training objective: mean_i (C_i e^shift)^2 + (lambda/2) sum s^2.
double training_objective(const MgmmModel& model, const Eigen::MatrixXd& samples,
                          const Eigen::VectorXd& ln_posterior, double ln_shift) {
  return std::exp(ln_mean_square_cost(model, samples, ln_posterior) + 2.0 * ln_shift) +
         0.5 * model.lambda() * model.scales().squaredNorm();
}

}  // namespace

MgmmModel fit_mgmm(const ChainStore& training, const MgmmOptions& options) {
  const int k = options.ncomponents;
  if (k < 1) throw std::invalid_argument("fit_mgmm: K must be at least 1");
  if (!(options.lambda >= 0.0)) throw std::invalid_argument("fit_mgmm: lambda must be non-negative");
  if (!(options.min_scale > 0.0 && options.max_scale >= options.min_scale)) {
    throw std::invalid_argument("fit_mgmm: invalid scale bounds");
  }
  const Eigen::MatrixXd samples = training.stacked_samples();
  const Eigen::VectorXd ln_posterior = training.stacked_ln_posterior();
  const Eigen::Index n = samples.rows();
  const Eigen::Index d = samples.cols();
  if (n < std::max<Eigen::Index>(k, 2)) throw FitError("fit_mgmm: fewer training samples than components");

  // Cluster on standardised coordinates.
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  const Eigen::RowVectorXd sd =
      ((samples.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(n - 1)).sqrt();
  if (!(sd.array() > 0.0).all()) throw FitError("fit_mgmm: degenerate covariance in training samples");
  const Eigen::MatrixXd scaled = (samples.rowwise() - mean).array().rowwise() / sd.array();
  const KMeansResult clusters = kmeans(scaled, k, derive_seed(options.sgd.seed, 0x6b6d), options.kmeans_restarts);

  Eigen::MatrixXd centres = Eigen::MatrixXd::Zero(k, d);
  Eigen::MatrixXd variances = Eigen::MatrixXd::Zero(k, d);
  for (Eigen::Index i = 0; i < n; ++i) centres.row(clusters.labels[static_cast<std::size_t>(i)]) += samples.row(i);
  for (int c = 0; c < k; ++c) {
    if (clusters.counts[static_cast<std::size_t>(c)] < 2) throw FitError("fit_mgmm: cluster with fewer than two samples");
    centres.row(c) /= static_cast<double>(clusters.counts[static_cast<std::size_t>(c)]);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = clusters.labels[static_cast<std::size_t>(i)];
    variances.row(c) += (samples.row(i) - centres.row(c)).array().square().matrix();
  }
  for (int c = 0; c < k; ++c) {
    variances.row(c) /= static_cast<double>(clusters.counts[static_cast<std::size_t>(c)] - 1);
    if (!(variances.row(c).array() > 0.0).all()) throw FitError("fit_mgmm: cluster with zero variance");
  }

  MgmmModel model(centres, variances, Eigen::VectorXd::Zero(k),
                  Eigen::VectorXd::Ones(k).cwiseMax(options.min_scale).cwiseMin(options.max_scale),
                  options.lambda);

  const double ln_shift = -0.5 * ln_mean_square_cost(model, samples, ln_posterior);
  if (!std::isfinite(ln_shift)) throw FitError("fit_mgmm: non-finite objective at initialisation");
  const double initial = training_objective(model, samples, ln_posterior, ln_shift);

  std::size_t batch = options.sgd.batch;
  if (batch == 0) batch = n <= 10000 ? static_cast<std::size_t>(n) : 1000;
  batch = std::min<std::size_t>(batch, static_cast<std::size_t>(n));

  Rng rng(derive_seed(options.sgd.seed, 0x736764));
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  Eigen::VectorXd z = model.raw_weights();
  Eigen::VectorXd s = model.scales();
  MgmmModel best = model;
  double best_objective = initial;
  Eigen::MatrixXd batch_samples(static_cast<Eigen::Index>(batch), d);
  Eigen::VectorXd batch_lnp(static_cast<Eigen::Index>(batch));

  for (int epoch = 0; epoch < options.sgd.epochs; ++epoch) {
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[uniform_index(rng, i + 1)]);
    for (std::size_t start = 0; start + batch <= order.size(); start += batch) {
      for (std::size_t b = 0; b < batch; ++b) {
        batch_samples.row(static_cast<Eigen::Index>(b)) = samples.row(order[start + b]);
        batch_lnp(static_cast<Eigen::Index>(b)) = ln_posterior(order[start + b]);
      }
      // Mean over the batch: scale lambda by the batch size and divide through.
      const MgmmModel current = model.with_parameters(z, s);
      const double nb = static_cast<double>(batch);
      const MgmmModel scaled_reg(current.centres(), current.variances(), z, s, options.lambda * nb);
      const MgmmObjective obj = mgmm_objective_and_gradients(scaled_reg, batch_samples, batch_lnp, ln_shift);
      if (!std::isfinite(obj.value)) throw FitError("fit_mgmm: non-finite objective during SGD");
      z -= options.sgd.step * obj.grad_raw_weights / nb;
      s -= options.sgd.step * obj.grad_scales / nb;
      s = s.cwiseMax(options.min_scale).cwiseMin(options.max_scale);
    }
    const MgmmModel candidate = model.with_parameters(z, s);
    const double value = training_objective(candidate, samples, ln_posterior, ln_shift);
    if (!std::isfinite(value)) throw FitError("fit_mgmm: non-finite objective after epoch");
    if (value < best_objective) {
      best_objective = value;
      best = candidate;
    }
  }
  best.initial_objective = initial;
  best.final_objective = best_objective;
  best.objective_ln_shift = ln_shift;
  return best;
}

}  // namespace harmonic
