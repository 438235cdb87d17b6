#include <doctest.h>

#include <cmath>

#include "harmonic/chains.hpp"
#include "harmonic/hypersphere.hpp"
#include "harmonic/numerics.hpp"

using namespace harmonic;

namespace {

ChainStore gaussian_store(int nchains, int n, const Eigen::VectorXd& sd, std::uint64_t seed) {
  Rng rng(seed);
  const int d = static_cast<int>(sd.size());
  ChainStore store(d);
  for (int c = 0; c < nchains; ++c) {
    Eigen::MatrixXd s(n, d);
    Eigen::VectorXd lp(n);
    for (int i = 0; i < n; ++i) {
      double q = 0.0;
      for (int k = 0; k < d; ++k) {
        s(i, k) = sd(k) * standard_normal(rng);
        q += s(i, k) * s(i, k) / (sd(k) * sd(k));
      }
      lp(i) = -0.5 * q;
    }
    store.add_chain(s, lp);
  }
  return store;
}

// Fraction of a uniform box covered by the Mahalanobis ball, times the box volume.
double mc_ball_volume(const Metric& metric, double radius, double half_box, int n, std::uint64_t seed) {
  Rng rng(seed);
  const int d = metric.ndim();
  Eigen::VectorXd x(d);
  long inside = 0;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) x(k) = metric.centre()(k) + half_box * (2.0 * uniform01(rng) - 1.0);
    inside += metric.distance2(x) < radius * radius;
  }
  return std::pow(2.0 * half_box, d) * static_cast<double>(inside) / n;
}

}  // namespace

TEST_CASE("hypersphere volume against Monte Carlo") {
  for (const int d : {2, 3, 4}) {
    Eigen::VectorXd centre = Eigen::VectorXd::LinSpaced(d, -1.0, 1.0);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (int k = 0; k < d; ++k) cov(k, k) = 0.5 + 0.5 * k;
    for (const auto kind : {CovarianceKind::diagonal, CovarianceKind::full}) {
      Eigen::MatrixXd c = cov;
      if (kind == CovarianceKind::full) c(0, 1) = c(1, 0) = 0.3;
      const Metric metric(centre, c, kind);
      const double radius = 1.3;
      const int n = 400000;
      const double mc = mc_ball_volume(metric, radius, 4.0, n, 21 + d);
      const double exact = std::exp(hypersphere_ln_volume(d, radius, c));
      // binomial standard error of the covered fraction
      const double p = mc / std::pow(8.0, d);
      const double se = std::pow(8.0, d) * std::sqrt(p * (1.0 - p) / n);
      CHECK(std::abs(mc - exact) < 4.0 * se);
    }
  }
}

TEST_CASE("hypersphere model is normalised and uniform inside") {
  const ChainStore store = gaussian_store(4, 500, Eigen::Vector2d(1.0, 2.0), 3);
  const HypersphereModel model = fit_hypersphere(store);
  const Metric& m = model.metric();
  Rng rng(4);
  const int n = 400000;
  const double half = 8.0;
  double sum = 0.0;
  double inside_value = kNegInf;
  Eigen::Vector2d x;
  for (int i = 0; i < n; ++i) {
    x << m.centre()(0) + half * (2 * uniform01(rng) - 1), m.centre()(1) + half * (2 * uniform01(rng) - 1);
    const double lp = model.ln_phi(x);
    if (lp != kNegInf) {
      if (inside_value != kNegInf) REQUIRE(lp == inside_value);
      inside_value = lp;
      sum += std::exp(lp);
    }
  }
  CHECK(sum * 4 * half * half / n == doctest::Approx(1.0).epsilon(0.01));
  CHECK(model.ln_phi(m.centre()) == doctest::Approx(-model.ln_volume()));
}

TEST_CASE("objective matches a direct sum over samples") {
  const ChainStore store = gaussian_store(3, 200, Eigen::Vector3d(1.0, 0.5, 2.0), 5);
  const Eigen::MatrixXd s = store.stacked_samples();
  const Eigen::VectorXd lp = store.stacked_ln_posterior();
  const Metric metric = Metric::from_samples(s, CovarianceKind::diagonal);
  const HypersphereObjective obj(metric, s, lp);
  for (const double r : {0.3, 0.8, 1.5, 2.5}) {
    const double ln_v = hypersphere_ln_volume(3, r, metric.covariance());
    long double acc = 0.0L;
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      if (metric.distance2(s.row(i).transpose()) < r * r) acc += std::exp(static_cast<long double>(-2.0 * (ln_v + lp(i))));
    }
    const double direct = static_cast<double>(std::log(acc / s.rows()));
    CHECK(obj.ln_mu2(r) == doctest::Approx(direct).epsilon(1e-12));
  }
  CHECK(obj.ln_mu2(0.5 * obj.min_distance()) == kPosInf);
}

TEST_CASE("fitted radius is at least as good as a fine grid") {
  const ChainStore store = gaussian_store(4, 300, Eigen::Vector2d(1.0, 3.0), 6);
  const HypersphereModel model = fit_hypersphere(store);
  const Eigen::MatrixXd s = store.stacked_samples();
  const HypersphereObjective obj(model.metric(), s, store.stacked_ln_posterior());
  double best = kPosInf;
  for (double r = obj.min_distance(); r <= obj.max_distance(); r *= 1.002) best = std::min(best, obj.ln_mu2(r));
  CHECK(obj.ln_mu2(model.radius()) <= best + 1e-9);
  CHECK(model.training_ln_mu2 == doctest::Approx(obj.ln_mu2(model.radius())));
}

TEST_CASE("radius bounds are respected") {
  const ChainStore store = gaussian_store(2, 300, Eigen::Vector2d(1.0, 1.0), 7);
  HypersphereOptions opts;
  opts.radius_bounds = std::make_pair(0.2, 0.4);
  const HypersphereModel model = fit_hypersphere(store, opts);
  CHECK(model.radius() >= 0.2);
  CHECK(model.radius() <= 0.4);
}

TEST_CASE("hypersphere JSON round trip") {
  const ChainStore store = gaussian_store(2, 100, Eigen::Vector3d(1.0, 2.0, 3.0), 8);
  HypersphereOptions opts;
  opts.covariance = CovarianceKind::full;
  const HypersphereModel model = fit_hypersphere(store, opts);
  const HypersphereModel back = HypersphereModel::from_json(nlohmann::json::parse(model.to_json().dump()));
  CHECK(back.radius() == model.radius());
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd x = store.chain(0).samples.row(i).transpose();
    CHECK(back.ln_phi(x) == model.ln_phi(x));
  }
  CHECK_THROWS_AS(HypersphereModel().ln_phi(Eigen::Vector3d::Zero()), std::logic_error);
}
