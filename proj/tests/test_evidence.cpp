#include <doctest.h>

#include <cmath>
#include <numbers>

#include "harmonic/evidence.hpp"

using namespace harmonic;

namespace {

// Exact standard normal density in d dimensions, used as the "optimal" target.
class NormalTarget final : public TargetModel {
 public:
  explicit NormalTarget(int d) : d_(d) {}
  std::string kind() const override { return "normal"; }
  int ndim() const override { return d_; }
  bool fitted() const override { return true; }
  double ln_phi(const Eigen::Ref<const Eigen::VectorXd>& x) const override {
    return -0.5 * x.squaredNorm() - 0.5 * d_ * std::log(2 * std::numbers::pi);
  }
  nlohmann::json to_json() const override { return {}; }
  std::unique_ptr<TargetModel> clone() const override { return std::make_unique<NormalTarget>(*this); }

 private:
  int d_;
};

struct Oracle {
  long double mean, s2, sigma2, kappa, nu4, n_eff;
};

// Weighted combination written out in long double from the definitions.
Oracle combine_oracle(const std::vector<double>& ln_rho, const std::vector<double>& w) {
  long double W = 0, W2 = 0, m = 0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    W += w[j];
    W2 += static_cast<long double>(w[j]) * w[j];
    m += w[j] * std::exp(static_cast<long double>(ln_rho[j]));
  }
  m /= W;
  const long double neff = W * W / W2;
  long double m2 = 0, m4 = 0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const long double dv = std::exp(static_cast<long double>(ln_rho[j])) - m;
    m2 += w[j] * dv * dv;
    m4 += w[j] * dv * dv * dv * dv;
  }
  const long double s2 = neff / (neff - 1) * m2 / W;
  const long double sigma2 = s2 / neff;
  const long double kappa = m4 / (s2 * s2 * W);
  const long double nu4 = sigma2 * sigma2 / neff * (kappa - 1 + 2 / (neff - 1));
  return {m, s2, sigma2, kappa, nu4, neff};
}

}  // namespace

TEST_CASE("per-chain estimate is the log mean of the ratios") {
  const std::vector<double> t = {-1.0, 0.5, 2.0, -3.0};
  long double s = 0;
  for (const double x : t) s += std::exp(static_cast<long double>(x));
  CHECK(accumulate_terms(t).ln_rho == doctest::Approx(static_cast<double>(std::log(s / 4))).epsilon(1e-15));
  CHECK(accumulate_terms(std::vector<double>{kNegInf, kNegInf}).empty_support());
  CHECK_THROWS(accumulate_terms(std::vector<double>{}));
}

TEST_CASE("effective sample size") {
  CHECK(effective_sample_size(std::vector<double>(37, 250.0)) == doctest::Approx(37.0).epsilon(1e-15));
  CHECK(effective_sample_size(std::vector<double>{1.0, 3.0}) == doctest::Approx(16.0 / 10.0));
  CHECK_THROWS(effective_sample_size(std::vector<double>{1.0, 0.0}));
}

TEST_CASE("combination matches a long-double oracle with ragged weights") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const int c = 3 + trial;
    std::vector<double> ln_rho(c), w(c);
    EvidenceAccumulator acc;
    for (int j = 0; j < c; ++j) {
      ln_rho[j] = -50.0 + 0.3 * standard_normal(rng);
      w[j] = 100.0 + static_cast<double>(uniform_index(rng, 900));
      acc.add(ln_rho[j], static_cast<std::size_t>(w[j]));
    }
    const auto s = acc.combine();
    const auto o = combine_oracle(ln_rho, w);
    CHECK(s.ln_rho == doctest::Approx(static_cast<double>(std::log(o.mean))).epsilon(1e-13));
    CHECK(s.ln_s2 == doctest::Approx(static_cast<double>(std::log(o.s2))).epsilon(1e-12));
    CHECK(s.ln_sigma2 == doctest::Approx(static_cast<double>(std::log(o.sigma2))).epsilon(1e-12));
    CHECK(s.kappa == doctest::Approx(static_cast<double>(o.kappa)).epsilon(1e-10));
    CHECK(s.ln_nu4 == doctest::Approx(static_cast<double>(std::log(o.nu4))).epsilon(1e-11));
    CHECK(s.n_eff == doctest::Approx(static_cast<double>(o.n_eff)).epsilon(1e-14));
    CHECK(s.ln_nu4 == ln_variance_of_variance(s.ln_sigma2, s.kappa, s.n_eff));
  }
}

TEST_CASE("combination is invariant to the working shift") {
  Rng rng(2);
  EvidenceAccumulator acc;
  for (int j = 0; j < 50; ++j) acc.add(500.0 + 0.5 * standard_normal(rng), 1000);
  const auto ref = acc.combine();
  for (const double offset : {-150.0, -20.0, 0.0, 20.0, 150.0}) {
    const auto s = acc.combine(ref.shift + offset);
    CHECK(s.ln_rho == doctest::Approx(ref.ln_rho).epsilon(1e-12));
    CHECK(s.ln_sigma2 == doctest::Approx(ref.ln_sigma2).epsilon(1e-12));
    CHECK(s.kappa == doctest::Approx(ref.kappa).epsilon(1e-12));
    CHECK(s.ln_nu4 == doctest::Approx(ref.ln_nu4).epsilon(1e-12));
  }
  // same data offset by -1000: ln values move, kappa does not
  EvidenceAccumulator low;
  for (std::size_t j = 0; j < acc.nchains(); ++j) low.add(acc.ln_rho()[j] - 1000.0, 1000);
  const auto s = low.combine();
  CHECK(s.ln_rho == doctest::Approx(ref.ln_rho - 1000.0).epsilon(1e-14));
  CHECK(s.ln_sigma2 == doctest::Approx(ref.ln_sigma2 - 2000.0).epsilon(1e-14));
  CHECK(s.kappa == doctest::Approx(ref.kappa).epsilon(1e-10));
}

TEST_CASE("empty-support chains count as zero; all empty is an error") {
  EvidenceAccumulator acc;
  acc.add(0.0, 10);
  acc.add(kNegInf, 10);
  const auto s = acc.combine();
  CHECK(s.empty_support_chains == 1);
  CHECK(s.ln_rho == doctest::Approx(std::log(0.5)));
  EvidenceAccumulator none;
  none.add(kNegInf, 10);
  none.add(kNegInf, 10);
  CHECK_THROWS(none.combine());
  EvidenceAccumulator one;
  one.add(0.0, 10);
  CHECK_THROWS(one.combine());
}

TEST_CASE("optimal target gives zero variance") {
  Rng rng(3);
  const double ln_z = -12.345;
  ChainStore store(3);
  const NormalTarget target(3);
  for (int c = 0; c < 10; ++c) {
    Eigen::MatrixXd s(200, 3);
    Eigen::VectorXd lp(200);
    for (int i = 0; i < 200; ++i) {
      for (int k = 0; k < 3; ++k) s(i, k) = standard_normal(rng);
      lp(i) = target.ln_phi(s.row(i).transpose()) + ln_z;
    }
    store.add_chain(s, lp);
  }
  const auto r = compute_evidence(store, target);
  CHECK(r.evidence.ln_mean == doctest::Approx(ln_z).epsilon(1e-14));
  CHECK(r.ln_evidence_std < 1e-14);
}

TEST_CASE("the sanity ratio at N_eff = 100 is sqrt(2/99)") {
  CHECK(expected_nu_sigma_ratio(100.0) == doctest::Approx(std::sqrt(2.0 / 99.0)).epsilon(1e-15));
  CHECK(std::abs(expected_nu_sigma_ratio(100.0) - 0.1421) < 5e-5);
  CHECK(std::isnan(expected_nu_sigma_ratio(1.0)));
}

TEST_CASE("reciprocal estimate and its variance are unbiased over repetitions") {
  // chain estimates: mean of 50 Exp(1) draws, so E[rho_j] = 1 and var(rho_j) = 1/50.
  Rng rng(4);
  const int reps = 1000, chains = 20, n = 50;
  double sum = 0, sum2 = 0, sum_sigma2 = 0;
  for (int r = 0; r < reps; ++r) {
    EvidenceAccumulator acc;
    for (int c = 0; c < chains; ++c) {
      std::vector<double> t(n);
      for (auto& x : t) x = std::log(-std::log1p(-uniform01(rng)));
      acc.add(accumulate_terms(t));
    }
    const auto s = acc.combine();
    const double rho = std::exp(s.ln_rho);
    sum += rho;
    sum2 += rho * rho;
    sum_sigma2 += std::exp(s.ln_sigma2);
  }
  const double mean = sum / reps;
  const double var = sum2 / reps - mean * mean;
  CHECK(std::abs(mean - 1.0) < 3.0 * std::sqrt(var / reps));
  // true variance of the estimate is 1 / (chains * n)
  const double true_var = 1.0 / (chains * n);
  CHECK(std::abs(sum_sigma2 / reps - true_var) < 0.05 * true_var);
}

TEST_CASE("uncorrelated estimators against direct long-double moments") {
  Rng rng(5);
  std::vector<double> t(300);
  for (auto& x : t) x = -700.0 + 0.8 * standard_normal(rng);
  const auto u = uncorrelated_estimators(t, 3);
  const long double n = t.size();
  long double mu1 = 0, mu2 = 0, mu3 = 0;
  const long double off = 700.0L;  // long double reaches far enough for exp(-700 * 2)
  std::vector<long double> xs;
  for (const double v : t) {
    const long double x = std::exp(static_cast<long double>(v) + off);
    xs.push_back(x);
    mu1 += x / n;
    mu2 += x * x / n;
    mu3 += x * x * x / n;
  }
  long double m2 = 0, m4 = 0;
  for (const auto x : xs) {
    m2 += (x - mu1) * (x - mu1) / n;
    m4 += std::pow(x - mu1, 4) / n;
  }
  CHECK(u.ln_mu[0] == doctest::Approx(static_cast<double>(std::log(mu1) - off)).epsilon(1e-13));
  CHECK(u.ln_mu[1] == doctest::Approx(static_cast<double>(std::log(mu2) - 2 * off)).epsilon(1e-13));
  CHECK(u.ln_mu[2] == doctest::Approx(static_cast<double>(std::log(mu3) - 3 * off)).epsilon(1e-13));
  CHECK(u.ln_sigma2 == doctest::Approx(static_cast<double>(std::log((mu2 - mu1 * mu1) / (n - 1)) - 2 * off)).epsilon(1e-10));
  const long double vs = ((n - 1) * (n - 1) / (n * n * n) * m4 - (n - 1) * (n - 3) / (n * n * n) * m2 * m2) / ((n - 1) * (n - 1));
  CHECK(u.ln_var_sigma2 == doctest::Approx(static_cast<double>(std::log(vs) - 4 * off)).epsilon(1e-10));
}

TEST_CASE("Taylor inversion against Monte Carlo for a normal estimate") {
  const double rho = 2.0e-3, sd = 0.05 * rho;
  Rng rng(6);
  const int n = 1000000;
  double s1 = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 / (rho + sd * standard_normal(rng));
    s1 += z;
    s2 += z * z;
  }
  const double mean = s1 / n, var = s2 / n - mean * mean;
  const auto t = taylor_inverse(std::log(rho), 2 * std::log(sd));
  // neglected terms are O((sd/rho)^4) relative
  CHECK(std::abs(std::exp(t.ln_mean) - mean) < 4 * std::sqrt(var / n) + 3 * std::pow(0.05, 4) * mean);
  CHECK(std::exp(t.ln_var) == doctest::Approx(var).epsilon(0.03));
  const auto exact = taylor_inverse(std::log(rho), kNegInf);
  CHECK(exact.ln_mean == doctest::Approx(-std::log(rho)));
  CHECK(exact.ln_var == kNegInf);
}

TEST_CASE("diagnostics flags") {
  CombinedStats s;
  s.n_eff = 100;
  s.ln_sigma2 = std::log(1e-4);
  s.kappa = 3.0;
  s.ln_nu4 = ln_variance_of_variance(s.ln_sigma2, s.kappa, s.n_eff);
  auto d = sanity_checks(s);
  CHECK_FALSE(d.kurtosis_flag);
  CHECK_FALSE(d.ratio_flag);
  // Gaussian kurtosis: nu/sigma = sqrt((2 + 2/(N-1)) / N)
  CHECK(d.nu_over_sigma_ratio == doctest::Approx(std::sqrt((2.0 + 2.0 / 99.0) / 100.0)));
  s.kappa = 50.0;
  s.ln_nu4 = ln_variance_of_variance(s.ln_sigma2, s.kappa, s.n_eff);
  d = sanity_checks(s);
  CHECK(d.kurtosis_flag);
  CHECK(d.ratio_flag);
}

TEST_CASE("Bayes factor of identical runs is exactly one; JSON round trip") {
  EvidenceAccumulator acc;
  Rng rng(7);
  for (int j = 0; j < 30; ++j) acc.add(-10.0 + 0.1 * standard_normal(rng), 500);
  const auto r = evidence_from_stats(acc.combine());
  const auto bf = bayes_factor(r, r);
  CHECK(bf.ln_bf == 0.0);
  CHECK(bf.ln_bf_std == doctest::Approx(std::sqrt(2.0) * r.ln_evidence_std));
  CHECK(bf.ln_bf_mean > 0.0);

  EvidenceAccumulator other;
  for (int j = 0; j < 30; ++j) other.add(-12.0 + 0.1 * standard_normal(rng), 500);
  const auto r2 = evidence_from_stats(other.combine());
  const auto b = bayes_factor(r, r2);
  const double rho1 = std::exp(r.stats.ln_rho), rho2 = std::exp(r2.stats.ln_rho);
  const double v1 = std::exp(r.stats.ln_sigma2), v2 = std::exp(r2.stats.ln_sigma2);
  CHECK(std::exp(b.ln_bf_mean) == doctest::Approx(rho2 / rho1 * (1 + v1 / (rho1 * rho1))));
  CHECK(b.bf_var() == doctest::Approx((rho1 * rho1 * v2 + rho2 * rho2 * v1) / std::pow(rho1, 4)));

  const auto back = EvidenceResult::from_json(nlohmann::json::parse(r.to_json().dump()));
  CHECK(back.to_json() == r.to_json());
  CHECK(back.stats.ln_rho == r.stats.ln_rho);
}
