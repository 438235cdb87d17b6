#pragma once

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "harmonic/chains.hpp"
#include "harmonic/numerics.hpp"
#include "harmonic/target_model.hpp"

namespace harmonic {

/// Per-chain reciprocal-evidence estimate rho_j = (1/N_j) sum_i phi(theta_i) / (L pi)(theta_i).
struct ChainEstimate {
  double ln_rho = kNegInf;
  std::size_t nsamples = 0;
  /// No sample of the chain lies in the target's support, so rho_j = 0.
  bool empty_support() const { return ln_rho == kNegInf; }
};

ChainEstimate accumulate_chain(const Chain& chain, const TargetModel& model);

/// Same from precomputed ln phi - ln(L pi) terms.
ChainEstimate accumulate_terms(std::span<const double> ln_terms);

/// (sum w)^2 / sum w^2.
double effective_sample_size(std::span<const double> weights);

/// Weighted statistics of the per-chain estimates, all in natural log.
struct CombinedStats {
  double ln_rho = kNegInf;     // weighted mean of rho_j
  double ln_s2 = kNegInf;      // population variance estimate
  double ln_sigma2 = kNegInf;  // variance of the mean, s^2 / N_eff
  double ln_nu4 = kNegInf;     // variance of sigma^2
  double kappa = 0.0;          // kurtosis; nan when s^2 = 0
  double n_eff = 0.0;
  std::size_t nchains = 0;
  std::size_t nsamples = 0;
  std::size_t empty_support_chains = 0;
  double shift = 0.0;  // added to every ln rho_j before leaving log space
};

/// ln nu^4 = 2 ln sigma^2 - ln N_eff + ln(kappa - 1 + 2 / (N_eff - 1)), -inf when
/// the bracket is not positive.
double ln_variance_of_variance(double ln_sigma2, double kappa, double n_eff);

/// Collects (ln rho_j, N_j) and reduces them with weights w_j = N_j. The
/// reduction works on exp(ln rho_j + shift), where the shift defaults to
/// -max_j ln rho_j so the largest value is one.
class EvidenceAccumulator {
 public:
  void add(const ChainEstimate& estimate);
  void add(double ln_rho, std::size_t nsamples);

  std::size_t nchains() const { return ln_rho_.size(); }
  const std::vector<double>& ln_rho() const { return ln_rho_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Throws std::invalid_argument with fewer than two chains or when every
  /// chain has empty support.
  CombinedStats combine(std::optional<double> shift = std::nullopt) const;

 private:
  std::vector<double> ln_rho_;
  std::vector<double> weights_;
};

/// Moment estimators for independent terms x_i = phi_i / (L pi)_i, given ln x_i.
struct UncorrelatedStats {
  std::vector<double> ln_mu;  // ln mu_n for n = 1..order
  double ln_rho = kNegInf;
  double ln_sigma2 = kNegInf;
  double ln_var_sigma2 = kNegInf;
};

/// mu_n = mean of x^n, sigma^2 = (mu_2 - mu_1^2) / (N - 1) evaluated through
/// centred moments, and var(sigma^2) from plug-in central moments m2, m4:
///   (1/(N-1)^2) [ (N-1)^2 / N^3 m4 - (N-1)(N-3) / N^3 m2^2 ].
UncorrelatedStats uncorrelated_estimators(std::span<const double> ln_terms, int order = 2);

/// Second-order Taylor estimates for z = 1/rho, in log form.
struct TaylorEstimate {
  double ln_mean = kNegInf;  // ln[(1/rho)(1 + sigma^2/rho^2)]
  double ln_var = kNegInf;   // ln[sigma^2 / rho^4]
};

TaylorEstimate taylor_inverse(double ln_rho, double ln_sigma2);

struct Diagnostics {
  double nu_over_sigma_ratio = 0.0;  // nu^2 / sigma^2
  double expected_ratio = 0.0;       // sqrt(2 / (N_eff - 1))
  bool kurtosis_flag = false;        // kappa > kKurtosisThreshold
  bool ratio_flag = false;           // ratio > 2 x expected
};

inline constexpr double kKurtosisThreshold = 9.0;

/// sqrt(2 / (N_eff - 1)); nan for N_eff <= 1.
double expected_nu_sigma_ratio(double n_eff);

struct EvidenceResult {
  CombinedStats stats;
  TaylorEstimate evidence;
  /// Standard deviation of ln z to first order, sigma / rho.
  double ln_evidence_std = 0.0;
  Diagnostics diagnostics;

  nlohmann::json to_json() const;
  static EvidenceResult from_json(const nlohmann::json& j);
};

Diagnostics sanity_checks(const CombinedStats& stats);

/// Per-chain estimates, combination, Taylor inversion and sanity checks.
EvidenceResult compute_evidence(const ChainStore& inference, const TargetModel& model,
                                std::optional<double> shift = std::nullopt);
EvidenceResult evidence_from_stats(const CombinedStats& stats);

struct BayesFactorResult {
  double ln_bf = 0.0;        // plug-in ln(rho2 / rho1)
  double ln_bf_mean = 0.0;   // ln E(z1/z2) ~ ln[(rho2/rho1)(1 + sigma1^2/rho1^2)]
  double ln_bf_var = kNegInf;  // ln[(rho1^2 sigma2^2 + rho2^2 sigma1^2) / rho1^4]
  double ln_bf_std = 0.0;    // std of ln BF to first order
  double bf_var() const { return std::exp(ln_bf_var); }

  nlohmann::json to_json() const;
};

/// Bayes factor z1 / z2. Throws std::invalid_argument on non-finite inputs.
BayesFactorResult bayes_factor(const EvidenceResult& first, const EvidenceResult& second);

}  // namespace harmonic
