#include "harmonic/evidence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace harmonic {

ChainEstimate accumulate_terms(std::span<const double> ln_terms) {
  if (ln_terms.empty()) throw std::invalid_argument("accumulate_terms: empty chain");
  ChainEstimate out;
  out.nsamples = ln_terms.size();
  const double total = logsumexp(ln_terms);
  out.ln_rho = total == kNegInf ? kNegInf : total - std::log(static_cast<double>(ln_terms.size()));
  return out;
}

ChainEstimate accumulate_chain(const Chain& chain, const TargetModel& model) {
  if (chain.size() == 0) throw std::invalid_argument("accumulate_chain: empty chain");
  std::vector<double> terms(static_cast<std::size_t>(chain.size()));
  for (Eigen::Index i = 0; i < chain.size(); ++i) {
    terms[static_cast<std::size_t>(i)] = model.ln_phi(chain.samples.row(i).transpose()) - chain.ln_posterior(i);
  }
  return accumulate_terms(terms);
}

double effective_sample_size(std::span<const double> weights) {
  if (weights.empty()) throw std::invalid_argument("effective_sample_size: no weights");
  double sum = 0.0, sum2 = 0.0;
  for (const double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("effective_sample_size: weights must be positive");
    sum += w;
    sum2 += w * w;
  }
  return sum * sum / sum2;
}

double ln_variance_of_variance(double ln_sigma2, double kappa, double n_eff) {
  const double bracket = kappa - 1.0 + 2.0 / (n_eff - 1.0);
  if (!(bracket > 0.0) || ln_sigma2 == kNegInf) return kNegInf;
  return 2.0 * ln_sigma2 - std::log(n_eff) + std::log(bracket);
}

void EvidenceAccumulator::add(const ChainEstimate& estimate) { add(estimate.ln_rho, estimate.nsamples); }

void EvidenceAccumulator::add(double ln_rho, std::size_t nsamples) {
  if (nsamples == 0) throw std::invalid_argument("EvidenceAccumulator: chain weight must be positive");
  if (std::isnan(ln_rho) || ln_rho == kPosInf) throw std::invalid_argument("EvidenceAccumulator: ln rho must be finite or -inf");
  ln_rho_.push_back(ln_rho);
  weights_.push_back(static_cast<double>(nsamples));
}

CombinedStats EvidenceAccumulator::combine(std::optional<double> shift) const {
  if (ln_rho_.size() < 2) throw std::invalid_argument("combine: need at least two chains");
  const double max_ln = *std::max_element(ln_rho_.begin(), ln_rho_.end());
  if (max_ln == kNegInf) throw std::invalid_argument("combine: every chain has empty target support");

  CombinedStats out;
  out.shift = shift.value_or(-max_ln);
  out.nchains = ln_rho_.size();
  out.n_eff = effective_sample_size(weights_);

  std::vector<double> x(ln_rho_.size());
  double total_w = 0.0, mean = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    x[j] = std::exp(ln_rho_[j] + out.shift);
    total_w += weights_[j];
    mean += weights_[j] * x[j];
    out.nsamples += static_cast<std::size_t>(weights_[j]);
    if (ln_rho_[j] == kNegInf) ++out.empty_support_chains;
  }
  mean /= total_w;

  double m2 = 0.0, m4 = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d2 = (x[j] - mean) * (x[j] - mean);
    m2 += weights_[j] * d2;
    m4 += weights_[j] * d2 * d2;
  }
  const double s2 = out.n_eff / (out.n_eff - 1.0) * m2 / total_w;

  out.ln_rho = std::log(mean) - out.shift;
  out.ln_s2 = std::log(s2) - 2.0 * out.shift;
  out.ln_sigma2 = out.ln_s2 - std::log(out.n_eff);
  out.kappa = s2 > 0.0 ? m4 / (s2 * s2 * total_w) : std::nan("");
  out.ln_nu4 = s2 > 0.0 ? ln_variance_of_variance(out.ln_sigma2, out.kappa, out.n_eff) : kNegInf;
  return out;
}

UncorrelatedStats uncorrelated_estimators(std::span<const double> ln_terms, int order) {
  const std::size_t n = ln_terms.size();
  if (n < 2) throw std::invalid_argument("uncorrelated_estimators: need at least two terms");
  if (order < 2) throw std::invalid_argument("uncorrelated_estimators: order must be at least 2");
  const double max_ln = *std::max_element(ln_terms.begin(), ln_terms.end());
  if (std::isnan(max_ln) || max_ln == kPosInf) throw std::invalid_argument("uncorrelated_estimators: invalid term");
  const double ln_n = std::log(static_cast<double>(n));
  const double dn = static_cast<double>(n);

  UncorrelatedStats out;
  std::vector<double> scaled(n);
  for (int k = 1; k <= order; ++k) {
    for (std::size_t i = 0; i < n; ++i) scaled[i] = k * ln_terms[i];
    const double lse = logsumexp(scaled);
    out.ln_mu.push_back(lse == kNegInf ? kNegInf : lse - ln_n);
  }
  out.ln_rho = out.ln_mu[0];
  if (max_ln == kNegInf) return out;

  const double shift = -max_ln;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = std::exp(ln_terms[i] + shift);
    mean += scaled[i];
  }
  mean /= dn;
  double m2 = 0.0, m4 = 0.0;
  for (const double v : scaled) {
    const double d2 = (v - mean) * (v - mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= dn;
  m4 /= dn;
  out.ln_sigma2 = std::log(m2 / (dn - 1.0)) - 2.0 * shift;
  const double var_s2 = ((dn - 1.0) * (dn - 1.0) / (dn * dn * dn) * m4 -
                         (dn - 1.0) * (dn - 3.0) / (dn * dn * dn) * m2 * m2) /
                        ((dn - 1.0) * (dn - 1.0));
  out.ln_var_sigma2 = (var_s2 > 0.0 ? std::log(var_s2) : kNegInf) - 4.0 * shift;
  return out;
}

TaylorEstimate taylor_inverse(double ln_rho, double ln_sigma2) {
  if (!std::isfinite(ln_rho)) throw std::invalid_argument("taylor_inverse: rho must be positive and finite");
  if (std::isnan(ln_sigma2) || ln_sigma2 == kPosInf) throw std::invalid_argument("taylor_inverse: invalid variance");
  TaylorEstimate out;
  out.ln_mean = -ln_rho + std::log1p(std::exp(ln_sigma2 - 2.0 * ln_rho));
  out.ln_var = ln_sigma2 == kNegInf ? kNegInf : ln_sigma2 - 4.0 * ln_rho;
  return out;
}

double expected_nu_sigma_ratio(double n_eff) {
  return n_eff > 1.0 ? std::sqrt(2.0 / (n_eff - 1.0)) : std::nan("");
}

Diagnostics sanity_checks(const CombinedStats& stats) {
  Diagnostics out;
  out.expected_ratio = expected_nu_sigma_ratio(stats.n_eff);
  out.nu_over_sigma_ratio = stats.ln_sigma2 == kNegInf ? std::nan("") : std::exp(0.5 * stats.ln_nu4 - stats.ln_sigma2);
  out.kurtosis_flag = stats.kappa > kKurtosisThreshold;
  out.ratio_flag = out.nu_over_sigma_ratio > 2.0 * out.expected_ratio;
  return out;
}

EvidenceResult evidence_from_stats(const CombinedStats& stats) {
  EvidenceResult out;
  out.stats = stats;
  out.evidence = taylor_inverse(stats.ln_rho, stats.ln_sigma2);
  out.ln_evidence_std = std::exp(0.5 * stats.ln_sigma2 - stats.ln_rho);
  out.diagnostics = sanity_checks(stats);
  return out;
}

EvidenceResult compute_evidence(const ChainStore& inference, const TargetModel& model, std::optional<double> shift) {
  if (!model.fitted()) throw std::logic_error("compute_evidence: model not fitted");
  if (model.ndim() != inference.ndim()) throw std::invalid_argument("compute_evidence: dimension mismatch");
  EvidenceAccumulator acc;
  for (const Chain& chain : inference.chains()) acc.add(accumulate_chain(chain, model));
  return evidence_from_stats(acc.combine(shift));
}

nlohmann::json EvidenceResult::to_json() const {
  const auto& s = stats;
  return {{"ln_rho_hat", finite_or_null(s.ln_rho)},
          {"ln_s2", finite_or_null(s.ln_s2)},
          {"ln_sigma2", finite_or_null(s.ln_sigma2)},
          {"ln_nu4", finite_or_null(s.ln_nu4)},
          {"kappa_hat", finite_or_null(s.kappa)},
          {"n_eff", s.n_eff},
          {"nchains", s.nchains},
          {"nsamples", s.nsamples},
          {"empty_support_chains", s.empty_support_chains},
          {"shift", s.shift},
          {"ln_evidence_mean", finite_or_null(evidence.ln_mean)},
          {"ln_evidence_var", finite_or_null(evidence.ln_var)},
          {"ln_evidence_std", finite_or_null(ln_evidence_std)},
          {"diagnostics",
           {{"nu_over_sigma_ratio", finite_or_null(diagnostics.nu_over_sigma_ratio)},
            {"expected_ratio", finite_or_null(diagnostics.expected_ratio)},
            {"kurtosis_flag", diagnostics.kurtosis_flag},
            {"ratio_flag", diagnostics.ratio_flag}}}};
}

EvidenceResult EvidenceResult::from_json(const nlohmann::json& j) {
  EvidenceResult out;
  auto& s = out.stats;
  s.ln_rho = number_or(j.at("ln_rho_hat"), kNegInf);
  s.ln_s2 = number_or(j.at("ln_s2"), kNegInf);
  s.ln_sigma2 = number_or(j.at("ln_sigma2"), kNegInf);
  s.ln_nu4 = number_or(j.at("ln_nu4"), kNegInf);
  s.kappa = number_or(j.at("kappa_hat"), std::nan(""));
  s.n_eff = j.at("n_eff").get<double>();
  s.nchains = j.at("nchains").get<std::size_t>();
  s.nsamples = j.at("nsamples").get<std::size_t>();
  s.empty_support_chains = j.at("empty_support_chains").get<std::size_t>();
  s.shift = j.at("shift").get<double>();
  out.evidence.ln_mean = number_or(j.at("ln_evidence_mean"), kNegInf);
  out.evidence.ln_var = number_or(j.at("ln_evidence_var"), kNegInf);
  out.ln_evidence_std = number_or(j.at("ln_evidence_std"), std::nan(""));
  const auto& d = j.at("diagnostics");
  out.diagnostics.nu_over_sigma_ratio = number_or(d.at("nu_over_sigma_ratio"), std::nan(""));
  out.diagnostics.expected_ratio = number_or(d.at("expected_ratio"), std::nan(""));
  out.diagnostics.kurtosis_flag = d.at("kurtosis_flag").get<bool>();
  out.diagnostics.ratio_flag = d.at("ratio_flag").get<bool>();
  return out;
}

BayesFactorResult bayes_factor(const EvidenceResult& first, const EvidenceResult& second) {
  const double r1 = first.stats.ln_rho, r2 = second.stats.ln_rho;
  const double v1 = first.stats.ln_sigma2, v2 = second.stats.ln_sigma2;
  if (!std::isfinite(r1) || !std::isfinite(r2)) throw std::invalid_argument("bayes_factor: rho must be positive and finite");
  if (std::isnan(v1) || std::isnan(v2) || v1 == kPosInf || v2 == kPosInf) {
    throw std::invalid_argument("bayes_factor: variances must be finite");
  }
  BayesFactorResult out;
  out.ln_bf = r2 - r1;
  out.ln_bf_mean = r2 - r1 + std::log1p(std::exp(v1 - 2.0 * r1));
  out.ln_bf_var = log_add_exp(2.0 * r1 + v2, 2.0 * r2 + v1) - 4.0 * r1;
  out.ln_bf_std = std::sqrt(std::exp(v1 - 2.0 * r1) + std::exp(v2 - 2.0 * r2));
  return out;
}

nlohmann::json BayesFactorResult::to_json() const {
  return {{"ln_bf", finite_or_null(ln_bf)},
          {"ln_bf_mean", finite_or_null(ln_bf_mean)},
          {"ln_bf_var", finite_or_null(ln_bf_var)},
          {"bf_var", finite_or_null(bf_var())},
          {"ln_bf_std", finite_or_null(ln_bf_std)}};
}

}  // namespace harmonic
