#include "harmonic/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "harmonic/numerics.hpp"

namespace harmonic {

double stretch_from_uniform(double u, double a) {
  const double t = (a - 1.0) * u + 1.0;
  return t * t / a;
}

double stretch_ln_acceptance(double z, int ndim, double ln_post_proposed,
                             double ln_post_current) {
  if (ln_post_proposed == kNegInf) return kNegInf;
  const double ln_q = (ndim - 1) * std::log(z) + (ln_post_proposed - ln_post_current);
  return std::min(0.0, ln_q);
}

double acceptance_rate(const MoveLog& log) {
  if (log.proposed == 0) throw std::invalid_argument("acceptance_rate: no logged moves");
  return static_cast<double>(log.accepted) / static_cast<double>(log.proposed);
}

Eigen::MatrixXd gaussian_ball(const Eigen::VectorXd& center, const Eigen::VectorXd& scale,
                              int nwalkers, std::uint64_t seed) {
  if (center.size() != scale.size()) {
    throw std::invalid_argument("gaussian_ball: center and scale sizes differ");
  }
  Rng rng(seed);
  Eigen::MatrixXd out(nwalkers, center.size());
  for (int k = 0; k < nwalkers; ++k) {
    for (Eigen::Index i = 0; i < center.size(); ++i) {
      out(k, i) = center(i) + scale(i) * standard_normal(rng);
    }
  }
  return out;
}

SamplerRun run_sampler(const LnPosteriorFn& ln_posterior, const SamplerConfig& config,
                       const Eigen::MatrixXd& initial) {
  const int nwalkers = config.nwalkers;
  const int ndim = static_cast<int>(initial.cols());
  if (ndim < 1) throw std::invalid_argument("run_sampler: zero-dimensional initial positions");
  if (initial.rows() != nwalkers) {
    throw std::invalid_argument("run_sampler: initial positions must have nwalkers rows");
  }
  if (nwalkers < 2 * ndim) {
    throw std::invalid_argument("run_sampler: need nwalkers >= 2 * ndim (" +
                                std::to_string(nwalkers) + " < " + std::to_string(2 * ndim) + ")");
  }
  if (!(config.stretch_scale > 1.0)) throw std::invalid_argument("run_sampler: stretch scale must exceed 1");
  if (config.nsamples < 1 || config.nburn < 0) {
    throw std::invalid_argument("run_sampler: nsamples must be positive and nburn non-negative");
  }

  Eigen::MatrixXd position = initial;
  Eigen::VectorXd ln_post(nwalkers);
  int nvalid = 0;
  for (int k = 0; k < nwalkers; ++k) {
    ln_post(k) = ln_posterior(position.row(k).transpose());
    if (std::isfinite(ln_post(k))) ++nvalid;
  }
  if (nvalid == 0) throw std::invalid_argument("run_sampler: all initial positions are invalid");
  if (nvalid < nwalkers) {
    throw std::invalid_argument("run_sampler: " + std::to_string(nwalkers - nvalid) +
                                " initial positions have non-finite ln posterior");
  }

  std::vector<Rng> streams;
  streams.reserve(static_cast<std::size_t>(nwalkers));
  for (int k = 0; k < nwalkers; ++k) streams.emplace_back(derive_seed(config.seed, static_cast<std::uint64_t>(k)));

  std::vector<Eigen::MatrixXd> recorded(static_cast<std::size_t>(nwalkers),
                                        Eigen::MatrixXd(config.nsamples, ndim));
  Eigen::MatrixXd recorded_lnp(nwalkers, config.nsamples);

  const int half = nwalkers / 2;
  const double a = config.stretch_scale;
  MoveLog log;
  Eigen::VectorXd proposal(ndim);
  double burn_seconds = 0.0;
  auto clock = std::chrono::steady_clock::now();

  const int total = config.nburn + config.nsamples;
  for (int step = 0; step < total; ++step) {
    const bool burning = step < config.nburn;
    if (step == config.nburn) {
      const auto now = std::chrono::steady_clock::now();
      burn_seconds = std::chrono::duration<double>(now - clock).count();
      clock = now;
    }
    for (int part = 0; part < 2; ++part) {
      const int begin = part == 0 ? 0 : half;
      const int end = part == 0 ? half : nwalkers;
      const int other_begin = part == 0 ? half : 0;
      const int other_size = part == 0 ? nwalkers - half : half;
      for (int k = begin; k < end; ++k) {
        Rng& rng = streams[static_cast<std::size_t>(k)];
        const auto partner = other_begin + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(other_size)));
        const double z = stretch_from_uniform(uniform01(rng), a);
        proposal = position.row(partner).transpose() +
                   z * (position.row(k) - position.row(partner)).transpose();
        const double lnp_new = ln_posterior(proposal);
        const double ln_accept = stretch_ln_acceptance(z, ndim, lnp_new, ln_post(k));
        const double u = uniform01(rng);
        const bool accept = std::isfinite(lnp_new) && std::log(u) < ln_accept;
        if (burning) {
          ++log.burn_proposed;
          if (accept) ++log.burn_accepted;
        } else {
          ++log.proposed;
          if (accept) ++log.accepted;
        }
        if (accept) {
          position.row(k) = proposal.transpose();
          ln_post(k) = lnp_new;
        }
      }
    }
    if (!burning) {
      const int i = step - config.nburn;
      for (int k = 0; k < nwalkers; ++k) {
        recorded[static_cast<std::size_t>(k)].row(i) = position.row(k);
        recorded_lnp(k, i) = ln_post(k);
      }
    }
  }
  if (config.nburn == total) burn_seconds = 0.0;
  const double sample_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - clock).count();

  ChainStore store(ndim);
  for (int k = 0; k < nwalkers; ++k) {
    store.add_chain(std::move(recorded[static_cast<std::size_t>(k)]), recorded_lnp.row(k).transpose());
  }
  return SamplerRun{std::move(store), log, burn_seconds, sample_seconds};
}

}  // namespace harmonic
