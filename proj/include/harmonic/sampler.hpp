#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Dense>

#include "harmonic/chains.hpp"

namespace harmonic {

/// ln[L(theta) pi(theta)]; may return -inf outside the support. Must be
/// deterministic and safe to call concurrently.
using LnPosteriorFn = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

struct SamplerConfig {
  int nwalkers = 200;
  int nsamples = 1000;  // recorded per walker after burn-in
  int nburn = 0;
  double stretch_scale = 2.0;
  std::uint64_t seed = 0;
};

struct MoveLog {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
  std::uint64_t burn_proposed = 0;
  std::uint64_t burn_accepted = 0;
};

struct SamplerRun {
  ChainStore chains;  // one chain per walker
  MoveLog moves;
  double burn_seconds = 0.0;
  double sample_seconds = 0.0;
};

/// Affine-invariant ensemble sampler using the stretch move. Walkers are
/// split into two halves updated in turn, each proposing against partners
/// from the other half. Walker k draws from its own stream
/// mt19937_64(derive_seed(seed, k)), so the output depends only on the seed.
SamplerRun run_sampler(const LnPosteriorFn& ln_posterior, const SamplerConfig& config,
                       const Eigen::MatrixXd& initial);

/// Accepted / proposed over post-burn-in moves. Throws if nothing was logged.
double acceptance_rate(const MoveLog& log);

/// Inverse CDF of g(z) ~ 1/sqrt(z) on [1/a, a].
double stretch_from_uniform(double u, double a);

/// ln of the stretch-move acceptance probability, min(0, (d-1) ln z + dlnP).
double stretch_ln_acceptance(double z, int ndim, double ln_post_proposed, double ln_post_current);

/// nwalkers positions drawn from N(center, diag(scale^2)).
Eigen::MatrixXd gaussian_ball(const Eigen::VectorXd& center, const Eigen::VectorXd& scale,
                              int nwalkers, std::uint64_t seed);

}  // namespace harmonic
