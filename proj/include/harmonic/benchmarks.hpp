#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "harmonic/sampler.hpp"

namespace harmonic {

using LnDensityFn = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

struct GroundTruth {
  std::string kind;  // "analytic" or "quadrature"
  double ln_z = 0.0;
};

/// A posterior L(theta) pi(theta) with its support, a default way to place
/// sampler walkers and, when known, the true ln z.
struct BenchmarkProblem {
  std::string name;
  int ndim = 0;
  LnDensityFn ln_likelihood;
  LnDensityFn ln_prior;  // -inf outside the support
  std::vector<std::pair<double, double>> bounds;  // per-dimension support, possibly infinite
  std::optional<GroundTruth> ground_truth;
  std::function<Eigen::MatrixXd(int nwalkers, std::uint64_t seed)> initial_positions;

  double ln_posterior(const Eigen::Ref<const Eigen::VectorXd>& theta) const;
  LnPosteriorFn posterior_fn() const;
};

// Quadrature ---------------------------------------------------------------

struct QuadratureOptions {
  int panels = 8;          // initial panels per axis, doubled on each refinement
  int max_panels = 1024;
  double tolerance = 1e-4;  // stop once successive ln z differ by less than this
};

struct QuadratureResult {
  double ln_z = 0.0;
  int panels = 0;
  double last_change = 0.0;
};

/// ln of the integral of exp(ln_f) over a box by composite 20-point
/// Gauss-Legendre on every axis, accumulated in log space. Throws
/// std::runtime_error when refinement stops short of the tolerance.
QuadratureResult quadrature_ln_z(const LnDensityFn& ln_f, const std::vector<std::pair<double, double>>& box,
                                 const QuadratureOptions& options = {});

/// Same over a problem's support (which must be bounded).
QuadratureResult quadrature_ln_z(const BenchmarkProblem& problem, const QuadratureOptions& options = {});

// Analytic test functions ----------------------------------------------------

/// ln L = -sum_i [100 (x_{i+1} - x_i^2)^2 + (x_i - 1)^2]; uniform prior with
/// x_0 in [-10, 10] and the remaining coordinates in [-5, 15].
BenchmarkProblem rosenbrock_problem(int ndim = 2);

/// ln L = -[10 d + sum_i (x_i^2 - 10 cos 2 pi x_i)]; uniform prior on [-6, 6]^d.
BenchmarkProblem rastrigin_problem(int ndim = 2);

/// Unit-covariance Gaussian likelihood (normalised) with a uniform prior on
/// [-a, a]^d. ln z = -d ln(2a) + d ln[Phi(a) - Phi(-a)].
BenchmarkProblem gaussian_nd_problem(int ndim, double half_width = 6.0);
double gaussian_nd_analytic_ln_z(int ndim, double half_width);

// Normal-Gamma -------------------------------------------------------------

struct NormalGammaSpec {
  Eigen::VectorXd y;
  double mu0 = 0.0;
  double tau0 = 1.0;
  double a0 = 1e-3;
  double b0 = 1e-3;

  int n() const { return static_cast<int>(y.size()); }
  double ybar() const;
  double s2() const;  // (1/n) sum (y - ybar)^2
};

/// n draws from N(0, 1) seeded by `seed`.
NormalGammaSpec make_normal_gamma_spec(int n, double tau0, std::uint64_t seed);

/// Joint prior N(mu; mu0, 1/(tau0 tau)) Ga(tau; a0, b0) times the Gaussian likelihood.
double normal_gamma_ln_prior(const NormalGammaSpec& spec, double mu, double tau);
double normal_gamma_ln_likelihood(const NormalGammaSpec& spec, double mu, double tau);
double normal_gamma_analytic_ln_z(const NormalGammaSpec& spec);
BenchmarkProblem normal_gamma_problem(const NormalGammaSpec& spec);

// Pima Indians logistic regression -------------------------------------------

struct PimaData {
  static constexpr int kRows = 532;
  static inline const std::vector<std::string> kColumns = {"NP", "PGC", "BP", "TST", "BMI", "DP", "AGE"};
  Eigen::MatrixXd covariates;  // n x 7 in kColumns order
  Eigen::VectorXd outcome;     // 0 / 1
  bool standardised = false;
};

/// Reads NP,PGC,BP,TST,BMI,DP,AGE,outcome. With `standardise`, every
/// covariate is shifted and scaled to zero mean and unit sample variance.
PimaData load_pima(const std::filesystem::path& path, bool standardise = true);

struct PimaSpec {
  int model = 1;  // 1: bias, NP, PGC, BMI, DP; 2: model 1 plus AGE
  double tau = 0.01;
  Eigen::MatrixXd design;  // n x d, first column all ones
  Eigen::VectorXd outcome;

  int ndim() const { return static_cast<int>(design.cols()); }
};

PimaSpec make_pima_spec(const PimaData& data, int model, double tau);

/// ln sigma(eta) and ln(1 - sigma(eta)) without forming sigma(eta).
std::pair<double, double> log_logistic(double eta);

double pima_ln_likelihood(const PimaSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& theta);
/// (d/2) ln(tau / 2 pi) - (tau/2) theta^T theta
double pima_ln_prior(const PimaSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& theta);
BenchmarkProblem pima_problem(const PimaSpec& spec);

// Radiata pine linear regression --------------------------------------------

struct RadiataData {
  static constexpr int kRows = 42;
  Eigen::VectorXd y;  // strength
  Eigen::VectorXd x;  // density
  Eigen::VectorXd z;  // resin-adjusted density
};

RadiataData load_radiata(const std::filesystem::path& path);

struct RadiataSpec {
  int model = 1;  // 1: density, 2: resin-adjusted density
  Eigen::VectorXd y;
  Eigen::VectorXd covariate;  // centred
  double mu_alpha = 3000.0;
  double mu_beta = 185.0;
  double r0 = 0.06;
  double s0 = 6.0;
  double a0 = 3.0;
  double b0 = 2.0 * 300.0 * 300.0;

  int n() const { return static_cast<int>(y.size()); }
};

RadiataSpec make_radiata_spec(const RadiataData& data, int model);

/// theta = (intercept, slope, noise precision).
double radiata_ln_prior(const RadiataSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& theta);
double radiata_ln_likelihood(const RadiataSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& theta);
double radiata_analytic_ln_z(const RadiataSpec& spec);
BenchmarkProblem radiata_problem(const RadiataSpec& spec);

/// Directory holding the vendored datasets.
std::filesystem::path default_data_dir();

}  // namespace harmonic
