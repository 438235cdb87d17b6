#include "harmonic/benchmarks.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "harmonic/numerics.hpp"

#ifndef HARMONIC_DATA_DIR
#define HARMONIC_DATA_DIR "data"
#endif

namespace harmonic {

namespace {

constexpr double kLn2Pi = 1.8378770664093454836;

LnDensityFn uniform_box_prior(const std::vector<std::pair<double, double>>& bounds) {
  double ln_volume = 0.0;
  for (const auto& [lo, hi] : bounds) ln_volume += std::log(hi - lo);
  return [bounds, ln_volume](const Eigen::Ref<const Eigen::VectorXd>& theta) {
    for (std::size_t k = 0; k < bounds.size(); ++k) {
      const double v = theta(static_cast<Eigen::Index>(k));
      if (!(v >= bounds[k].first && v <= bounds[k].second)) return kNegInf;
    }
    return -ln_volume;
  };
}

std::function<Eigen::MatrixXd(int, std::uint64_t)> uniform_start(int ndim, double width) {
  return [ndim, width](int nwalkers, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd pos(nwalkers, ndim);
    for (int w = 0; w < nwalkers; ++w)
      for (int k = 0; k < ndim; ++k) pos(w, k) = width * uniform01(rng);
    return pos;
  };
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(path.string() + ": empty file");
  table.header = split_csv_line(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != table.header.size()) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": expected " +
                                  std::to_string(table.header.size()) + " fields");
    }
    std::vector<double> row(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const auto& f = fields[k];
      auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), row[k]);
      if (f.empty() || ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(row[k])) {
        throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": non-numeric field '" + f + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::size_t column_index(const CsvTable& table, const std::string& name, const std::filesystem::path& path) {
  for (std::size_t k = 0; k < table.header.size(); ++k)
    if (table.header[k] == name) return k;
  throw std::invalid_argument(path.string() + ": missing column '" + name + "'");
}

}  // namespace

double BenchmarkProblem::ln_posterior(const Eigen::Ref<const Eigen::VectorXd>& theta) const {
  const double lp = ln_prior(theta);
  if (lp == kNegInf) return kNegInf;
  return lp + ln_likelihood(theta);
}

LnPosteriorFn BenchmarkProblem::posterior_fn() const {
  return [prior = ln_prior, like = ln_likelihood](const Eigen::Ref<const Eigen::VectorXd>& theta) {
    const double lp = prior(theta);
    if (lp == kNegInf) return kNegInf;
    return lp + like(theta);
  };
}

// Quadrature ---------------------------------------------------------------

namespace {

double quadrature_at(const LnDensityFn& ln_f, const std::vector<std::pair<double, double>>& box, int panels) {
  using Rule = boost::math::quadrature::gauss<double, 20>;
  const auto& abscissa = Rule::abscissa();
  const auto& weights = Rule::weights();
  const std::size_t d = box.size();

  // Nodes and ln weights per axis.
  std::vector<std::vector<double>> nodes(d), ln_w(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double h = (box[k].second - box[k].first) / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = box[k].first + (p + 0.5) * h;
      for (std::size_t a = 0; a < abscissa.size(); ++a) {
        const double x = abscissa[a];
        const double lw = std::log(weights[a] * 0.5 * h);
        nodes[k].push_back(mid + 0.5 * h * x);
        ln_w[k].push_back(lw);
        if (x != 0.0) {
          nodes[k].push_back(mid - 0.5 * h * x);
          ln_w[k].push_back(lw);
        }
      }
    }
  }

  const std::size_t per_axis = nodes[0].size();
  std::vector<std::size_t> index(d, 0);
  Eigen::VectorXd theta(static_cast<Eigen::Index>(d));
  LogSumExp acc;
  for (;;) {
    double lw = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      theta(static_cast<Eigen::Index>(k)) = nodes[k][index[k]];
      lw += ln_w[k][index[k]];
    }
    acc.add(lw + ln_f(theta));
    std::size_t k = 0;
    while (k < d && ++index[k] == per_axis) index[k++] = 0;
    if (k == d) break;
  }
  return acc.value();
}

}  // namespace

QuadratureResult quadrature_ln_z(const LnDensityFn& ln_f, const std::vector<std::pair<double, double>>& box,
                                 const QuadratureOptions& options) {
  if (box.empty()) throw std::invalid_argument("quadrature_ln_z: empty box");
  for (const auto& [lo, hi] : box) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
      throw std::invalid_argument("quadrature_ln_z: box must be bounded");
    }
  }
  if (options.panels < 1 || options.max_panels < options.panels) {
    throw std::invalid_argument("quadrature_ln_z: invalid panel counts");
  }
  QuadratureResult result;
  result.panels = options.panels;
  result.ln_z = quadrature_at(ln_f, box, result.panels);
  while (result.panels * 2 <= options.max_panels) {
    const double next = quadrature_at(ln_f, box, result.panels * 2);
    result.last_change = std::abs(next - result.ln_z);
    if (result.ln_z == kNegInf && next == kNegInf) result.last_change = 0.0;
    result.ln_z = next;
    result.panels *= 2;
    if (result.last_change < options.tolerance) return result;
  }
  throw std::runtime_error("quadrature_ln_z: refinement did not converge");
}

QuadratureResult quadrature_ln_z(const BenchmarkProblem& problem, const QuadratureOptions& options) {
  return quadrature_ln_z([&](const Eigen::Ref<const Eigen::VectorXd>& t) { return problem.ln_posterior(t); },
                         problem.bounds, options);
}

// Analytic test functions ----------------------------------------------------

BenchmarkProblem rosenbrock_problem(int ndim) {
  if (ndim < 2) throw std::invalid_argument("rosenbrock_problem: ndim must be at least 2");
  BenchmarkProblem p;
  p.name = "rosenbrock";
  p.ndim = ndim;
  p.bounds.assign(static_cast<std::size_t>(ndim), {-5.0, 15.0});
  p.bounds[0] = {-10.0, 10.0};
  p.ln_prior = uniform_box_prior(p.bounds);
  p.ln_likelihood = [](const Eigen::Ref<const Eigen::VectorXd>& x) {
    double f = 0.0;
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) {
      const double a = x(i + 1) - x(i) * x(i);
      f += 100.0 * a * a + (x(i) - 1.0) * (x(i) - 1.0);
    }
    return -f;
  };
  p.initial_positions = uniform_start(ndim, 0.1);
  return p;
}

BenchmarkProblem rastrigin_problem(int ndim) {
  if (ndim < 1) throw std::invalid_argument("rastrigin_problem: ndim must be positive");
  BenchmarkProblem p;
  p.name = "rastrigin";
  p.ndim = ndim;
  p.bounds.assign(static_cast<std::size_t>(ndim), {-6.0, 6.0});
  p.ln_prior = uniform_box_prior(p.bounds);
  p.ln_likelihood = [](const Eigen::Ref<const Eigen::VectorXd>& x) {
    double f = 10.0 * static_cast<double>(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) f += x(i) * x(i) - 10.0 * std::cos(2.0 * std::numbers::pi * x(i));
    return -f;
  };
  p.initial_positions = uniform_start(ndim, 0.5);
  return p;
}

double gaussian_nd_analytic_ln_z(int ndim, double half_width) {
  if (ndim < 1 || !(half_width > 0.0)) throw std::invalid_argument("gaussian_nd: need d >= 1 and a > 0");
  return -ndim * std::log(2.0 * half_width) + ndim * ln_normal_central_mass(half_width);
}

BenchmarkProblem gaussian_nd_problem(int ndim, double half_width) {
  BenchmarkProblem p;
  p.name = "gaussian";
  p.ndim = ndim;
  p.ground_truth = GroundTruth{"analytic", gaussian_nd_analytic_ln_z(ndim, half_width)};
  p.bounds.assign(static_cast<std::size_t>(ndim), {-half_width, half_width});
  p.ln_prior = uniform_box_prior(p.bounds);
  p.ln_likelihood = [ndim](const Eigen::Ref<const Eigen::VectorXd>& x) {
    return -0.5 * x.squaredNorm() - 0.5 * ndim * kLn2Pi;
  };
  // Exact posterior draws (rejecting the negligible mass outside the box).
  p.initial_positions = [ndim, half_width](int nwalkers, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd pos(nwalkers, ndim);
    for (int w = 0; w < nwalkers; ++w) {
      for (int k = 0; k < ndim; ++k) {
        double v;
        do v = standard_normal(rng);
        while (std::abs(v) >= half_width);
        pos(w, k) = v;
      }
    }
    return pos;
  };
  return p;
}

// Normal-Gamma -------------------------------------------------------------

double NormalGammaSpec::ybar() const { return y.size() == 0 ? 0.0 : y.mean(); }

double NormalGammaSpec::s2() const {
  if (y.size() == 0) return 0.0;
  return (y.array() - ybar()).square().mean();
}

NormalGammaSpec make_normal_gamma_spec(int n, double tau0, std::uint64_t seed) {
  if (n < 0) throw std::invalid_argument("make_normal_gamma_spec: n must be non-negative");
  if (!(tau0 > 0.0)) throw std::invalid_argument("make_normal_gamma_spec: tau0 must be positive");
  NormalGammaSpec spec;
  spec.tau0 = tau0;
  spec.y.resize(n);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) spec.y(i) = standard_normal(rng);
  return spec;
}

double normal_gamma_ln_prior(const NormalGammaSpec& s, double mu, double tau) {
  if (!(tau > 0.0)) return kNegInf;
  const double u = mu - s.mu0;
  return s.a0 * std::log(s.b0) + 0.5 * std::log(s.tau0) - std::lgamma(s.a0) - 0.5 * kLn2Pi +
         (s.a0 - 0.5) * std::log(tau) - s.b0 * tau - 0.5 * s.tau0 * tau * u * u;
}

double normal_gamma_ln_likelihood(const NormalGammaSpec& s, double mu, double tau) {
  if (!(tau > 0.0)) return kNegInf;
  const double n = s.n();
  if (n == 0) return 0.0;
  const double u = s.ybar() - mu;
  return 0.5 * n * (std::log(tau) - kLn2Pi) - 0.5 * tau * n * (s.s2() + u * u);
}

double normal_gamma_analytic_ln_z(const NormalGammaSpec& s) {
  const double n = s.n();
  const double tau_n = s.tau0 + n;
  const double a_n = s.a0 + 0.5 * n;
  const double u = s.ybar() - s.mu0;
  const double b_n = s.b0 + 0.5 * n * s.s2() + s.tau0 * n * u * u / (2.0 * (s.tau0 + n));
  return -0.5 * n * kLn2Pi + std::lgamma(a_n) - std::lgamma(s.a0) + s.a0 * std::log(s.b0) - a_n * std::log(b_n) +
         0.5 * (std::log(s.tau0) - std::log(tau_n));
}

BenchmarkProblem normal_gamma_problem(const NormalGammaSpec& spec) {
  BenchmarkProblem p;
  p.name = "normal_gamma";
  p.ndim = 2;
  p.ground_truth = GroundTruth{"analytic", normal_gamma_analytic_ln_z(spec)};
  p.bounds = {{-kPosInf, kPosInf}, {0.0, kPosInf}};
  p.ln_prior = [spec](const Eigen::Ref<const Eigen::VectorXd>& t) { return normal_gamma_ln_prior(spec, t(0), t(1)); };
  p.ln_likelihood = [spec](const Eigen::Ref<const Eigen::VectorXd>& t) {
    return normal_gamma_ln_likelihood(spec, t(0), t(1));
  };
  // Around the data mean and precision with the posterior's rough spread.
  p.initial_positions = [spec](int nwalkers, std::uint64_t seed) {
    Rng rng(seed);
    const double n = std::max(spec.n(), 1);
    const double sd = spec.n() > 1 ? std::sqrt(spec.s2()) : 1.0;
    Eigen::MatrixXd pos(nwalkers, 2);
    for (int w = 0; w < nwalkers; ++w) {
      pos(w, 0) = spec.ybar() + sd * standard_normal(rng) / std::sqrt(n);
      do pos(w, 1) = 1.0 / (sd * sd) + sd * standard_normal(rng) / std::sqrt(n);
      while (!(pos(w, 1) > 0.0));
    }
    return pos;
  };
  return p;
}

// Pima Indians -------------------------------------------------------------

PimaData load_pima(const std::filesystem::path& path, bool standardise) {
  const CsvTable table = read_csv(path);
  if (static_cast<int>(table.rows.size()) != PimaData::kRows) {
    throw std::invalid_argument(path.string() + ": expected " + std::to_string(PimaData::kRows) + " rows, found " +
                                std::to_string(table.rows.size()));
  }
  PimaData data;
  const int n = PimaData::kRows;
  data.covariates.resize(n, static_cast<Eigen::Index>(PimaData::kColumns.size()));
  data.outcome.resize(n);
  for (std::size_t c = 0; c < PimaData::kColumns.size(); ++c) {
    const std::size_t col = column_index(table, PimaData::kColumns[c], path);
    for (int i = 0; i < n; ++i) data.covariates(i, static_cast<Eigen::Index>(c)) = table.rows[static_cast<std::size_t>(i)][col];
  }
  const std::size_t out_col = column_index(table, "outcome", path);
  for (int i = 0; i < n; ++i) {
    const double v = table.rows[static_cast<std::size_t>(i)][out_col];
    if (v != 0.0 && v != 1.0) throw std::invalid_argument(path.string() + ": outcome must be 0 or 1");
    data.outcome(i) = v;
  }
  if (standardise) {
    for (Eigen::Index c = 0; c < data.covariates.cols(); ++c) {
      auto col = data.covariates.col(c);
      const double mean = col.mean();
      const double sd = std::sqrt((col.array() - mean).square().sum() / (n - 1));
      if (!(sd > 0.0)) throw std::invalid_argument(path.string() + ": constant covariate column");
      col = (col.array() - mean) / sd;
    }
    data.standardised = true;
  }
  return data;
}

PimaSpec make_pima_spec(const PimaData& data, int model, double tau) {
  if (model != 1 && model != 2) throw std::invalid_argument("pima model must be 1 or 2");
  if (!(tau > 0.0)) throw std::invalid_argument("pima tau must be positive");
  // Column positions in PimaData::kColumns.
  std::vector<Eigen::Index> cols = {0, 1, 4, 5};  // NP, PGC, BMI, DP
  if (model == 2) cols.push_back(6);               // AGE
  PimaSpec spec;
  spec.model = model;
  spec.tau = tau;
  spec.outcome = data.outcome;
  spec.design.resize(data.covariates.rows(), static_cast<Eigen::Index>(cols.size() + 1));
  spec.design.col(0).setOnes();
  for (std::size_t k = 0; k < cols.size(); ++k) spec.design.col(static_cast<Eigen::Index>(k + 1)) = data.covariates.col(cols[k]);
  return spec;
}

std::pair<double, double> log_logistic(double eta) {
  // ln sigma(eta) = -softplus(-eta), ln(1 - sigma(eta)) = -softplus(eta)
  auto softplus = [](double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); };
  return {-softplus(-eta), -softplus(eta)};
}

double pima_ln_likelihood(const PimaSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& theta) {
  if (theta.size() != spec.ndim()) throw std::invalid_argument("pima: theta has the wrong dimension");
  const Eigen::VectorXd eta = spec.design * theta;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const auto [ln_p, ln_q] = log_logistic(eta(i));
    acc += spec.outcome(i) != 0.0 ? ln_p : ln_q;
  }
  return acc;
}

double pima_ln_prior(const PimaSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& theta) {
  if (theta.size() != spec.ndim()) throw std::invalid_argument("pima: theta has the wrong dimension");
  return 0.5 * spec.ndim() * std::log(spec.tau / (2.0 * std::numbers::pi)) - 0.5 * spec.tau * theta.squaredNorm();
}

BenchmarkProblem pima_problem(const PimaSpec& spec) {
  BenchmarkProblem p;
  p.name = "pima";
  p.ndim = spec.ndim();
  p.bounds.assign(static_cast<std::size_t>(p.ndim), {-kPosInf, kPosInf});
  p.ln_prior = [spec](const Eigen::Ref<const Eigen::VectorXd>& t) { return pima_ln_prior(spec, t); };
  p.ln_likelihood = [spec](const Eigen::Ref<const Eigen::VectorXd>& t) { return pima_ln_likelihood(spec, t); };
  p.initial_positions = [d = p.ndim](int nwalkers, std::uint64_t seed) {
    return gaussian_ball(Eigen::VectorXd::Zero(d), Eigen::VectorXd::Constant(d, 0.01), nwalkers, seed);
  };
  return p;
}

// Radiata pine -------------------------------------------------------------

RadiataData load_radiata(const std::filesystem::path& path) {
  const CsvTable table = read_csv(path);
  if (static_cast<int>(table.rows.size()) != RadiataData::kRows) {
    throw std::invalid_argument(path.string() + ": expected " + std::to_string(RadiataData::kRows) + " rows, found " +
                                std::to_string(table.rows.size()));
  }
  const std::size_t cy = column_index(table, "y", path);
  const std::size_t cx = column_index(table, "x", path);
  const std::size_t cz = column_index(table, "z", path);
  RadiataData data;
  data.y.resize(RadiataData::kRows);
  data.x.resize(RadiataData::kRows);
  data.z.resize(RadiataData::kRows);
  for (int i = 0; i < RadiataData::kRows; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    data.y(i) = row[cy];
    data.x(i) = row[cx];
    data.z(i) = row[cz];
    if (!(row[cx] > 0.0) || !(row[cz] > 0.0) || !(row[cy] > 0.0)) {
      throw std::invalid_argument(path.string() + ": radiata measurements must be positive");
    }
  }
  return data;
}

RadiataSpec make_radiata_spec(const RadiataData& data, int model) {
  if (model != 1 && model != 2) throw std::invalid_argument("radiata model must be 1 or 2");
  RadiataSpec spec;
  spec.model = model;
  spec.y = data.y;
  const Eigen::VectorXd& c = model == 1 ? data.x : data.z;
  spec.covariate = c.array() - c.mean();
  return spec;
}

double radiata_ln_prior(const RadiataSpec& s, const Eigen::Ref<const Eigen::VectorXd>& theta) {
  const double tau = theta(2);
  if (!(tau > 0.0)) return kNegInf;
  const double da = theta(0) - s.mu_alpha, db = theta(1) - s.mu_beta;
  // Gamma(tau; a0, b0) x N(alpha; mu_a, 1/(r0 tau)) x N(beta; mu_b, 1/(s0 tau))
  return s.a0 * std::log(s.b0) + 0.5 * std::log(s.r0 * s.s0) - kLn2Pi - std::lgamma(s.a0) + s.a0 * std::log(tau) -
         s.b0 * tau - 0.5 * tau * (s.r0 * da * da + s.s0 * db * db);
}

double radiata_ln_likelihood(const RadiataSpec& s, const Eigen::Ref<const Eigen::VectorXd>& theta) {
  const double tau = theta(2);
  if (!(tau > 0.0)) return kNegInf;
  double ssr = 0.0;
  for (Eigen::Index i = 0; i < s.y.size(); ++i) {
    const double r = s.y(i) - theta(0) - theta(1) * s.covariate(i);
    ssr += r * r;
  }
  return 0.5 * s.n() * (std::log(tau) - kLn2Pi) - 0.5 * tau * ssr;
}

double radiata_analytic_ln_z(const RadiataSpec& s) {
  const int n = s.n();
  Eigen::MatrixXd X(n, 2);
  X.col(0).setOnes();
  X.col(1) = s.covariate;
  Eigen::Matrix2d Q0 = Eigen::Vector2d(s.r0, s.s0).asDiagonal();
  const Eigen::Vector2d mu0(s.mu_alpha, s.mu_beta);
  const Eigen::Matrix2d M = X.transpose() * X + Q0;
  Eigen::LLT<Eigen::Matrix2d> llt(M);
  if (llt.info() != Eigen::Success) throw std::runtime_error("radiata_analytic_ln_z: singular M");
  const Eigen::Vector2d nu0 = llt.solve(X.transpose() * s.y + Q0 * mu0);
  const double ln_det_q0 = std::log(s.r0) + std::log(s.s0);
  const double ln_det_m = 2.0 * Eigen::Matrix2d(llt.matrixL()).diagonal().array().log().sum();
  const double quad = s.y.squaredNorm() + mu0.dot(Q0 * mu0) - nu0.dot(M * nu0) + 2.0 * s.b0;
  const double half_n = 0.5 * n;
  return s.a0 * std::log(2.0 * s.b0) - half_n * std::log(std::numbers::pi) + std::lgamma(s.a0 + half_n) -
         std::lgamma(s.a0) + 0.5 * (ln_det_q0 - ln_det_m) - (s.a0 + half_n) * std::log(quad);
}

BenchmarkProblem radiata_problem(const RadiataSpec& spec) {
  BenchmarkProblem p;
  p.name = "radiata";
  p.ndim = 3;
  p.ground_truth = GroundTruth{"analytic", radiata_analytic_ln_z(spec)};
  p.bounds = {{-kPosInf, kPosInf}, {-kPosInf, kPosInf}, {0.0, kPosInf}};
  p.ln_prior = [spec](const Eigen::Ref<const Eigen::VectorXd>& t) { return radiata_ln_prior(spec, t); };
  p.ln_likelihood = [spec](const Eigen::Ref<const Eigen::VectorXd>& t) { return radiata_ln_likelihood(spec, t); };
  // Intercept and slope from their priors at the prior-mean precision; the
  // precision uniformly within half a prior standard deviation of its mean.
  p.initial_positions = [spec](int nwalkers, std::uint64_t seed) {
    Rng rng(seed);
    const double tau_mean = spec.a0 / spec.b0;
    const double tau_sd = std::sqrt(spec.a0) / spec.b0;
    Eigen::MatrixXd pos(nwalkers, 3);
    for (int w = 0; w < nwalkers; ++w) {
      pos(w, 0) = spec.mu_alpha + standard_normal(rng) / std::sqrt(tau_mean * spec.r0);
      pos(w, 1) = spec.mu_beta + standard_normal(rng) / std::sqrt(tau_mean * spec.s0);
      pos(w, 2) = tau_mean + tau_sd * (uniform01(rng) - 0.5);
    }
    return pos;
  };
  return p;
}

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("HARMONIC_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return HARMONIC_DATA_DIR;
}

}  // namespace harmonic
