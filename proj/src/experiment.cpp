#include "harmonic/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

namespace harmonic {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Reads `key` from `j` when present, otherwise `fallback`; type mismatches
// and unknown keys are configuration errors.
template <class T>
T field(const nlohmann::json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw ConfigError("unknown key '" + where + "." + item.key() + "'");
  }
}

const nlohmann::json& object_or_empty(const nlohmann::json& j, const char* key) {
  static const nlohmann::json empty = nlohmann::json::object();
  return j.contains(key) && !j[key].is_null() ? j[key] : empty;
}

nlohmann::json normalise_benchmark(const nlohmann::json& b) {
  if (!b.is_object() || !b.contains("name")) throw ConfigError("benchmark.name is required");
  const std::string name = field<std::string>(b, "name", "", "benchmark");
  const std::string where = "benchmark";
  nlohmann::json out{{"name", name}};
  if (name == "rosenbrock" || name == "rastrigin") {
    reject_unknown(b, {"name", "ndim"}, where);
    out["ndim"] = field<int>(b, "ndim", 2, where);
    if (out["ndim"].get<int>() < (name == "rosenbrock" ? 2 : 1)) throw ConfigError("benchmark.ndim is too small");
  } else if (name == "gaussian") {
    reject_unknown(b, {"name", "ndim", "half_width"}, where);
    out["ndim"] = field<int>(b, "ndim", 32, where);
    out["half_width"] = field<double>(b, "half_width", 6.0, where);
    if (out["ndim"].get<int>() < 1 || !(out["half_width"].get<double>() > 0.0)) {
      throw ConfigError("gaussian benchmark needs ndim >= 1 and half_width > 0");
    }
  } else if (name == "normal_gamma") {
    reject_unknown(b, {"name", "n", "tau0", "mu0", "a0", "b0", "data_seed"}, where);
    out["n"] = field<int>(b, "n", 100, where);
    out["tau0"] = field<double>(b, "tau0", 1.0, where);
    out["mu0"] = field<double>(b, "mu0", 0.0, where);
    out["a0"] = field<double>(b, "a0", 1e-3, where);
    out["b0"] = field<double>(b, "b0", 1e-3, where);
    out["data_seed"] = field<std::uint64_t>(b, "data_seed", 0, where);
    if (out["n"].get<int>() < 0 || !(out["tau0"].get<double>() > 0.0) || !(out["a0"].get<double>() > 0.0) ||
        !(out["b0"].get<double>() > 0.0)) {
      throw ConfigError("normal_gamma benchmark needs n >= 0 and positive tau0, a0, b0");
    }
  } else if (name == "pima") {
    reject_unknown(b, {"name", "model", "tau", "standardise", "data"}, where);
    out["model"] = field<int>(b, "model", 1, where);
    out["tau"] = field<double>(b, "tau", 0.01, where);
    out["standardise"] = field<bool>(b, "standardise", true, where);
    out["data"] = field<std::string>(b, "data", "", where);
    if (out["model"] != 1 && out["model"] != 2) throw ConfigError("pima model must be 1 or 2");
    if (!(out["tau"].get<double>() > 0.0)) throw ConfigError("pima tau must be positive");
  } else if (name == "radiata") {
    reject_unknown(b, {"name", "model", "data"}, where);
    out["model"] = field<int>(b, "model", 1, where);
    out["data"] = field<std::string>(b, "data", "", where);
    if (out["model"] != 1 && out["model"] != 2) throw ConfigError("radiata model must be 1 or 2");
  } else {
    throw ConfigError("unknown benchmark '" + name + "'");
  }
  return out;
}

std::filesystem::path data_file(const nlohmann::json& b, const char* fallback) {
  const std::string given = b.at("data").get<std::string>();
  return given.empty() ? default_data_dir() / fallback : std::filesystem::path(given);
}

ModelSpec with_fit_seed(ModelSpec spec, std::uint64_t seed) {
  if (auto* m = std::get_if<MgmmSpec>(&spec)) m->options.sgd.seed = derive_seed(seed, m->options.sgd.seed);
  return spec;
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? std::nan("") : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return std::nan("");
  const double m = mean_of(v);
  double acc = 0.0;
  for (const double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

// Configuration ------------------------------------------------------------

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json models = nlohmann::json::array();
  for (const auto& c : candidates) models.push_back(spec_to_json(c));
  return {{"name", name},
          {"benchmark", benchmark},
          {"sampler",
           {{"nwalkers", sampler.nwalkers},
            {"nsamples", sampler.nsamples},
            {"nburn", sampler.nburn},
            {"stretch_scale", sampler.stretch_scale}}},
          {"split", {{"training_proportion", training_proportion}}},
          {"models", models},
          {"cross_validation", {{"nfolds", cv_folds}}},
          {"repetitions", repetitions},
          {"seed", seed},
          {"quadrature",
           {{"panels", quadrature.panels}, {"max_panels", quadrature.max_panels}, {"tolerance", quadrature.tolerance}}},
          {"output", output}};
}

ExperimentConfig parse_config(const nlohmann::json& j) {
  reject_unknown(j, {"name", "benchmark", "sampler", "split", "models", "model", "cross_validation", "repetitions",
                     "seed", "quadrature", "output"},
                 "config");
  ExperimentConfig c;
  c.name = field<std::string>(j, "name", "", "config");
  if (!j.contains("benchmark")) throw ConfigError("config.benchmark is required");
  c.benchmark = normalise_benchmark(j["benchmark"]);

  const auto& s = object_or_empty(j, "sampler");
  reject_unknown(s, {"nwalkers", "nsamples", "nburn", "stretch_scale"}, "sampler");
  c.sampler.nwalkers = field<int>(s, "nwalkers", c.sampler.nwalkers, "sampler");
  c.sampler.nsamples = field<int>(s, "nsamples", c.sampler.nsamples, "sampler");
  c.sampler.nburn = field<int>(s, "nburn", c.sampler.nburn, "sampler");
  c.sampler.stretch_scale = field<double>(s, "stretch_scale", c.sampler.stretch_scale, "sampler");
  if (c.sampler.nwalkers < 4 || c.sampler.nsamples < 1 || c.sampler.nburn < 0 || !(c.sampler.stretch_scale > 1.0)) {
    throw ConfigError("sampler needs nwalkers >= 4, nsamples >= 1, nburn >= 0, stretch_scale > 1");
  }

  const auto& sp = object_or_empty(j, "split");
  reject_unknown(sp, {"training_proportion"}, "split");
  c.training_proportion = field<double>(sp, "training_proportion", c.training_proportion, "split");
  if (!(c.training_proportion > 0.0 && c.training_proportion < 1.0)) {
    throw ConfigError("split.training_proportion must lie in (0, 1)");
  }

  if (j.contains("model") && j.contains("models")) throw ConfigError("give either 'model' or 'models', not both");
  nlohmann::json models = j.contains("models") ? j["models"] : nlohmann::json::array();
  if (j.contains("model")) models.push_back(j["model"]);
  if (!models.is_array() || models.empty()) throw ConfigError("config needs a 'model' or a non-empty 'models' list");
  for (const auto& m : models) {
    try {
      c.candidates.push_back(spec_from_json(m));
    } catch (const std::exception& e) {
      throw ConfigError(std::string("invalid model spec: ") + e.what());
    }
  }

  const auto& cv = object_or_empty(j, "cross_validation");
  reject_unknown(cv, {"nfolds"}, "cross_validation");
  c.cv_folds = field<int>(cv, "nfolds", c.cv_folds, "cross_validation");
  if (c.cv_folds < 2) throw ConfigError("cross_validation.nfolds must be at least 2");

  c.repetitions = field<int>(j, "repetitions", 1, "config");
  if (c.repetitions < 1) throw ConfigError("repetitions must be at least 1");
  c.seed = field<std::uint64_t>(j, "seed", 0, "config");

  const auto& q = object_or_empty(j, "quadrature");
  reject_unknown(q, {"panels", "max_panels", "tolerance"}, "quadrature");
  c.quadrature.panels = field<int>(q, "panels", c.quadrature.panels, "quadrature");
  c.quadrature.max_panels = field<int>(q, "max_panels", c.quadrature.max_panels, "quadrature");
  c.quadrature.tolerance = field<double>(q, "tolerance", c.quadrature.tolerance, "quadrature");
  if (c.quadrature.panels < 1 || c.quadrature.max_panels < c.quadrature.panels || !(c.quadrature.tolerance > 0.0)) {
    throw ConfigError("quadrature needs 1 <= panels <= max_panels and tolerance > 0");
  }
  c.output = field<std::string>(j, "output", "", "config");

  // Checks that need the problem's dimension.
  const int ndim = c.benchmark.contains("ndim") ? c.benchmark["ndim"].get<int>()
                   : c.benchmark["name"] == "normal_gamma" ? 2
                   : c.benchmark["name"] == "radiata"      ? 3
                   : c.benchmark["model"] == 1            ? 5
                                                           : 6;
  if (c.sampler.nwalkers < 2 * ndim) throw ConfigError("sampler.nwalkers must be at least twice the dimension");
  const auto ntrain = std::max<long long>(1, std::llround(c.training_proportion * c.sampler.nwalkers));
  if (c.candidates.size() > 1 && ntrain < c.cv_folds) {
    throw ConfigError("too few training chains for the requested cross-validation folds");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

BenchmarkProblem make_problem(const nlohmann::json& b, const QuadratureOptions& quadrature) {
  const std::string name = b.at("name").get<std::string>();
  BenchmarkProblem p;
  if (name == "rosenbrock" || name == "rastrigin") {
    p = name == "rosenbrock" ? rosenbrock_problem(b.at("ndim").get<int>()) : rastrigin_problem(b.at("ndim").get<int>());
    p.ground_truth = GroundTruth{"quadrature", quadrature_ln_z(p, quadrature).ln_z};
  } else if (name == "gaussian") {
    p = gaussian_nd_problem(b.at("ndim").get<int>(), b.at("half_width").get<double>());
  } else if (name == "normal_gamma") {
    NormalGammaSpec spec = make_normal_gamma_spec(b.at("n").get<int>(), b.at("tau0").get<double>(),
                                                  b.at("data_seed").get<std::uint64_t>());
    spec.mu0 = b.at("mu0").get<double>();
    spec.a0 = b.at("a0").get<double>();
    spec.b0 = b.at("b0").get<double>();
    p = normal_gamma_problem(spec);
  } else if (name == "pima") {
    const PimaData data = load_pima(data_file(b, "pima_indian.csv"), b.at("standardise").get<bool>());
    p = pima_problem(make_pima_spec(data, b.at("model").get<int>(), b.at("tau").get<double>()));
  } else if (name == "radiata") {
    p = radiata_problem(make_radiata_spec(load_radiata(data_file(b, "radiata_pine.csv")), b.at("model").get<int>()));
  } else {
    throw ConfigError("unknown benchmark '" + name + "'");
  }
  return p;
}

// Running ------------------------------------------------------------------

RepetitionSeeds RepetitionSeeds::derive(std::uint64_t base, int index) {
  RepetitionSeeds s;
  s.repetition = derive_seed(base, static_cast<std::uint64_t>(index));
  s.initial = derive_seed(s.repetition, 1);
  s.sampler = derive_seed(s.repetition, 2);
  s.split = derive_seed(s.repetition, 3);
  s.cross_validation = derive_seed(s.repetition, 4);
  s.fit = derive_seed(s.repetition, 5);
  return s;
}

nlohmann::json RepetitionSeeds::to_json() const {
  return {{"repetition", repetition}, {"initial", initial},          {"sampler", sampler},
          {"split", split},           {"cross_validation", cross_validation}, {"fit", fit}};
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  ExperimentReport report;
  report.config = config;
  const BenchmarkProblem problem = make_problem(config.benchmark, config.quadrature);
  report.benchmark_name = problem.name;
  report.ndim = problem.ndim;
  report.ground_truth = problem.ground_truth;
  const LnPosteriorFn posterior = problem.posterior_fn();

  for (int r = 0; r < config.repetitions; ++r) {
    RepetitionResult rep;
    rep.index = r;
    rep.seeds = RepetitionSeeds::derive(config.seed, r);
    try {
      SamplerConfig sc = config.sampler;
      sc.seed = rep.seeds.sampler;
      const Eigen::MatrixXd initial = problem.initial_positions(sc.nwalkers, rep.seeds.initial);
      SamplerRun run = run_sampler(posterior, sc, initial);
      rep.timing.burn_seconds = run.burn_seconds;
      rep.timing.sample_seconds = run.sample_seconds;
      rep.acceptance_rate = acceptance_rate(run.moves);

      const SplitResult split = split_by_chain(run.chains, config.training_proportion, rep.seeds.split);
      rep.training_chains = split.training.nchains();
      rep.inference_chains = split.inference.nchains();

      const auto fit_start = Clock::now();
      std::vector<ModelSpec> specs;
      for (const auto& c : config.candidates) specs.push_back(with_fit_seed(c, rep.seeds.fit));
      std::size_t chosen = 0;
      if (specs.size() > 1) {
        rep.selection = cross_validate(split.training, specs, CrossValidationPlan{config.cv_folds, rep.seeds.cross_validation});
        chosen = rep.selection->best;
      }
      const auto model = fit_model(split.training, specs[chosen]);
      rep.model = describe(config.candidates[chosen]);
      rep.timing.fit_seconds = seconds_since(fit_start);

      const auto ev_start = Clock::now();
      rep.evidence = compute_evidence(split.inference, *model);
      rep.timing.evidence_seconds = seconds_since(ev_start);
      rep.ok = true;
    } catch (const std::exception& e) {
      rep.ok = false;
      rep.error = e.what();
    }
    report.repetitions.push_back(std::move(rep));
  }
  return report;
}

std::size_t ExperimentReport::successes() const {
  std::size_t n = 0;
  for (const auto& r : repetitions) n += r.ok ? 1 : 0;
  return n;
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json reps = nlohmann::json::array();
  std::vector<double> ln_z, est_std, errors;
  for (const auto& r : repetitions) {
    nlohmann::json e{{"index", r.index}, {"seeds", r.seeds.to_json()}, {"status", r.ok ? "ok" : "failed"}};
    if (!r.ok) {
      e["error"] = r.error;
      reps.push_back(std::move(e));
      continue;
    }
    e["model"] = r.model;
    e["acceptance_rate"] = r.acceptance_rate;
    e["training_chains"] = r.training_chains;
    e["inference_chains"] = r.inference_chains;
    e["evidence"] = r.evidence.to_json();
    if (r.selection) {
      nlohmann::json scores = nlohmann::json::array();
      for (const double s : r.selection->ln_scores) scores.push_back(finite_or_null(s));
      e["model_selection"] = {{"selected", r.selection->best}, {"ln_scores", scores}, {"failures", r.selection->failures}};
    }
    const double lz = r.evidence.evidence.ln_mean;
    ln_z.push_back(lz);
    est_std.push_back(r.evidence.ln_evidence_std);
    if (ground_truth) {
      e["ln_z_error"] = finite_or_null(lz - ground_truth->ln_z);
      errors.push_back(lz - ground_truth->ln_z);
    }
    reps.push_back(std::move(e));
  }

  nlohmann::json aggregate{{"successes", successes()},
                           {"failures", repetitions.size() - successes()},
                           {"mean_ln_z", finite_or_null(mean_of(ln_z))},
                           {"measured_std_ln_z", finite_or_null(sample_std(ln_z))},
                           {"mean_estimated_std_ln_z", finite_or_null(mean_of(est_std))}};
  if (ground_truth) aggregate["mean_error"] = finite_or_null(mean_of(errors));

  nlohmann::json bench{{"name", benchmark_name}, {"ndim", ndim}, {"ground_truth", nullptr}};
  if (ground_truth) bench["ground_truth"] = {{"kind", ground_truth->kind}, {"ln_z", ground_truth->ln_z}};
  if (benchmark_name == "pima") {
    bench["preprocessing"] = config.benchmark.at("standardise").get<bool>()
                                 ? "covariates standardised to zero mean, unit sample variance; bias column excluded"
                                 : "covariates used as supplied";
  }
  return {{"schema_version", kReportSchemaVersion},
          {"config", config.to_json()},
          {"benchmark", bench},
          {"repetitions", reps},
          {"aggregate", aggregate}};
}

nlohmann::json ExperimentReport::timing_json() const {
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& r : repetitions) {
    reps.push_back({{"index", r.index},
                    {"burn_seconds", r.timing.burn_seconds},
                    {"sample_seconds", r.timing.sample_seconds},
                    {"fit_seconds", r.timing.fit_seconds},
                    {"evidence_seconds", r.timing.evidence_seconds}});
  }
  return {{"schema_version", kReportSchemaVersion}, {"name", config.name}, {"repetitions", reps}};
}

ComparisonReport compare_models(const ExperimentConfig& first, const ExperimentConfig& second) {
  ComparisonReport out{run_experiment(first), run_experiment(second), {}};
  const std::size_t n = std::min(out.first.repetitions.size(), out.second.repetitions.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = out.first.repetitions[i];
    const auto& b = out.second.repetitions[i];
    if (a.ok && b.ok) out.bayes_factors.emplace_back(static_cast<int>(i), bayes_factor(a.evidence, b.evidence));
  }
  return out;
}

nlohmann::json ComparisonReport::to_json() const {
  nlohmann::json bfs = nlohmann::json::array();
  std::vector<double> values;
  for (const auto& [index, bf] : bayes_factors) {
    nlohmann::json e = bf.to_json();
    e["index"] = index;
    bfs.push_back(std::move(e));
    values.push_back(bf.ln_bf);
  }
  return {{"schema_version", kReportSchemaVersion},
          {"first", first.to_json()},
          {"second", second.to_json()},
          {"bayes_factors", bfs},
          {"aggregate",
           {{"pairs", bayes_factors.size()},
            {"mean_ln_bf", finite_or_null(mean_of(values))},
            {"measured_std_ln_bf", finite_or_null(sample_std(values))}}}};
}

// Output -------------------------------------------------------------------

ReportFormat report_format_from_string(const std::string& name) {
  if (name == "json") return ReportFormat::json;
  if (name == "csv") return ReportFormat::csv;
  throw std::invalid_argument("unknown report format '" + name + "' (expected json or csv)");
}

namespace {

std::string csv_number(const nlohmann::json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_float()) return format_double(v.get<double>());
  return v.dump();
}

std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

void render_experiment_csv(const nlohmann::json& report, std::ostringstream& out, const std::string& prefix) {
  const auto& truth = report.at("benchmark").at("ground_truth");
  const bool has_truth = !truth.is_null();
  out << (prefix.empty() ? "" : "run,")
      << "index,repetition_seed,status,model,ln_rho_hat,ln_sigma2,ln_nu4,kappa_hat,n_eff,ln_evidence_mean,"
         "ln_evidence_std,nu_over_sigma_ratio,expected_ratio,kurtosis_flag,ratio_flag";
  if (has_truth) out << ",ground_truth_ln_z,error";
  out << '\n';
  for (const auto& r : report.at("repetitions")) {
    if (!prefix.empty()) out << prefix << ',';
    out << r.at("index").get<int>() << ',' << r.at("seeds").at("repetition").get<std::uint64_t>() << ','
        << r.at("status").get<std::string>() << ',';
    if (r.at("status") != "ok") {
      out << csv_text(r.value("error", std::string())) << ",,,,,,,,,,,";
      if (has_truth) out << ",,";
      out << '\n';
      continue;
    }
    const auto& ev = r.at("evidence");
    const auto& dg = ev.at("diagnostics");
    out << csv_text(r.at("model").get<std::string>()) << ',' << csv_number(ev.at("ln_rho_hat")) << ','
        << csv_number(ev.at("ln_sigma2")) << ',' << csv_number(ev.at("ln_nu4")) << ','
        << csv_number(ev.at("kappa_hat")) << ',' << csv_number(ev.at("n_eff")) << ','
        << csv_number(ev.at("ln_evidence_mean")) << ',' << csv_number(ev.at("ln_evidence_std")) << ','
        << csv_number(dg.at("nu_over_sigma_ratio")) << ',' << csv_number(dg.at("expected_ratio")) << ','
        << csv_number(dg.at("kurtosis_flag")) << ',' << csv_number(dg.at("ratio_flag"));
    if (has_truth) out << ',' << csv_number(truth.at("ln_z")) << ',' << csv_number(r.at("ln_z_error"));
    out << '\n';
  }
}

}  // namespace

std::string render_report(const nlohmann::json& report, ReportFormat format) {
  if (format == ReportFormat::json) return report.dump(2) + "\n";
  std::ostringstream out;
  if (report.contains("bayes_factors")) {
    out << "index,ln_bf,ln_bf_mean,ln_bf_var,ln_bf_std\n";
    for (const auto& bf : report.at("bayes_factors")) {
      out << bf.at("index").get<int>() << ',' << csv_number(bf.at("ln_bf")) << ',' << csv_number(bf.at("ln_bf_mean"))
          << ',' << csv_number(bf.at("ln_bf_var")) << ',' << csv_number(bf.at("ln_bf_std")) << '\n';
    }
    return out.str();
  }
  render_experiment_csv(report, out, "");
  return out.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot move report into place at " + path.string() + ": " + ec.message());
  }
}

}  // namespace harmonic
