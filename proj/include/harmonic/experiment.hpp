#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "harmonic/benchmarks.hpp"
#include "harmonic/cross_validation.hpp"
#include "harmonic/evidence.hpp"
#include "harmonic/sampler.hpp"

namespace harmonic {

/// Invalid or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kReportSchemaVersion = 1;

struct ExperimentConfig {
  std::string name;
  nlohmann::json benchmark;  // normalised, every default filled in
  SamplerConfig sampler;     // seed field unused; derived per repetition
  double training_proportion = 0.5;
  std::vector<ModelSpec> candidates;  // one entry: no cross-validation
  int cv_folds = 2;
  int repetitions = 1;
  std::uint64_t seed = 0;
  QuadratureOptions quadrature;
  std::string output;  // empty: caller decides

  /// Complete echo of the configuration including defaults.
  nlohmann::json to_json() const;
};

/// Parses and validates; throws ConfigError with a readable message.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Builds the benchmark named in a normalised benchmark block. Ground truth
/// by quadrature is computed here when the problem has no closed form.
BenchmarkProblem make_problem(const nlohmann::json& benchmark, const QuadratureOptions& quadrature);

/// Seeds for one repetition, all derived from the base seed.
struct RepetitionSeeds {
  std::uint64_t repetition = 0;
  std::uint64_t initial = 0;
  std::uint64_t sampler = 0;
  std::uint64_t split = 0;
  std::uint64_t cross_validation = 0;
  std::uint64_t fit = 0;

  static RepetitionSeeds derive(std::uint64_t base, int index);
  nlohmann::json to_json() const;
};

struct RepetitionTiming {
  double burn_seconds = 0.0;
  double sample_seconds = 0.0;
  double fit_seconds = 0.0;
  double evidence_seconds = 0.0;
};

struct RepetitionResult {
  int index = 0;
  RepetitionSeeds seeds;
  bool ok = false;
  std::string error;
  std::string model;  // description of the fitted model
  std::optional<CrossValidationResult> selection;
  double acceptance_rate = 0.0;
  std::size_t training_chains = 0;
  std::size_t inference_chains = 0;
  EvidenceResult evidence;
  RepetitionTiming timing;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::string benchmark_name;
  int ndim = 0;
  std::optional<GroundTruth> ground_truth;
  std::vector<RepetitionResult> repetitions;

  std::size_t successes() const;
  /// Deterministic content only; timings live in timing_json().
  nlohmann::json to_json() const;
  nlohmann::json timing_json() const;
};

/// Runs every repetition: sample, split by chain, fit (cross-validating when
/// several candidates are given), estimate. A failing repetition is recorded
/// and the run continues.
ExperimentReport run_experiment(const ExperimentConfig& config);

struct ComparisonReport {
  ExperimentReport first;
  ExperimentReport second;
  /// One entry per repetition index where both runs succeeded.
  std::vector<std::pair<int, BayesFactorResult>> bayes_factors;

  nlohmann::json to_json() const;
};

/// Runs both experiments and forms the Bayes factor z1 / z2 repetition by repetition.
ComparisonReport compare_models(const ExperimentConfig& first, const ExperimentConfig& second);

enum class ReportFormat { json, csv };
ReportFormat report_format_from_string(const std::string& name);

/// JSON reports are pretty-printed with sorted keys. CSV has one row per
/// repetition; an error column appears when the ground truth is known.
std::string render_report(const nlohmann::json& report, ReportFormat format);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace harmonic
