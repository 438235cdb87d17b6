#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "harmonic/hypersphere.hpp"
#include "harmonic/kde.hpp"
#include "harmonic/mgmm.hpp"

namespace harmonic {

struct HypersphereSpec {
  HypersphereOptions options;
};

struct MgmmSpec {
  MgmmOptions options;
};

struct KdeSpec {
  double radius = 0.1;
  CovarianceKind covariance = CovarianceKind::diagonal;
};

using ModelSpec = std::variant<HypersphereSpec, MgmmSpec, KdeSpec>;

std::unique_ptr<TargetModel> fit_model(const ChainStore& training, const ModelSpec& spec);

/// Short human-readable label, e.g. "mgmm(K=2, lambda=1e-08)".
std::string describe(const ModelSpec& spec);

nlohmann::json spec_to_json(const ModelSpec& spec);
/// Missing fields take their defaults. Throws std::invalid_argument on an
/// unknown kind or an invalid value.
ModelSpec spec_from_json(const nlohmann::json& j);

/// Rebuilds a fitted model from its to_json() form.
std::unique_ptr<TargetModel> model_from_json(const nlohmann::json& j);

/// ln[(1/N) sum_i exp(2 (ln phi_i - ln P_i))] over every sample of the store;
/// +inf when no sample falls inside the model's support.
double ln_second_moment(const ChainStore& store, const TargetModel& model);

struct CrossValidationPlan {
  int nfolds = 2;
  std::uint64_t seed = 0;
};

/// Chain indices in [0, nchains) dealt round-robin into nfolds groups after a
/// seeded shuffle. Each fold is sorted.
std::vector<std::vector<std::size_t>> make_folds(std::size_t nchains, int nfolds, std::uint64_t seed);

struct CrossValidationResult {
  std::size_t best = 0;
  /// ln of the held-out second moment averaged over folds; +inf when the
  /// candidate failed to fit on some fold or never overlapped held-out samples.
  std::vector<double> ln_scores;
  std::vector<std::string> failures;  // empty string when the candidate fitted on every fold
};

/// Fits every candidate on each fold complement and scores it on the fold.
/// The lowest mean score wins; ties go to the earlier candidate. Throws
/// FitError when no candidate reaches a finite score.
CrossValidationResult cross_validate(const ChainStore& training, const std::vector<ModelSpec>& candidates,
                                     const CrossValidationPlan& plan);

/// Radius chosen from the grid by cross-validation, then refitted on all
/// training chains.
KdeModel fit_kde(const ChainStore& training, const std::vector<double>& radius_grid,
                 const CrossValidationPlan& plan, CovarianceKind covariance = CovarianceKind::diagonal);

}  // namespace harmonic
