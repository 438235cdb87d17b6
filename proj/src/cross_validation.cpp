#include "harmonic/cross_validation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace harmonic {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

CovarianceKind covariance_field(const nlohmann::json& j) {
  return covariance_kind_from_string(j.value("covariance", std::string("diagonal")));
}

}  // namespace

std::unique_ptr<TargetModel> fit_model(const ChainStore& training, const ModelSpec& spec) {
  return std::visit(
      Overloaded{
          [&](const HypersphereSpec& s) -> std::unique_ptr<TargetModel> {
            return std::make_unique<HypersphereModel>(fit_hypersphere(training, s.options));
          },
          [&](const MgmmSpec& s) -> std::unique_ptr<TargetModel> {
            return std::make_unique<MgmmModel>(fit_mgmm(training, s.options));
          },
          [&](const KdeSpec& s) -> std::unique_ptr<TargetModel> {
            return std::make_unique<KdeModel>(fit_kde(training, s.radius, s.covariance));
          }},
      spec);
}

std::string describe(const ModelSpec& spec) {
  std::ostringstream out;
  std::visit(Overloaded{[&](const HypersphereSpec& s) {
                          out << "hypersphere(" << to_string(s.options.covariance) << ")";
                        },
                        [&](const MgmmSpec& s) {
                          out << "mgmm(K=" << s.options.ncomponents << ", lambda=" << s.options.lambda << ")";
                        },
                        [&](const KdeSpec& s) { out << "kde(R=" << s.radius << ")"; }},
             spec);
  return out.str();
}

nlohmann::json spec_to_json(const ModelSpec& spec) {
  return std::visit(
      Overloaded{
          [](const HypersphereSpec& s) -> nlohmann::json {
            nlohmann::json j{{"kind", "hypersphere"},
                             {"covariance", to_string(s.options.covariance)},
                             {"bracket_probes", s.options.bracket_probes},
                             {"radius_bounds", nullptr}};
            if (s.options.radius_bounds) {
              j["radius_bounds"] = {s.options.radius_bounds->first, s.options.radius_bounds->second};
            }
            return j;
          },
          [](const MgmmSpec& s) -> nlohmann::json {
            const auto& o = s.options;
            return {{"kind", "mgmm"},          {"ncomponents", o.ncomponents}, {"lambda", o.lambda},
                    {"step", o.sgd.step},      {"batch", o.sgd.batch},         {"epochs", o.sgd.epochs},
                    {"seed", o.sgd.seed},      {"min_scale", o.min_scale},     {"max_scale", o.max_scale},
                    {"kmeans_restarts", o.kmeans_restarts}};
          },
          [](const KdeSpec& s) -> nlohmann::json {
            return {{"kind", "kde"}, {"radius", s.radius}, {"covariance", to_string(s.covariance)}};
          }},
      spec);
}

ModelSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("model spec must be an object");
  if (!j.contains("kind")) throw std::invalid_argument("model spec needs a 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  const std::set<std::string> known = kind == "hypersphere"
                                          ? std::set<std::string>{"kind", "covariance", "bracket_probes", "radius_bounds"}
                                      : kind == "mgmm"
                                          ? std::set<std::string>{"kind", "ncomponents", "lambda", "step", "batch", "epochs",
                                                                  "seed", "min_scale", "max_scale", "kmeans_restarts"}
                                          : std::set<std::string>{"kind", "radius", "covariance"};
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) throw std::invalid_argument("unknown key '" + item.key() + "' in " + kind + " spec");
  }
  if (kind == "hypersphere") {
    HypersphereSpec s;
    s.options.covariance = covariance_field(j);
    s.options.bracket_probes = j.value("bracket_probes", s.options.bracket_probes);
    if (j.contains("radius_bounds") && !j["radius_bounds"].is_null()) {
      const auto b = j["radius_bounds"].get<std::vector<double>>();
      if (b.size() != 2 || !(b[0] > 0.0) || !(b[1] > b[0])) {
        throw std::invalid_argument("hypersphere radius_bounds must be [lo, hi] with 0 < lo < hi");
      }
      s.options.radius_bounds = std::make_pair(b[0], b[1]);
    }
    if (s.options.bracket_probes < 3) throw std::invalid_argument("hypersphere bracket_probes must be >= 3");
    return s;
  }
  if (kind == "mgmm") {
    MgmmSpec s;
    auto& o = s.options;
    o.ncomponents = j.value("ncomponents", o.ncomponents);
    o.lambda = j.value("lambda", o.lambda);
    o.sgd.step = j.value("step", o.sgd.step);
    o.sgd.batch = j.value("batch", o.sgd.batch);
    o.sgd.epochs = j.value("epochs", o.sgd.epochs);
    o.sgd.seed = j.value("seed", o.sgd.seed);
    o.min_scale = j.value("min_scale", o.min_scale);
    o.max_scale = j.value("max_scale", o.max_scale);
    o.kmeans_restarts = j.value("kmeans_restarts", o.kmeans_restarts);
    if (o.ncomponents < 1) throw std::invalid_argument("mgmm ncomponents must be >= 1");
    if (!(o.lambda >= 0.0)) throw std::invalid_argument("mgmm lambda must be >= 0");
    if (!(o.sgd.step > 0.0)) throw std::invalid_argument("mgmm step must be > 0");
    if (o.sgd.epochs < 0) throw std::invalid_argument("mgmm epochs must be >= 0");
    if (!(o.min_scale > 0.0) || !(o.max_scale >= o.min_scale)) {
      throw std::invalid_argument("mgmm scale bounds must satisfy 0 < min_scale <= max_scale");
    }
    return s;
  }
  if (kind == "kde") {
    KdeSpec s;
    s.radius = j.value("radius", s.radius);
    s.covariance = covariance_field(j);
    if (!(s.radius > 0.0)) throw std::invalid_argument("kde radius must be > 0");
    return s;
  }
  throw std::invalid_argument("unknown model kind '" + kind + "'");
}

std::unique_ptr<TargetModel> model_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "hypersphere") return std::make_unique<HypersphereModel>(HypersphereModel::from_json(j));
  if (kind == "mgmm") return std::make_unique<MgmmModel>(MgmmModel::from_json(j));
  if (kind == "kde") return std::make_unique<KdeModel>(KdeModel::from_json(j));
  throw std::invalid_argument("unknown model kind '" + kind + "'");
}

double ln_second_moment(const ChainStore& store, const TargetModel& model) {
  LogSumExp acc;
  std::size_t n = 0;
  for (const Chain& chain : store.chains()) {
    for (Eigen::Index i = 0; i < chain.size(); ++i) {
      acc.add(2.0 * (model.ln_phi(chain.samples.row(i).transpose()) - chain.ln_posterior(i)));
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("ln_second_moment: empty store");
  const double total = acc.value();
  if (total == kNegInf) return kPosInf;
  return total - std::log(static_cast<double>(n));
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t nchains, int nfolds, std::uint64_t seed) {
  if (nfolds < 2) throw std::invalid_argument("make_folds: need at least two folds");
  if (nchains < static_cast<std::size_t>(nfolds)) throw std::invalid_argument("make_folds: fewer chains than folds");
  std::vector<std::size_t> order(nchains);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = nchains - 1; i > 0; --i) std::swap(order[i], order[uniform_index(rng, i + 1)]);
  std::vector<std::vector<std::size_t>> folds(static_cast<std::size_t>(nfolds));
  for (std::size_t i = 0; i < nchains; ++i) folds[i % folds.size()].push_back(order[i]);
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

CrossValidationResult cross_validate(const ChainStore& training, const std::vector<ModelSpec>& candidates,
                                     const CrossValidationPlan& plan) {
  if (candidates.empty()) throw std::invalid_argument("cross_validate: no candidates");
  const auto folds = make_folds(training.nchains(), plan.nfolds, plan.seed);

  std::vector<ChainStore> heldout, complement;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> rest;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) rest.insert(rest.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(rest.begin(), rest.end());
    heldout.push_back(training.subset(folds[f]));
    complement.push_back(training.subset(rest));
  }

  CrossValidationResult result;
  result.ln_scores.assign(candidates.size(), kPosInf);
  result.failures.assign(candidates.size(), std::string());
  const double ln_nfolds = std::log(static_cast<double>(folds.size()));
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    double ln_total = kNegInf;
    try {
      for (std::size_t f = 0; f < folds.size(); ++f) {
        const auto model = fit_model(complement[f], candidates[c]);
        const double score = ln_second_moment(heldout[f], *model);
        if (score == kPosInf) {
          ln_total = kPosInf;
          break;
        }
        ln_total = log_add_exp(ln_total, score);
      }
    } catch (const std::exception& e) {
      result.failures[c] = e.what();
      ln_total = kPosInf;
    }
    result.ln_scores[c] = ln_total == kPosInf ? kPosInf : ln_total - ln_nfolds;
    if (result.ln_scores[c] < result.ln_scores[result.best]) result.best = c;
  }
  if (!std::isfinite(result.ln_scores[result.best])) {
    throw FitError("cross_validate: no candidate reached a finite held-out score");
  }
  return result;
}

KdeModel fit_kde(const ChainStore& training, const std::vector<double>& radius_grid,
                 const CrossValidationPlan& plan, CovarianceKind covariance) {
  if (training.nchains() == 0) throw FitError("fit_kde: empty training set");
  if (radius_grid.empty()) throw std::invalid_argument("fit_kde: empty radius grid");
  std::vector<ModelSpec> candidates;
  for (const double r : radius_grid) {
    if (!(r > 0.0)) throw std::invalid_argument("fit_kde: radii must be positive");
    candidates.emplace_back(KdeSpec{r, covariance});
  }
  const auto cv = cross_validate(training, candidates, plan);
  return fit_kde(training, radius_grid[cv.best], covariance);
}

}  // namespace harmonic
