#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "harmonic/cross_validation.hpp"
#include "harmonic/numerics.hpp"

using namespace harmonic;

namespace {

ChainStore normal_store(int nchains, int n, std::uint64_t seed) {
  Rng rng(seed);
  ChainStore store(2);
  for (int c = 0; c < nchains; ++c) {
    Eigen::MatrixXd s(n, 2);
    Eigen::VectorXd lp(n);
    for (int i = 0; i < n; ++i) {
      s(i, 0) = standard_normal(rng);
      s(i, 1) = 2.0 * standard_normal(rng);
      lp(i) = -0.5 * (s(i, 0) * s(i, 0) + 0.25 * s(i, 1) * s(i, 1)) - std::log(2 * 3.141592653589793 * 2.0);
    }
    store.add_chain(s, lp);
  }
  return store;
}

}  // namespace

TEST_CASE("folds partition the chains, are balanced, sorted and seeded") {
  for (const std::size_t n : {2u, 7u, 10u, 33u}) {
    for (const int k : {2, 3, 5}) {
      if (n < static_cast<std::size_t>(k)) continue;
      const auto folds = make_folds(n, k, 4);
      REQUIRE(folds.size() == static_cast<std::size_t>(k));
      std::vector<std::size_t> all;
      for (const auto& f : folds) {
        CHECK(std::is_sorted(f.begin(), f.end()));
        CHECK(f.size() >= n / k);
        CHECK(f.size() <= n / k + 1);
        all.insert(all.end(), f.begin(), f.end());
      }
      std::sort(all.begin(), all.end());
      for (std::size_t i = 0; i < n; ++i) CHECK(all[i] == i);
      CHECK(make_folds(n, k, 4) == folds);
    }
  }
  CHECK(make_folds(30, 3, 1) != make_folds(30, 3, 2));
  CHECK_THROWS(make_folds(3, 4, 0));
  CHECK_THROWS(make_folds(5, 1, 0));
}

TEST_CASE("held-out second moment is the direct average") {
  const ChainStore store = normal_store(4, 200, 1);
  const auto model = fit_kde(store, 0.3);
  long double acc = 0.0L;
  std::size_t n = 0;
  for (const auto& c : store.chains()) {
    for (Eigen::Index i = 0; i < c.size(); ++i, ++n) {
      const double t = model.ln_phi(c.samples.row(i).transpose()) - c.ln_posterior(i);
      if (t != kNegInf) acc += std::exp(2.0L * t);
    }
  }
  CHECK(ln_second_moment(store, model) == doctest::Approx(static_cast<double>(std::log(acc / n))).epsilon(1e-12));
}

TEST_CASE("cross-validation scores equal a hand-rolled fold loop") {
  const ChainStore store = normal_store(8, 300, 2);
  const std::vector<ModelSpec> candidates = {KdeSpec{0.05, CovarianceKind::diagonal}, KdeSpec{0.5, CovarianceKind::diagonal},
                                             HypersphereSpec{}};
  const CrossValidationPlan plan{3, 9};
  const auto result = cross_validate(store, candidates, plan);
  const auto folds = make_folds(store.nchains(), plan.nfolds, plan.seed);
  std::vector<double> expected;
  for (const auto& cand : candidates) {
    double mean = 0.0;
    for (const auto& held : folds) {
      std::vector<std::size_t> rest;
      for (std::size_t j = 0; j < store.nchains(); ++j) {
        if (!std::binary_search(held.begin(), held.end(), j)) rest.push_back(j);
      }
      const auto model = fit_model(store.subset(rest), cand);
      mean += std::exp(ln_second_moment(store.subset(held), *model)) / folds.size();
    }
    expected.push_back(std::log(mean));
  }
  REQUIRE(result.ln_scores.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(result.ln_scores[i] == doctest::Approx(expected[i]).epsilon(1e-10));
  const auto best = std::min_element(expected.begin(), expected.end()) - expected.begin();
  CHECK(result.best == static_cast<std::size_t>(best));
}

TEST_CASE("failing candidates score +inf; all failing throws") {
  const ChainStore store = normal_store(4, 50, 3);
  MgmmSpec too_many;
  too_many.options.ncomponents = 500;  // more clusters than samples
  const auto result = cross_validate(store, {too_many, KdeSpec{0.3, CovarianceKind::diagonal}}, {2, 1});
  CHECK(result.ln_scores[0] == kPosInf);
  CHECK_FALSE(result.failures[0].empty());
  CHECK(result.failures[1].empty());
  CHECK(result.best == 1);
  CHECK_THROWS_AS(cross_validate(store, {too_many}, {2, 1}), FitError);
}

TEST_CASE("ties go to the earlier candidate") {
  const ChainStore store = normal_store(4, 100, 4);
  const KdeSpec same{0.2, CovarianceKind::diagonal};
  CHECK(cross_validate(store, {same, same, same}, {2, 5}).best == 0);
}

TEST_CASE("KDE radius selection refits on all chains with the winning radius") {
  const ChainStore store = normal_store(6, 200, 5);
  const std::vector<double> grid = {0.02, 0.2, 2.0};
  const CrossValidationPlan plan{2, 7};
  std::vector<ModelSpec> specs;
  for (const double r : grid) specs.push_back(KdeSpec{r, CovarianceKind::diagonal});
  const auto cv = cross_validate(store, specs, plan);
  const KdeModel model = fit_kde(store, grid, plan);
  CHECK(model.radius() == grid[cv.best]);
  CHECK(model.nsamples() == store.nsamples());
}

TEST_CASE("model specs round-trip through JSON and reject bad input") {
  MgmmSpec m;
  m.options.ncomponents = 3;
  m.options.lambda = 0.5;
  m.options.sgd.step = 0.2;
  const std::vector<ModelSpec> specs = {HypersphereSpec{}, m, KdeSpec{0.7, CovarianceKind::full}};
  for (const auto& s : specs) CHECK(spec_to_json(spec_from_json(spec_to_json(s))) == spec_to_json(s));
  CHECK_THROWS(spec_from_json({{"kind", "nope"}}));
  CHECK_THROWS(spec_from_json({{"kind", "kde"}, {"radius", -1}}));
  CHECK_THROWS(spec_from_json({{"kind", "mgmm"}, {"components", 2}}));
  CHECK_THROWS(spec_from_json({{"radius", 1}}));
}

TEST_CASE("fitted models reload from JSON by kind") {
  const ChainStore store = normal_store(3, 100, 6);
  MgmmSpec m;
  m.options.ncomponents = 2;
  for (const ModelSpec& spec : std::vector<ModelSpec>{HypersphereSpec{}, m, KdeSpec{}}) {
    const auto model = fit_model(store, spec);
    const auto back = model_from_json(nlohmann::json::parse(model->to_json().dump()));
    CHECK(back->kind() == model->kind());
    const Eigen::VectorXd x = store.chain(0).samples.row(3).transpose();
    CHECK(back->ln_phi(x) == model->ln_phi(x));
  }
}
