#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

#include "harmonic/numerics.hpp"

using namespace harmonic;

namespace {

// Direct long-double sum, fine while the exponents stay moderate.
double naive_lse(const std::vector<double>& xs) {
  long double s = 0.0L;
  for (const double x : xs) s += std::exp(static_cast<long double>(x));
  return static_cast<double>(std::log(s));
}

}  // namespace

TEST_CASE("logsumexp matches a long-double direct sum") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> xs(1 + trial);
    for (auto& x : xs) x = 20.0 * (uniform01(rng) - 0.5);
    CHECK(logsumexp(xs) == doctest::Approx(naive_lse(xs)).epsilon(1e-14));
  }
}

TEST_CASE("logsumexp survives huge offsets and ignores -inf") {
  const std::vector<double> big = {1000.0, 1000.0};
  CHECK(logsumexp(big) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));
  const std::vector<double> tiny = {-1000.0, -1000.0 + std::log(3.0)};
  CHECK(logsumexp(tiny) == doctest::Approx(-1000.0 + std::log(4.0)).epsilon(1e-15));
  const std::vector<double> with_inf = {kNegInf, 0.0, kNegInf};
  CHECK(logsumexp(with_inf) == 0.0);
  CHECK(logsumexp(std::vector<double>{}) == kNegInf);
  CHECK(logsumexp(std::vector<double>{kNegInf, kNegInf}) == kNegInf);
}

TEST_CASE("streaming LogSumExp agrees with the batch version in any order") {
  Rng rng(11);
  std::vector<double> xs(1000);
  for (auto& x : xs) x = 300.0 * (uniform01(rng) - 0.5);
  LogSumExp acc;
  for (const double x : xs) acc.add(x);
  CHECK(acc.count() == xs.size());
  CHECK(acc.value() == doctest::Approx(logsumexp(xs)).epsilon(1e-14));
  LogSumExp reversed;
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) reversed.add(*it);
  CHECK(reversed.value() == doctest::Approx(acc.value()).epsilon(1e-14));
  CHECK(LogSumExp{}.value() == kNegInf);
}

TEST_CASE("log_add_exp") {
  CHECK(log_add_exp(std::log(2.0), std::log(5.0)) == doctest::Approx(std::log(7.0)));
  CHECK(log_add_exp(kNegInf, 3.0) == 3.0);
  CHECK(log_add_exp(3.0, kNegInf) == 3.0);
  CHECK(log_add_exp(-800.0, -800.0) == doctest::Approx(-800.0 + std::log(2.0)));
}

TEST_CASE("unit ball volume: closed forms and the two-step recurrence") {
  CHECK(ln_unit_ball_volume(1) == doctest::Approx(std::log(2.0)));
  CHECK(ln_unit_ball_volume(2) == doctest::Approx(std::log(std::numbers::pi)));
  CHECK(ln_unit_ball_volume(3) == doctest::Approx(std::log(4.0 * std::numbers::pi / 3.0)));
  // V_d = (2 pi / d) V_{d-2}
  for (int d = 3; d <= 300; ++d) {
    CHECK(ln_unit_ball_volume(d) ==
          doctest::Approx(std::log(2.0 * std::numbers::pi / d) + ln_unit_ball_volume(d - 2)).epsilon(1e-12));
  }
}

TEST_CASE("central normal mass against erf and its tail form") {
  for (const double a : {0.1, 0.5, 1.0, 2.0, 3.0}) {
    CHECK(ln_normal_central_mass(a) == doctest::Approx(std::log(std::erf(a / std::numbers::sqrt2))).epsilon(1e-13));
  }
  for (const double a : {6.0, 8.0, 12.0}) {
    CHECK(ln_normal_central_mass(a) == doctest::Approx(std::log1p(-std::erfc(a / std::numbers::sqrt2))).epsilon(1e-13));
  }
  CHECK(ln_normal_central_mass(6.0) < 0.0);
}

TEST_CASE("derive_seed is deterministic and spreads streams") {
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  std::set<std::uint64_t> seen;
  for (std::uint64_t base = 0; base < 20; ++base) {
    for (std::uint64_t stream = 0; stream < 50; ++stream) seen.insert(derive_seed(base, stream));
  }
  CHECK(seen.size() == 1000);
}

TEST_CASE("uniform01 range and mean; uniform_index is uniform by chi-square") {
  Rng rng(3);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = uniform01(rng);
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  // sd of the mean is sqrt(1/12 / n) ~ 6.5e-4
  CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));

  const int k = 7;
  std::vector<int> counts(k, 0);
  for (int i = 0; i < 70000; ++i) ++counts[uniform_index(rng, k)];
  double chi2 = 0.0;
  for (const int c : counts) chi2 += (c - 10000.0) * (c - 10000.0) / 10000.0;
  CHECK(chi2 < 22.46);  // 0.999 quantile of chi-square with 6 dof
}

TEST_CASE("standard_normal moments") {
  Rng rng(5);
  const int n = 200000;
  double m1 = 0.0, m2 = 0.0, m4 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = standard_normal(rng);
    m1 += x;
    m2 += x * x;
    m4 += x * x * x * x;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  CHECK(std::abs(m1) < 4.0 / std::sqrt(n));
  CHECK(std::abs(m2 - 1.0) < 4.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(m4 - 3.0) < 4.0 * std::sqrt(96.0 / n));
}
