#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <utility>

namespace harmonic {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPosInf = std::numeric_limits<double>::infinity();

/// Generator used everywhere a seed is accepted (64-bit Mersenne Twister).
using Rng = std::mt19937_64;

/// SplitMix64 finaliser; derives independent seeds from (base, stream).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Uniform double in [0, 1) built from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by rejection; portable across standard libraries.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Standard normal draw (Marsaglia polar method).
double standard_normal(Rng& rng);

/// ln(sum_i exp(x_i)); -inf entries are ignored, empty or all -inf gives -inf.
double logsumexp(std::span<const double> values);

/// ln(exp(a) + exp(b)).
inline double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

/// Streaming log-sum-exp with a running maximum.
class LogSumExp {
 public:
  void add(double value);
  double value() const;
  std::size_t count() const { return count_; }

 private:
  double max_ = kNegInf;
  double scaled_sum_ = 0.0;
  std::size_t count_ = 0;
};

/// ln of the volume of the unit d-ball, ln[pi^{d/2} / Gamma(d/2 + 1)].
double ln_unit_ball_volume(int d);

/// ln[Phi(a) - Phi(-a)] for a > 0, accurate for large a.
double ln_normal_central_mass(double a);

}  // namespace harmonic
