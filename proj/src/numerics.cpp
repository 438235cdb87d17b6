#include "harmonic/numerics.hpp"

#include <algorithm>
#include <numbers>

namespace harmonic {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  // Largest multiple of n representable; draws above it are rejected.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

double standard_normal(Rng& rng) {
  double u = 0.0, v = 0.0, s = 0.0;
  do {
    u = 2.0 * uniform01(rng) - 1.0;
    v = 2.0 * uniform01(rng) - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  return u * std::sqrt(-2.0 * std::log(s) / s);
}

double logsumexp(std::span<const double> values) {
  double max = kNegInf;
  for (double v : values) max = std::max(max, v);
  if (max == kNegInf) return kNegInf;
  if (max == kPosInf) return kPosInf;
  double sum = 0.0;
  for (double v : values) {
    if (v != kNegInf) sum += std::exp(v - max);
  }
  return max + std::log(sum);
}

void LogSumExp::add(double value) {
  ++count_;
  if (value == kNegInf) return;
  if (value <= max_) {
    scaled_sum_ += std::exp(value - max_);
  } else {
    scaled_sum_ = scaled_sum_ * std::exp(max_ - value) + 1.0;
    max_ = value;
  }
}

double LogSumExp::value() const {
  if (max_ == kNegInf) return kNegInf;
  return max_ + std::log(scaled_sum_);
}

double ln_unit_ball_volume(int d) {
  const double half_d = 0.5 * d;
  return half_d * std::log(std::numbers::pi) - std::lgamma(half_d + 1.0);
}

double ln_normal_central_mass(double a) {
  // Phi(a) - Phi(-a) = 1 - erfc(a / sqrt 2)
  return std::log1p(-std::erfc(a / std::numbers::sqrt2));
}

}  // namespace harmonic
