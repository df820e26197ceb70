#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "freqfit/distributions.hpp"

namespace freqfit {
namespace detail {

// splitmix64 finalizer; used only to spread (seed, stream) into engine seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Deterministic random source.  A (seed, stream_index) pair always reproduces
// the same draws, and distinct stream indices give independently seeded
// engines, so replicates can be generated in any order.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_index)
      : seed_(seed),
        stream_index_(stream_index),
        engine_(detail::mix64(seed ^ detail::mix64(stream_index ^ 0x5851F42D4C957F2DULL))) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_index() const noexcept { return stream_index_; }

  // Uniform draw in [0, 1) with 53 random bits.
  double next_uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal by the Marsaglia polar transform.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_uniform() - 1.0;
      v = 2.0 * next_uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  // Gamma(shape, rate) by Marsaglia-Tsang rejection, with the shape < 1 case
  // boosted through Gamma(shape + 1).
  double next_gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
      throw std::domain_error("next_gamma: shape and rate must be positive");
    if (shape < 1.0) {
      double u;
      do {
        u = next_uniform();
      } while (u == 0.0);
      return next_gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
      double x, v;
      do {
        x = next_normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = next_uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
      if (u > 0.0 && std::log(u) < 0.5 * x2 + d - d * v + d * std::log(v))
        return d * v / rate;
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline std::vector<double> sample_normal(const NormalParams& p, std::size_t count,
                                         RandomStream& stream) {
  p.validate();
  std::vector<double> out(count);
  for (auto& x : out) x = p.mu + p.sigma * stream.next_normal();
  return out;
}

inline std::vector<double> sample_gamma(const GammaParams& p, std::size_t count,
                                        RandomStream& stream) {
  p.validate();
  std::vector<double> out(count);
  for (auto& x : out) x = stream.next_gamma(p.shape, p.rate);
  return out;
}

// Multinomial counts; always sums to total exactly.
inline std::vector<long long> sample_multinomial(const std::vector<double>& probs,
                                                 long long total,
                                                 RandomStream& stream) {
  if (probs.empty()) throw std::domain_error("sample_multinomial: empty probability vector");
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw std::domain_error("sample_multinomial: probabilities must be nonnegative");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-12)
    throw std::domain_error("sample_multinomial: probabilities must sum to 1");
  if (total < 0) throw std::domain_error("sample_multinomial: negative total");

  std::vector<long long> counts(probs.size(), 0);
  const std::size_t last = probs.size() - 1;
  for (long long n = 0; n < total; ++n) {
    const double u = stream.next_uniform();
    double acc = 0.0;
    std::size_t cell = last;
    for (std::size_t i = 0; i < last; ++i) {
      acc += probs[i];
      if (u < acc) {
        cell = i;
        break;
      }
    }
    ++counts[cell];
  }
  return counts;
}

}  // namespace freqfit
