#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace crashlab {

// splitmix64; used to derive independent substreams from (seed, stream id)
// so that parallel consumers see the same numbers regardless of scheduling.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic RNG wrapper. std::mt19937_64 output is pinned by the
// standard; the draw helpers below avoid std::*_distribution, whose results
// are implementation-defined and would break byte-reproducibility contracts.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  // Substream for (seed, stream): independent of call order elsewhere.
  Rng(std::uint64_t seed, std::uint64_t stream)
      : gen_(splitmix64(splitmix64(seed) ^
                        splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1))) {}

  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    return Rng(seed, stream);
  }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return v % n;
  }

  // Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    uniform_below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (the deterministic, stateless branch).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
  }

  // Gamma(shape, scale) via Marsaglia-Tsang; shape < 1 handled by boosting.
  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0, scale) * std::pow(u > 0 ? u : 1e-300, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
      if (u > 0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }

  // Poisson via Knuth product-of-uniforms; adequate for the small means here.
  std::int64_t poisson(double mean) {
    std::int64_t k = 0;
    double remaining = mean;
    // Chunk large means so the running product never underflows.
    while (remaining > 500.0) {
      double p = 1.0;
      const double bound = std::exp(-500.0);
      while ((p *= uniform()) > bound) ++k;
      remaining -= 500.0;
    }
    const double bound = std::exp(-remaining);
    double p = uniform();
    while (p > bound) {
      ++k;
      p *= uniform();
    }
    return k;
  }

  // Negative binomial NB2 with mean mu and variance mu + alpha*mu^2,
  // as the usual gamma-Poisson mixture.
  std::int64_t negative_binomial(double mu, double alpha) {
    if (alpha <= 0.0) return poisson(mu);
    const double lambda = gamma(1.0 / alpha, alpha * mu);
    return poisson(lambda);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    shuffle(idx);
    return idx;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace crashlab
