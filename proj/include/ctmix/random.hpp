#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace ctmix {

// Philox4x64-10 counter-based PRF (Salmon et al. 2011). One 256-bit counter
// block yields four 64-bit words under a 128-bit key. Streams keyed by
// (base_seed, stream_id) never share a (key, counter) pair, so distinct
// stream ids are non-overlapping by construction.
struct Philox4x64 {
  static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ull;
  static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ull;
  static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
  static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;

  static std::array<std::uint64_t, 4> block(std::array<std::uint64_t, 4> ctr,
                                            std::uint64_t k0, std::uint64_t k1) {
    for (int round = 0; round < 10; ++round) {
      const unsigned __int128 p0 = static_cast<unsigned __int128>(kMul0) * ctr[0];
      const unsigned __int128 p1 = static_cast<unsigned __int128>(kMul1) * ctr[2];
      const std::uint64_t hi0 = static_cast<std::uint64_t>(p0 >> 64);
      const std::uint64_t lo0 = static_cast<std::uint64_t>(p0);
      const std::uint64_t hi1 = static_cast<std::uint64_t>(p1 >> 64);
      const std::uint64_t lo1 = static_cast<std::uint64_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
      k0 += kWeyl0;
      k1 += kWeyl1;
    }
    return ctr;
  }
};

// Deterministic random stream: identical (base_seed, stream_id, call sequence)
// reproduces identical output. Cheap to construct; confine one instance to one
// execution context at a time.
class RandomStream {
public:
  RandomStream(std::uint64_t base_seed, std::uint64_t stream_id)
      : base_seed_(base_seed), stream_id_(stream_id) {}

  std::uint64_t base_seed() const { return base_seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() {
    if (buffer_pos_ == 4) {
      buffer_ = Philox4x64::block({block_index_, 0, 0, 0}, base_seed_, stream_id_);
      ++block_index_;
      buffer_pos_ = 0;
    }
    return buffer_[buffer_pos_++];
  }

  // Uniform on [0,1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on the open interval (0,1); safe to pass to log().
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential: rate must be > 0");
    return -std::log(uniform_open()) / rate;
  }

  // Standard normal via Box-Muller.
  double normal() {
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    const double theta = 2.0 * kPi * uniform();
    return r * std::cos(theta);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Gamma(shape, scale 1), Marsaglia-Tsang squeeze method; shape < 1 boosted.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be > 0");
    if (shape < 1.0) {
      const double u = uniform_open();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x;
      double v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  double beta(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("beta: shapes must be > 0");
    for (;;) {
      const double x = gamma(a);
      const double y = gamma(b);
      if (x + y > 0.0) return x / (x + y);
      // both underflowed (only possible for tiny shapes); retry
    }
  }

  // Poisson: Knuth product method for small means, Hormann's transformed
  // rejection with squeeze (PTRS) otherwise.
  std::uint64_t poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
    if (mean == 0.0) return 0;
    if (mean < 10.0) {
      const double limit = std::exp(-mean);
      std::uint64_t k = 0;
      double prod = uniform();
      while (prod > limit) {
        ++k;
        prod *= uniform();
      }
      return k;
    }
    const double log_mean = std::log(mean);
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
      const double u = uniform() - 0.5;
      const double v = uniform();
      const double us = 0.5 - std::abs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= v_r && kf >= 0.0) return static_cast<std::uint64_t>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
      const double rhs = -mean + kf * log_mean - std::lgamma(kf + 1.0);
      if (lhs <= rhs) return static_cast<std::uint64_t>(kf);
    }
  }

  // Exact Binomial(n, p) by recursive beta splitting on the median order
  // statistic; O(log n) beta draws, direct Bernoulli below the cutoff.
  std::uint64_t binomial(std::uint64_t n, double p) {
    if (std::isnan(p) || p < 0.0 || p > 1.0)
      throw std::invalid_argument("binomial: p must be in [0,1]");
    std::uint64_t count = 0;
    while (n > 64) {
      if (p <= 0.0) return count;
      if (p >= 1.0) return count + n;
      const std::uint64_t i = (n + 1) / 2;
      const double v = beta(static_cast<double>(i), static_cast<double>(n + 1 - i));
      if (v <= p) {
        count += i;
        n -= i;
        p = (p - v) / (1.0 - v);
      } else {
        n = i - 1;
        p = p / v;
      }
    }
    for (std::uint64_t j = 0; j < n; ++j)
      if (uniform() < p) ++count;
    return count;
  }

  static constexpr double kPi = 3.14159265358979323846;

private:
  std::uint64_t base_seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_index_ = 0;
  std::array<std::uint64_t, 4> buffer_{};
  int buffer_pos_ = 4;
};

// Clamps a beta draw into the open unit interval; downstream geometric
// weights require lambda strictly inside (0,1).
inline double clamp_open_unit(double x) {
  constexpr double kEdge = 1e-15;
  if (x < kEdge) return kEdge;
  if (x > 1.0 - kEdge) return 1.0 - kEdge;
  return x;
}

}  // namespace ctmix
