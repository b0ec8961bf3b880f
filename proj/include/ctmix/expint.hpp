#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "ctmix/random.hpp"

namespace ctmix {

// Exponential integral E1(x) = int_x^inf e^{-u}/u du, x > 0.
// Power series for x <= 1, modified-Lentz continued fraction beyond.
inline double expint_e1(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("expint_e1: x must be > 0");
  constexpr double kEulerGamma = 0.57721566490153286061;
  if (x <= 1.0) {
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k <= 60; ++k) {
      term *= -x / static_cast<double>(k);
      const double contrib = -term / static_cast<double>(k);
      sum += contrib;
      if (std::abs(contrib) < 1e-18 * std::abs(sum)) break;
    }
    return -kEulerGamma - std::log(x) + sum;
  }
  constexpr double kTiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 200; ++i) {
    const double an = -static_cast<double>(i) * static_cast<double>(i);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x);
}

// Samples from the normalized restriction of the gamma-process Levy density
// J^{-1} e^{-J} to [floor, inf): cdf F(x) = 1 - E1(x)/E1(floor). Inversion by
// a pre-tabulated bracket grid plus Newton steps on E1 (E1'(x) = -e^{-x}/x).
class TruncatedGammaTailSampler {
public:
  explicit TruncatedGammaTailSampler(double floor, std::size_t grid_size = 512)
      : floor_(floor) {
    if (!(floor > 0.0))
      throw std::invalid_argument("TruncatedGammaTailSampler: floor must be > 0");
    e1_floor_ = expint_e1(floor);
    // log-spaced abscissae out to where the tail mass is negligible
    const double x_max = std::max(64.0, floor + 64.0);
    grid_x_.resize(grid_size);
    grid_e1_.resize(grid_size);
    const double lf = std::log(floor);
    const double lm = std::log(x_max);
    for (std::size_t i = 0; i < grid_size; ++i) {
      const double frac = static_cast<double>(i) / static_cast<double>(grid_size - 1);
      grid_x_[i] = std::exp(lf + frac * (lm - lf));
      grid_e1_[i] = expint_e1(grid_x_[i]);
    }
  }

  double floor() const { return floor_; }
  double tail_integral() const { return e1_floor_; }  // E1(floor)

  // Inverse CDF at u in [0,1).
  double invert(double u) const {
    const double target = (1.0 - u) * e1_floor_;  // solve E1(x) = target
    if (target >= grid_e1_.front()) return floor_;
    // E1 decreases along the grid; find bracket by binary search
    std::size_t lo = 0;
    std::size_t hi = grid_e1_.size() - 1;
    if (target <= grid_e1_[hi]) {
      lo = hi - 1;
    } else {
      while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (grid_e1_[mid] >= target ? lo : hi) = mid;
      }
    }
    double x = 0.5 * (grid_x_[lo] + grid_x_[hi]);
    double bracket_lo = grid_x_[lo];
    double bracket_hi = std::max(grid_x_[hi], 800.0);  // beyond last knot: E1 < 1e-30
    for (int iter = 0; iter < 60; ++iter) {
      const double f = expint_e1(x) - target;
      if (f > 0.0)
        bracket_lo = x;
      else
        bracket_hi = x;
      const double deriv = -std::exp(-x) / x;
      double next = x - f / deriv;
      if (!(next > bracket_lo) || !(next < bracket_hi)) next = 0.5 * (bracket_lo + bracket_hi);
      if (std::abs(next - x) <= 1e-14 * x) return next;
      x = next;
    }
    return x;
  }

  double sample(RandomStream& rng) const { return invert(rng.uniform()); }

private:
  double floor_;
  double e1_floor_;
  std::vector<double> grid_x_;
  std::vector<double> grid_e1_;
};

}  // namespace ctmix
