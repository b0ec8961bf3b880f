#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace ctmix {

// Monte Carlo summary of E{D(h)}: mean, standard error (sample sd / sqrt(n)),
// replicate count.
struct OverlapEstimate {
  double h = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  std::uint64_t n_reps = 0;
};

inline double kahan_sum(std::span<const double> xs) {
  double sum = 0.0;
  double carry = 0.0;
  for (double x : xs) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  return sum;
}

// Mean and standard error over replicate values, reduced in index order
// (bit-stable regardless of how the values were produced).
inline OverlapEstimate summarize_replicates(std::span<const double> values, double h) {
  if (values.empty()) throw std::invalid_argument("summarize_replicates: no values");
  const auto n = static_cast<double>(values.size());
  const double mean = kahan_sum(values) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = values.size() > 1 ? ss / (n - 1.0) : 0.0;
  return OverlapEstimate{h, mean, std::sqrt(var / n), values.size()};
}

// Standard error of the mean of an autocorrelated sequence by batch means.
inline double batch_means_std_error(std::span<const double> xs, std::size_t n_batches = 50) {
  if (xs.size() < 2 * n_batches)
    throw std::invalid_argument("batch_means_std_error: too few samples");
  const std::size_t batch = xs.size() / n_batches;
  std::vector<double> means(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * batch; i < (b + 1) * batch; ++i) s += xs[i];
    means[b] = s / static_cast<double>(batch);
  }
  double m = 0.0;
  for (double v : means) m += v;
  m /= static_cast<double>(n_batches);
  double ss = 0.0;
  for (double v : means) ss += (v - m) * (v - m);
  const double var = ss / static_cast<double>(n_batches - 1);
  return std::sqrt(var / static_cast<double>(n_batches));
}

// Quantile with linear interpolation; q in [0,1].
inline double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw std::invalid_argument("quantile: empty");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

namespace detail {

inline double gamma_p_series(double a, double x) {
  double sum = 1.0 / a;
  double del = sum;
  double ap = a;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x) {
  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
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
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

// Regularized upper incomplete gamma Q(a, x).
inline double gamma_q(double a, double x) {
  if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_contfrac(a, x);
}

// Chi-square survival function P(X^2 > x) with df degrees of freedom.
inline double chi2_sf(double x, double df) { return gamma_q(0.5 * df, 0.5 * x); }

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t df = 0;
  double p_value = 1.0;
};

// Goodness-of-fit chi-square; consecutive cells are pooled until each pooled
// cell has expected count >= 5 (remainder folds into the last cell).
inline ChiSquareResult chi_square_gof(std::span<const double> observed,
                                      std::span<const double> expected) {
  if (observed.size() != expected.size() || observed.empty())
    throw std::invalid_argument("chi_square_gof: size mismatch");
  std::vector<double> obs_m;
  std::vector<double> exp_m;
  double o_acc = 0.0;
  double e_acc = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    o_acc += observed[i];
    e_acc += expected[i];
    if (e_acc >= 5.0) {
      obs_m.push_back(o_acc);
      exp_m.push_back(e_acc);
      o_acc = e_acc = 0.0;
    }
  }
  if (e_acc > 0.0) {
    if (obs_m.empty()) {
      obs_m.push_back(o_acc);
      exp_m.push_back(e_acc);
    } else {
      obs_m.back() += o_acc;
      exp_m.back() += e_acc;
    }
  }
  if (obs_m.size() < 2) throw std::invalid_argument("chi_square_gof: too few cells");
  double stat = 0.0;
  for (std::size_t i = 0; i < obs_m.size(); ++i) {
    const double d = obs_m[i] - exp_m[i];
    stat += d * d / exp_m[i];
  }
  const std::size_t df = obs_m.size() - 1;
  return ChiSquareResult{stat, df, chi2_sf(stat, static_cast<double>(df))};
}

// Asymptotic Kolmogorov-Smirnov survival function.
inline double ks_sf(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-18) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// One-sample KS statistic against a cdf; xs need not be sorted.
template <class Cdf>
double ks_statistic(std::vector<double> xs, Cdf&& cdf) {
  if (xs.empty()) throw std::invalid_argument("ks_statistic: empty");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::max((static_cast<double>(i) + 1.0) / n - f,
                             f - static_cast<double>(i) / n));
  }
  return d;
}

inline double ks_p_value(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  return ks_sf((sn + 0.12 + 0.11 / sn) * d);
}

}  // namespace ctmix
