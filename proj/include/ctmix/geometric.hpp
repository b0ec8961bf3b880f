#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "ctmix/errors.hpp"
#include "ctmix/random.hpp"
#include "ctmix/weights.hpp"

namespace ctmix {

// Wright-Fisher diffusion lambda_t with Beta(a,b) stationary law; c scales
// time in the transition mechanism (only c > 0 is assumed).
struct DiffusionParams {
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;

  void validate() const {
    if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0))
      throw ConfigError("DiffusionParams: a, b, c must be > 0");
  }
};

struct DiffusionState {
  double t = 0.0;
  double lambda = 0.5;  // strictly inside (0,1)
};

inline DiffusionState stationary_sample(const DiffusionParams& params, RandomStream& rng) {
  params.validate();
  return DiffusionState{0.0, clamp_open_unit(rng.beta(params.a, params.b))};
}

// p_h(m) = (a+b)_m e^{-mch} (1 - e^{-ch})^{a+b} / m!, evaluated in log space
// (the Pochhammer factor via log-gamma differences).
inline double jump_pmf(const DiffusionParams& params, double h, std::uint64_t m) {
  params.validate();
  if (!(h > 0.0)) throw std::invalid_argument("jump_pmf: h must be > 0");
  const double r = params.a + params.b;
  const double md = static_cast<double>(m);
  const double log_one_minus_p = std::log(-std::expm1(-params.c * h));
  const double log_p = std::lgamma(r + md) - std::lgamma(r) - std::lgamma(md + 1.0) -
                       md * params.c * h + r * log_one_minus_p;
  return std::exp(log_p);
}

// m ~ p_h: a negative binomial with size a+b and success probability e^{-ch},
// drawn exactly as a gamma-mixed Poisson.
inline std::uint64_t jump_sample(const DiffusionParams& params, double h, RandomStream& rng) {
  params.validate();
  if (!(h > 0.0)) throw std::invalid_argument("jump_sample: h must be > 0");
  const double p = std::exp(-params.c * h);
  if (p == 0.0) return 0;
  const double q = -std::expm1(-params.c * h);  // 1 - p, accurate for small ch
  const double g = rng.gamma(params.a + params.b);
  return rng.poisson(g * p / q);
}

// One exact step of the transition mechanism: m ~ p_h, k ~ Bin(m, lambda_s),
// lambda_t ~ Beta(a+k, b+m-k).
inline DiffusionState transition_sample(const DiffusionParams& params,
                                        const DiffusionState& state, double h,
                                        RandomStream& rng) {
  params.validate();
  if (!(h > 0.0)) throw std::invalid_argument("transition_sample: h must be > 0");
  if (!(state.lambda > 0.0) || !(state.lambda < 1.0))
    throw std::invalid_argument("transition_sample: lambda must be in (0,1)");
  const std::uint64_t m = jump_sample(params, h, rng);
  const std::uint64_t k = rng.binomial(m, state.lambda);
  const double lambda = clamp_open_unit(
      rng.beta(params.a + static_cast<double>(k), params.b + static_cast<double>(m - k)));
  return DiffusionState{state.t + h, lambda};
}

// w_j = lambda (1-lambda)^{j-1}, j = 1..K, tail (1-lambda)^K. Each entry is
// computed from log1p(-lambda) directly so no rounding accumulates across j.
inline WeightVector geometric_weights(double lambda, std::uint64_t K) {
  if (!(lambda > 0.0) || !(lambda < 1.0))
    throw std::invalid_argument("geometric_weights: lambda must be in (0,1)");
  if (K < 1) throw std::invalid_argument("geometric_weights: K must be >= 1");
  const double log_r = std::log1p(-lambda);
  WeightVector w;
  w.weights.resize(K);
  for (std::uint64_t j = 0; j < K; ++j)
    w.weights[j] = lambda * std::exp(static_cast<double>(j) * log_r);
  w.tail_mass = std::exp(static_cast<double>(K) * log_r);
  return w;
}

// Exact inverse-CDF draw of z ~ Geometric(lambda) on {1,2,...}; no truncation.
inline ComponentIndex sample_z_exact(double lambda, RandomStream& rng) {
  if (!(lambda > 0.0) || !(lambda < 1.0))
    throw std::invalid_argument("sample_z_exact: lambda must be in (0,1)");
  const double u = rng.uniform_open();
  const double j = std::floor(std::log(u) / std::log1p(-lambda));
  return 1 + static_cast<ComponentIndex>(j);
}

// D(h) for geometric weights in closed form:
//   sum_j l1 (1-l1)^{j-1} l2 (1-l2)^{j-1} = l1 l2 / (l1 + l2 - l1 l2),
// a geometric series with ratio (1-l1)(1-l2). Strictly below 1 on (0,1)^2.
inline double overlap_closed_form(double lambda1, double lambda2) {
  if (!(lambda1 > 0.0) || lambda1 > 1.0 || !(lambda2 > 0.0) || lambda2 > 1.0)
    throw std::invalid_argument("overlap_closed_form: lambdas must be in (0,1]");
  return lambda1 * lambda2 / (lambda1 + lambda2 - lambda1 * lambda2);
}

// Markov path of the diffusion along a strictly increasing grid; grid[0] is
// drawn from the stationary Beta(a,b).
inline std::vector<DiffusionState> simulate_path(const DiffusionParams& params,
                                                 std::span<const double> grid,
                                                 RandomStream& rng) {
  params.validate();
  if (grid.empty()) throw std::invalid_argument("simulate_path: empty grid");
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    if (!(grid[i] < grid[i + 1]))
      throw std::invalid_argument("simulate_path: grid must be strictly increasing");
  std::vector<DiffusionState> path;
  path.reserve(grid.size());
  DiffusionState s = stationary_sample(params, rng);
  s.t = grid[0];
  path.push_back(s);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    s = transition_sample(params, s, grid[i] - grid[i - 1], rng);
    path.push_back(s);
  }
  return path;
}

}  // namespace ctmix
