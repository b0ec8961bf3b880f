#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctmix/errors.hpp"
#include "ctmix/random.hpp"
#include "ctmix/stats.hpp"

namespace ctmix {

// Mixture component label, 1-based.
using ComponentIndex = std::uint64_t;

// Truncated realization of mixture weights {w_j} with the dropped mass kept
// explicit: sum(weights) + tail_mass == 1 within kNormTol. Truncation is never
// silent; every approximate quantity derived from a WeightVector carries a
// bound computed from tail_mass.
struct WeightVector {
  std::vector<double> weights;
  double tail_mass = 0.0;

  static constexpr double kNormTol = 1e-12;

  std::size_t size() const { return weights.size(); }

  void validate() const {
    for (double w : weights)
      if (!(w >= 0.0) || w > 1.0) throw Error("WeightVector: weight outside [0,1]");
    if (!(tail_mass >= 0.0) || tail_mass > 1.0)
      throw Error("WeightVector: tail_mass outside [0,1]");
    const double total = kahan_sum(weights) + tail_mass;
    if (std::abs(total - 1.0) > kNormTol)
      throw Error("WeightVector: weights + tail_mass = " + std::to_string(total) +
                  ", not 1 within tolerance");
  }
};

struct OverlapResult {
  double value = 0.0;
  // D lies in [value, value + truncation_bound].
  double truncation_bound = 0.0;
};

namespace detail {

// Index alignment for two truncated vectors: lengths may differ only when the
// shorter vector has no unresolved tail (its missing entries are exactly 0).
inline void check_alignment(const WeightVector& a, const WeightVector& b) {
  if (a.size() == b.size()) return;
  const WeightVector& shorter = a.size() < b.size() ? a : b;
  if (shorter.tail_mass != 0.0)
    throw AlignmentError(
        "weight vectors have different truncation lengths and the shorter one "
        "carries tail mass; indices cannot be aligned");
}

}  // namespace detail

// D(h) = sum_j w_j(t) w_j(t+h) over the shared truncation, plus an upper bound
// on the dropped part: the tail contribution is at most min of the tail
// masses, so D in [value, value + truncation_bound].
inline OverlapResult overlap_statistic(const WeightVector& w_t, const WeightVector& w_th) {
  w_t.validate();
  w_th.validate();
  detail::check_alignment(w_t, w_th);
  const std::size_t k = std::min(w_t.size(), w_th.size());
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) sum += w_t.weights[j] * w_th.weights[j];
  return OverlapResult{sum, std::min(w_t.tail_mass, w_th.tail_mass)};
}

struct SupDiffResult {
  double value = 0.0;
  // True sup_j |difference| lies in [value, value + uncertainty].
  double uncertainty = 0.0;
};

// sup_j |w_j(t+h) - w_j(t)| over the materialized indices; indices hidden in
// either tail contribute at most max(tail_mass) of additional difference.
inline SupDiffResult sup_weight_diff(const WeightVector& w_t, const WeightVector& w_th) {
  w_t.validate();
  w_th.validate();
  detail::check_alignment(w_t, w_th);
  const std::size_t k = std::max(w_t.size(), w_th.size());
  double sup = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double a = j < w_t.size() ? w_t.weights[j] : 0.0;
    const double b = j < w_th.size() ? w_th.weights[j] : 0.0;
    sup = std::max(sup, std::abs(b - a));
  }
  return SupDiffResult{sup, std::max(w_t.tail_mass, w_th.tail_mass)};
}

using TailRule = std::function<ComponentIndex(RandomStream&)>;

// Draws j with probability w_j. Selecting the tail invokes the extension rule;
// without one the truncation is unresolvable and an error is thrown. Models
// with exact inverse-CDF sampling (geometric) bypass truncation entirely via
// their own samplers.
inline ComponentIndex sample_component(const WeightVector& w, RandomStream& rng,
                                       const TailRule& tail_rule = {}) {
  w.validate();
  const double u = rng.uniform();
  double cum = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    cum += w.weights[j];
    if (u < cum) return j + 1;
  }
  if (tail_rule) return tail_rule(rng);
  throw TruncationError("sample_component: tail selected and no extension rule supplied");
}

}  // namespace ctmix
