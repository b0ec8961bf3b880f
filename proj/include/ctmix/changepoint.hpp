#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "ctmix/errors.hpp"
#include "ctmix/mixture.hpp"
#include "ctmix/random.hpp"
#include "ctmix/weights.hpp"

namespace ctmix {

// Random partition of (0, infinity) into half-open intervals
// A_j = (tau_{j-1}, tau_j] with tau_0 = 0 and i.i.d. exponential gaps.
// Materialized lazily up to a horizon and extendable on demand.
class Partition {
public:
  Partition(std::vector<double> taus, double horizon)
      : taus_(std::move(taus)), horizon_(horizon) {
    validate();
  }

  static Partition sample(double rate, double horizon, RandomStream& rng) {
    if (!(rate > 0.0)) throw ConfigError("Partition::sample: rate must be > 0");
    if (!(horizon > 0.0)) throw std::invalid_argument("Partition::sample: horizon must be > 0");
    std::vector<double> taus;
    double tau = 0.0;
    do {
      tau += rng.exponential(rate);
      taus.push_back(tau);
    } while (tau < horizon);
    return Partition(std::move(taus), horizon);
  }

  // Appends exponential gaps until the new horizon is covered.
  void extend(double new_horizon, double rate, RandomStream& rng) {
    if (!(rate > 0.0)) throw ConfigError("Partition::extend: rate must be > 0");
    if (new_horizon <= horizon_) return;
    double tau = taus_.back();
    while (tau < new_horizon) {
      tau += rng.exponential(rate);
      taus_.push_back(tau);
    }
    horizon_ = new_horizon;
  }

  // The unique j with tau_{j-1} < t <= tau_j (boundaries belong to the left
  // interval); binary search.
  ComponentIndex locate(double t) const {
    if (!(t > 0.0)) throw std::invalid_argument("Partition::locate: t must be > 0");
    if (t > horizon_)
      throw HorizonError("Partition::locate: t beyond materialized horizon; extend first");
    const auto it = std::lower_bound(taus_.begin(), taus_.end(), t);
    return static_cast<ComponentIndex>(it - taus_.begin()) + 1;
  }

  const std::vector<double>& taus() const { return taus_; }
  double horizon() const { return horizon_; }

  void validate() const {
    if (taus_.empty()) throw Error("Partition: no change points materialized");
    double prev = 0.0;
    for (double tau : taus_) {
      if (!(tau > prev)) throw Error("Partition: taus must be strictly increasing from 0");
      prev = tau;
    }
    if (taus_.back() < horizon_) throw Error("Partition: horizon not covered");
  }

private:
  std::vector<double> taus_;
  double horizon_;
};

// Indicator weights w_j = 1(t in A_j). If the located index exceeds K the
// whole mass sits in the tail (tail_mass == 1 flags the truncation).
inline WeightVector indicator_weights(const Partition& partition, double t,
                                      std::uint64_t K) {
  if (K < 1) throw std::invalid_argument("indicator_weights: K must be >= 1");
  const ComponentIndex j = partition.locate(t);
  WeightVector w;
  w.weights.assign(K, 0.0);
  if (j <= K)
    w.weights[j - 1] = 1.0;
  else
    w.tail_mass = 1.0;
  return w;
}

// D(h) for indicator weights: 1 iff no change point falls in (t, t+h].
inline int overlap_exact(const Partition& partition, double t, double h) {
  if (!(h >= 0.0)) throw std::invalid_argument("overlap_exact: h must be >= 0");
  if (h == 0.0) {
    partition.locate(t);  // validates t
    return 1;
  }
  return partition.locate(t) == partition.locate(t + h) ? 1 : 0;
}

// P{D(h) = 1} = e^{-rate h}, independent of t by memorylessness of the gaps.
inline double same_component_prob(double rate, double h) {
  if (!(rate > 0.0)) throw ConfigError("same_component_prob: rate must be > 0");
  if (!(h >= 0.0)) throw std::invalid_argument("same_component_prob: h must be >= 0");
  return std::exp(-rate * h);
}

// Observations (t_i, y_i) with strictly increasing times.
struct Dataset {
  std::vector<double> t;
  std::vector<double> y;

  std::size_t size() const { return t.size(); }

  void validate() const {
    if (t.size() != y.size()) throw DataError("Dataset: t/y length mismatch");
    if (t.empty()) throw DataError("Dataset: empty");
    double prev = -std::numeric_limits<double>::infinity();
    for (double ti : t) {
      if (!std::isfinite(ti) || !(ti > prev))
        throw DataError("Dataset: times must be finite and strictly increasing");
      prev = ti;
    }
    for (double yi : y)
      if (!std::isfinite(yi)) throw DataError("Dataset: non-finite observation");
  }
};

// y_i ~ K(. | theta_{z(t_i)}) with atoms drawn lazily from the baseline on
// first use of each segment index.
inline Dataset generate_data(const Partition& partition, AtomStore& atoms,
                             const KernelSpec& kernel, std::span<const double> times,
                             RandomStream& rng) {
  if (times.empty()) throw std::invalid_argument("generate_data: empty times");
  Dataset data;
  data.t.reserve(times.size());
  data.y.reserve(times.size());
  for (double t : times) {
    const ComponentIndex j = partition.locate(t);
    data.t.push_back(t);
    data.y.push_back(kernel.sample(atoms.at(j), rng));
  }
  data.validate();
  return data;
}

}  // namespace ctmix
