#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctmix/errors.hpp"
#include "ctmix/expint.hpp"
#include "ctmix/random.hpp"
#include "ctmix/stats.hpp"
#include "ctmix/weights.hpp"

namespace ctmix {

// Gamma-process Levy density w(J) = mass * J^{-1} e^{-J}, truncated below at
// jump_floor so the jump set above the floor is finite on any bounded window.
struct LevySpec {
  double mass = 1.0;
  double jump_floor = 1e-4;

  void validate() const {
    if (!(mass > 0.0)) throw ConfigError("LevySpec: mass must be > 0");
    if (!(jump_floor > 0.0)) throw ConfigError("LevySpec: jump_floor must be > 0");
  }
};

struct NrmParams {
  double decay = 1.0;  // OU decay rate; also the time intensity of births
  LevySpec levy;
  // Relative tolerance for the lookback window: expected pre-window mass
  // discarded over expected total mass equals lookback_tol.
  double lookback_tol = 1e-12;

  void validate() const {
    if (!(decay > 0.0)) throw ConfigError("NrmParams: decay must be > 0");
    if (!(lookback_tol > 0.0) || !(lookback_tol < 1.0))
      throw ConfigError("NrmParams: lookback_tol must be in (0,1)");
    levy.validate();
  }

  // Births per unit time above the floor.
  double birth_rate() const { return decay * levy.mass * expint_e1(levy.jump_floor); }

  double lookback() const { return std::log(1.0 / lookback_tol) / decay; }
};

struct Jump {
  double tau = 0.0;   // birth time
  double size = 0.0;  // J > floor
};

// Poisson jumps sorted by birth time. births_min/births_max delimit where the
// set is complete above the floor; valid_min/valid_max delimit where weight
// evaluation is supported (equal to the birth window for a raw simulation,
// narrower when a lookback extension was applied).
struct JumpSet {
  std::vector<Jump> jumps;
  double births_min = 0.0;
  double births_max = 0.0;
  double valid_min = 0.0;
  double valid_max = 0.0;

  void validate() const {
    for (std::size_t i = 0; i < jumps.size(); ++i) {
      if (!(jumps[i].size > 0.0)) throw Error("JumpSet: jump size must be > 0");
      if (jumps[i].tau < births_min || jumps[i].tau > births_max)
        throw Error("JumpSet: birth time outside window");
      if (i > 0 && jumps[i].tau < jumps[i - 1].tau)
        throw Error("JumpSet: births not sorted");
    }
  }
};

// Simulates the marked Poisson process (tau, J) with intensity
// decay * w(J) dtau dJ restricted to J > floor, on exactly the given birth
// window. A zero-length window yields an empty set. Callers needing weights
// that account for the infinite past should use simulate_jumps_with_lookback.
inline JumpSet simulate_jumps(const NrmParams& params, double t_min, double t_max,
                              RandomStream& rng,
                              const TruncatedGammaTailSampler* size_sampler = nullptr) {
  params.validate();
  if (!(t_min <= t_max)) throw std::invalid_argument("simulate_jumps: t_min > t_max");
  JumpSet set;
  set.births_min = set.valid_min = t_min;
  set.births_max = set.valid_max = t_max;
  if (t_min == t_max) return set;
  const std::uint64_t count = rng.poisson(params.birth_rate() * (t_max - t_min));
  if (count == 0) return set;
  std::optional<TruncatedGammaTailSampler> local;
  if (!size_sampler) {
    local.emplace(params.levy.jump_floor);
    size_sampler = &*local;
  }
  set.jumps.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i)
    set.jumps.push_back(Jump{rng.uniform(t_min, t_max), size_sampler->sample(rng)});
  std::sort(set.jumps.begin(), set.jumps.end(),
            [](const Jump& a, const Jump& b) { return a.tau < b.tau; });
  return set;
}

// Extends the birth window backward by ln(1/lookback_tol)/decay so that the
// expected mass discarded from the pre-window past is lookback_tol of the
// expected total; weights are then valid on [t_min, t_max].
inline JumpSet simulate_jumps_with_lookback(
    const NrmParams& params, double t_min, double t_max, RandomStream& rng,
    const TruncatedGammaTailSampler* size_sampler = nullptr) {
  JumpSet set =
      simulate_jumps(params, t_min - params.lookback(), t_max, rng, size_sampler);
  set.valid_min = t_min;
  set.valid_max = t_max;
  return set;
}

namespace detail {

// Decay-factored unnormalized masses: u_j(t) = s_j * e^{-decay (t - tau_ref)}
// with s_j = J_j e^{decay (tau_j - tau_ref)} and tau_ref the last birth in the
// set. The right factor is common to all active jumps and cancels in
// normalization, so normalized weights depend on t only through the active
// set — weight vectors at two times with the same active set are bitwise
// identical.
inline std::vector<double> scaled_masses(const JumpSet& set, double decay) {
  std::vector<double> s(set.jumps.size());
  const double tau_ref = set.jumps.empty() ? 0.0 : set.jumps.back().tau;
  for (std::size_t i = 0; i < set.jumps.size(); ++i)
    s[i] = set.jumps[i].size * std::exp(decay * (set.jumps[i].tau - tau_ref));
  return s;
}

// Index of the first jump with tau > t (jumps before it are active at t).
inline std::size_t active_count(const JumpSet& set, double t) {
  const auto it = std::upper_bound(
      set.jumps.begin(), set.jumps.end(), t,
      [](double value, const Jump& j) { return value < j.tau; });
  return static_cast<std::size_t>(it - set.jumps.begin());
}

inline void check_in_window(const JumpSet& set, double t, const char* where) {
  if (t < set.valid_min || t > set.valid_max)
    throw std::invalid_argument(std::string(where) + ": t outside the valid window");
}

}  // namespace detail

// Unnormalized total mass sum_j 1(tau_j <= t) e^{-decay (t - tau_j)} J_j; the
// finiteness condition of the weight construction (positive and finite for
// every generated set with at least one active jump).
inline double nrm_total_mass(const JumpSet& set, double t, double decay) {
  detail::check_in_window(set, t, "nrm_total_mass");
  double total = 0.0;
  const std::size_t n = detail::active_count(set, t);
  for (std::size_t i = 0; i < n; ++i)
    total += set.jumps[i].size * std::exp(-decay * (t - set.jumps[i].tau));
  return total;
}

// Normalized weights at time t: the K largest masses, emitted in birth
// order, remainder in tail_mass. Indices of the returned vector do not
// align across times when the active set changes; pathwise D(h) therefore
// uses nrm_overlap, which works over the shared jump index set.
inline WeightVector nrm_weights(const JumpSet& set, double t, double decay,
                                std::uint64_t K) {
  if (!(decay > 0.0)) throw std::invalid_argument("nrm_weights: decay must be > 0");
  if (K < 1) throw std::invalid_argument("nrm_weights: K must be >= 1");
  detail::check_in_window(set, t, "nrm_weights");
  const std::size_t n_active = detail::active_count(set, t);
  if (n_active == 0)
    throw NoActiveJumpError("nrm_weights: no jump with tau <= t; weights undefined");
  const std::vector<double> s = detail::scaled_masses(set, decay);
  std::vector<std::size_t> order(n_active);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t k = std::min<std::size_t>(K, n_active);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                    order.end(), [&s](std::size_t a, std::size_t b) {
                      return s[a] != s[b] ? s[a] > s[b] : a < b;
                    });
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  double total = 0.0;
  for (std::size_t i = 0; i < n_active; ++i) total += s[i];
  if (!(total > 0.0) || !std::isfinite(total))
    throw Error("nrm_weights: degenerate total mass");
  WeightVector w;
  w.weights.resize(k);
  double selected = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    w.weights[i] = s[order[i]] / total;
    selected += w.weights[i];
  }
  w.tail_mass = std::max(0.0, 1.0 - selected);
  return w;
}

// Pathwise D(h) over the shared jump index set, exact in the jumps:
// D = sum_{tau_j <= t} w_j(t) w_j(t+h). Deterministic given the JumpSet.
inline double nrm_overlap(const JumpSet& set, double t, double h, double decay) {
  if (!(h >= 0.0)) throw std::invalid_argument("nrm_overlap: h must be >= 0");
  detail::check_in_window(set, t, "nrm_overlap");
  detail::check_in_window(set, t + h, "nrm_overlap");
  const std::size_t n_t = detail::active_count(set, t);
  const std::size_t n_th = detail::active_count(set, t + h);
  if (n_t == 0 || n_th == 0)
    throw NoActiveJumpError("nrm_overlap: no active jump at evaluation time");
  const std::vector<double> s = detail::scaled_masses(set, decay);
  double total_t = 0.0;
  double total_th = 0.0;
  double cross = 0.0;
  for (std::size_t i = 0; i < n_th; ++i) total_th += s[i];
  for (std::size_t i = 0; i < n_t; ++i) {
    total_t += s[i];
    cross += s[i] * s[i];
  }
  return cross / (total_t * total_th);
}

struct NrmOverlapDiagnostics {
  std::uint64_t resampled_replicates = 0;  // replicates that hit an empty active set
};

// Monte Carlo E{D(h)} over independent jump sets; replicate i uses
// stream_id = stream_offset + i. Replicates whose active set at t is empty
// are resampled within their own stream and counted.
inline OverlapEstimate estimate_expected_overlap_nrm(
    const NrmParams& params, double t, double h, std::uint64_t n_reps,
    std::uint64_t base_seed, std::uint64_t stream_offset = 0,
    NrmOverlapDiagnostics* diagnostics = nullptr) {
  params.validate();
  if (n_reps < 100)
    throw std::invalid_argument("estimate_expected_overlap_nrm: n_reps must be >= 100");
  if (!(h >= 0.0)) throw std::invalid_argument("estimate_expected_overlap_nrm: h < 0");
  const TruncatedGammaTailSampler sizes(params.levy.jump_floor);
  std::vector<double> values(n_reps);
  std::uint64_t resampled = 0;
  for (std::uint64_t i = 0; i < n_reps; ++i) {
    RandomStream rng(base_seed, stream_offset + i);
    for (;;) {
      const JumpSet set = simulate_jumps_with_lookback(params, t, t + h, rng, &sizes);
      if (detail::active_count(set, t) > 0) {
        values[i] = nrm_overlap(set, t, h, params.decay);
        break;
      }
      ++resampled;
    }
  }
  if (diagnostics) diagnostics->resampled_replicates = resampled;
  return summarize_replicates(values, h);
}

}  // namespace ctmix
