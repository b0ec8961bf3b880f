#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "ctmix/changepoint.hpp"
#include "ctmix/errors.hpp"
#include "ctmix/mixture.hpp"
#include "ctmix/random.hpp"
#include "ctmix/stats.hpp"

namespace ctmix {

struct InferenceConfig {
  // Gamma(shape, rate) prior on the gap rate; conjugate to the change-point
  // count and window exposure.
  double rate_prior_shape = 1.0;
  double rate_prior_rate = 1.0;
  BaselineSpec baseline;
  KernelSpec kernel;
  std::uint64_t n_iterations = 20000;
  std::uint64_t n_burnin = 5000;
  double proposal_scale = 0.5;  // half-width of the uniform shift window
  double initial_rate = 1.0;
  bool update_rate = true;      // fixed-rate runs keep initial_rate
  bool use_likelihood = true;   // false: sample the prior (diagnostics)

  void validate() const {
    if (!(rate_prior_shape > 0.0) || !(rate_prior_rate > 0.0))
      throw ConfigError("InferenceConfig: rate prior hyperparameters must be > 0");
    if (n_iterations <= n_burnin)
      throw ConfigError("InferenceConfig: n_iterations must exceed n_burnin");
    if (!(proposal_scale > 0.0))
      throw ConfigError("InferenceConfig: proposal_scale must be > 0");
    if (!(initial_rate > 0.0)) throw ConfigError("InferenceConfig: initial_rate must be > 0");
    baseline.validate();
  }
};

namespace detail {

struct SegmentStats {
  double n = 0.0;
  double sum = 0.0;
  double sumsq = 0.0;
};

// log of the closed-form segment marginal likelihood under the conjugate
// normal / normal-inverse-gamma pair:
//   ML = (2pi)^{-n/2} sqrt(k0/kn) Gamma(an)/Gamma(a0) * b0^a0 / bn^an.
inline double segment_marginal_loglik_stats(const SegmentStats& s,
                                            const BaselineSpec& base) {
  if (s.n == 0.0) return 0.0;
  const double mean = s.sum / s.n;
  const double ssd = std::max(0.0, s.sumsq - s.n * mean * mean);
  const double kn = base.kappa0 + s.n;
  const double an = base.alpha0 + 0.5 * s.n;
  const double dm = mean - base.m0;
  const double bn = base.beta0 + 0.5 * ssd + 0.5 * base.kappa0 * s.n * dm * dm / kn;
  return -0.5 * s.n * std::log(2.0 * RandomStream::kPi) +
         0.5 * (std::log(base.kappa0) - std::log(kn)) + std::lgamma(an) -
         std::lgamma(base.alpha0) + base.alpha0 * std::log(base.beta0) -
         an * std::log(bn);
}

}  // namespace detail

// log integral of prod_i K(y_i | theta) over theta ~ G_0, in closed form
// (Student-t marginal). Only the conjugate normal + normal-inverse-gamma
// configuration is supported. The empty slice integrates to 1.
inline double segment_marginal_loglik(std::span<const double> y,
                                      const BaselineSpec& baseline,
                                      const KernelSpec& kernel) {
  baseline.validate();
  if (kernel.family != KernelFamily::Normal)
    throw ConfigError("segment_marginal_loglik: unsupported non-conjugate kernel family");
  detail::SegmentStats s;
  for (double yi : y) {
    s.n += 1.0;
    s.sum += yi;
    s.sumsq += yi * yi;
  }
  return detail::segment_marginal_loglik_stats(s, baseline);
}

struct PosteriorDraws {
  // one entry per retained iteration
  std::vector<std::vector<double>> taus;
  std::vector<double> rate;
  std::vector<double> log_posterior;
  std::vector<std::vector<Atom>> segment_theta;  // per segment, left to right

  double window_end = 0.0;
  std::uint64_t shift_proposed = 0, shift_accepted = 0;
  std::uint64_t birth_proposed = 0, birth_accepted = 0;
  std::uint64_t death_proposed = 0, death_accepted = 0;

  std::size_t size() const { return rate.size(); }
};

// Metropolis-within-Gibbs over change points restricted to the observed
// window (0, t_n]. By memorylessness of the exponential gaps, the restriction
// of the partition to the window is a homogeneous Poisson process with
// density rate^k e^{-rate T}, so configurations are handled as an ordered
// point set. Segment parameters are integrated out in closed form; moves are
// (i) uniform-window shift of one change point (rejected at neighbor
// crossing), (ii) birth uniform in (0,T) with acceptance
// min(1, rate*T/(k+1) * ML-ratio), (iii) matching death, (iv) conjugate
// Gamma(a0+k, b0+T) redraw of the rate.
class ChangePointSampler {
public:
  ChangePointSampler(const Dataset& data, const InferenceConfig& config)
      : config_(config), times_(data.t), values_(data.y) {
    config_.validate();
    data.validate();
    if (data.size() < 2) throw DataError("ChangePointSampler: need at least 2 observations");
    if (!(times_.front() > 0.0))
      throw DataError("ChangePointSampler: observation times must be > 0");
    window_end_ = times_.back();
    prefix_sum_.assign(times_.size() + 1, 0.0);
    prefix_sumsq_.assign(times_.size() + 1, 0.0);
    for (std::size_t i = 0; i < values_.size(); ++i) {
      prefix_sum_[i + 1] = prefix_sum_[i] + values_[i];
      prefix_sumsq_[i + 1] = prefix_sumsq_[i] + values_[i] * values_[i];
    }
  }

  PosteriorDraws run(RandomStream& rng) {
    PosteriorDraws draws;
    draws.window_end = window_end_;
    std::vector<double> cps;  // strictly increasing, inside (0, T)
    double rate = config_.initial_rate;
    for (std::uint64_t iter = 0; iter < config_.n_iterations; ++iter) {
      sweep_shifts(cps, rng, draws);
      sweep_birth_death(cps, rate, rng, draws);
      if (config_.update_rate) {
        const double shape = config_.rate_prior_shape + static_cast<double>(cps.size());
        const double rate_param = config_.rate_prior_rate + window_end_;
        rate = rng.gamma(shape) / rate_param;
      }
      if (iter >= config_.n_burnin) record(cps, rate, rng, draws);
    }
    return draws;
  }

  double window_end() const { return window_end_; }

  // Total collapsed log-likelihood of a change-point configuration.
  double config_loglik(std::span<const double> cps) const {
    if (!config_.use_likelihood) return 0.0;
    double total = 0.0;
    double left = 0.0;
    for (double cp : cps) {
      total += segment_loglik(left, cp);
      left = cp;
    }
    total += segment_loglik(left, window_end_);
    return total;
  }

private:
  // Sufficient statistics of observations with left < t_i <= right.
  detail::SegmentStats stats(double left, double right) const {
    const auto lo = static_cast<std::size_t>(
        std::upper_bound(times_.begin(), times_.end(), left) - times_.begin());
    const auto hi = static_cast<std::size_t>(
        std::upper_bound(times_.begin(), times_.end(), right) - times_.begin());
    detail::SegmentStats s;
    s.n = static_cast<double>(hi - lo);
    s.sum = prefix_sum_[hi] - prefix_sum_[lo];
    s.sumsq = prefix_sumsq_[hi] - prefix_sumsq_[lo];
    return s;
  }

  double segment_loglik(double left, double right) const {
    if (!config_.use_likelihood) return 0.0;
    return detail::segment_marginal_loglik_stats(stats(left, right), config_.baseline);
  }

  void sweep_shifts(std::vector<double>& cps, RandomStream& rng, PosteriorDraws& d) {
    for (std::size_t i = 0; i < cps.size(); ++i) {
      ++d.shift_proposed;
      const double lo = i == 0 ? 0.0 : cps[i - 1];
      const double hi = i + 1 == cps.size() ? window_end_ : cps[i + 1];
      const double prop = cps[i] + config_.proposal_scale * (2.0 * rng.uniform() - 1.0);
      if (!(prop > lo) || !(prop < hi)) continue;  // symmetric proposal, crossing rejected
      const double cur = segment_loglik(lo, cps[i]) + segment_loglik(cps[i], hi);
      const double alt = segment_loglik(lo, prop) + segment_loglik(prop, hi);
      if (std::log(rng.uniform_open()) < alt - cur) {
        cps[i] = prop;
        ++d.shift_accepted;
      }
    }
  }

  void sweep_birth_death(std::vector<double>& cps, double rate, RandomStream& rng,
                         PosteriorDraws& d) {
    const double t_total = window_end_;
    if (rng.uniform() < 0.5) {
      ++d.birth_proposed;
      const double prop = rng.uniform(0.0, t_total);
      const auto pos = std::upper_bound(cps.begin(), cps.end(), prop);
      const double lo = pos == cps.begin() ? 0.0 : *(pos - 1);
      const double hi = pos == cps.end() ? t_total : *pos;
      if (prop <= lo || prop >= hi) return;  // collision (measure zero)
      const double delta =
          segment_loglik(lo, prop) + segment_loglik(prop, hi) - segment_loglik(lo, hi);
      const double log_accept =
          std::log(rate * t_total / static_cast<double>(cps.size() + 1)) + delta;
      if (std::log(rng.uniform_open()) < log_accept) {
        cps.insert(pos, prop);
        ++d.birth_accepted;
      }
    } else {
      ++d.death_proposed;
      if (cps.empty()) return;
      const auto idx = static_cast<std::size_t>(
          std::min<double>(std::floor(rng.uniform() * static_cast<double>(cps.size())),
                           static_cast<double>(cps.size() - 1)));
      const double lo = idx == 0 ? 0.0 : cps[idx - 1];
      const double hi = idx + 1 == cps.size() ? t_total : cps[idx + 1];
      const double delta =
          segment_loglik(lo, hi) - segment_loglik(lo, cps[idx]) - segment_loglik(cps[idx], hi);
      const double log_accept =
          std::log(static_cast<double>(cps.size()) / (rate * t_total)) + delta;
      if (std::log(rng.uniform_open()) < log_accept) {
        cps.erase(cps.begin() + static_cast<std::ptrdiff_t>(idx));
        ++d.death_accepted;
      }
    }
  }

  void record(const std::vector<double>& cps, double rate, RandomStream& rng,
              PosteriorDraws& d) {
    d.taus.push_back(cps);
    d.rate.push_back(rate);
    const double k = static_cast<double>(cps.size());
    const double log_prior_rate =
        (config_.rate_prior_shape - 1.0) * std::log(rate) - config_.rate_prior_rate * rate;
    d.log_posterior.push_back(config_loglik(cps) + k * std::log(rate) -
                              rate * window_end_ + log_prior_rate);
    // conjugate per-segment theta draw given the segmentation
    std::vector<Atom> theta;
    double left = 0.0;
    for (std::size_t i = 0; i <= cps.size(); ++i) {
      const double right = i < cps.size() ? cps[i] : window_end_;
      theta.push_back(draw_theta(stats(left, right), rng));
      left = right;
    }
    d.segment_theta.push_back(std::move(theta));
  }

  Atom draw_theta(const detail::SegmentStats& s, RandomStream& rng) const {
    const BaselineSpec& b = config_.baseline;
    const double kn = b.kappa0 + s.n;
    const double an = b.alpha0 + 0.5 * s.n;
    const double mean = s.n > 0.0 ? s.sum / s.n : 0.0;
    const double ssd = s.n > 0.0 ? std::max(0.0, s.sumsq - s.n * mean * mean) : 0.0;
    const double dm = mean - b.m0;
    const double bn = b.beta0 + 0.5 * ssd +
                      (s.n > 0.0 ? 0.5 * b.kappa0 * s.n * dm * dm / kn : 0.0);
    const double mn = (b.kappa0 * b.m0 + s.sum) / kn;
    const double variance = bn / rng.gamma(an);
    return Atom{mn + std::sqrt(variance / kn) * rng.normal(), variance};
  }

  InferenceConfig config_;
  std::vector<double> times_;
  std::vector<double> values_;
  std::vector<double> prefix_sum_;
  std::vector<double> prefix_sumsq_;
  double window_end_ = 0.0;
};

inline PosteriorDraws run_sampler(const Dataset& data, const InferenceConfig& config,
                                  RandomStream& rng) {
  return ChangePointSampler(data, config).run(rng);
}

struct PosteriorSummary {
  double rate_mean = 0.0, rate_sd = 0.0, rate_q05 = 0.0, rate_q95 = 0.0;
  std::map<std::size_t, double> count_distribution;  // #change points -> probability
  std::size_t count_mode = 0;
  // medians of the sorted change points conditional on the modal count
  std::vector<double> modal_tau_medians;
  // P(at least one change point in (grid[i], grid[i]+dt]) per grid point
  std::vector<double> change_prob_grid;
  std::vector<double> change_prob;
};

inline PosteriorSummary posterior_summary(const PosteriorDraws& draws,
                                          std::span<const double> grid = {},
                                          double dt = 0.0) {
  if (draws.size() == 0) throw std::invalid_argument("posterior_summary: empty draws");
  PosteriorSummary s;
  const double n = static_cast<double>(draws.size());
  for (double r : draws.rate) s.rate_mean += r;
  s.rate_mean /= n;
  double ss = 0.0;
  for (double r : draws.rate) ss += (r - s.rate_mean) * (r - s.rate_mean);
  s.rate_sd = draws.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  s.rate_q05 = quantile(draws.rate, 0.05);
  s.rate_q95 = quantile(draws.rate, 0.95);

  std::map<std::size_t, std::size_t> counts;
  for (const auto& taus : draws.taus) ++counts[taus.size()];
  std::size_t best = 0;
  for (const auto& [k, c] : counts) {
    s.count_distribution[k] = static_cast<double>(c) / n;
    if (c > best) {
      best = c;
      s.count_mode = k;
    }
  }

  if (s.count_mode > 0) {
    std::vector<std::vector<double>> per_position(s.count_mode);
    for (const auto& taus : draws.taus)
      if (taus.size() == s.count_mode)
        for (std::size_t i = 0; i < taus.size(); ++i) per_position[i].push_back(taus[i]);
    for (auto& xs : per_position) s.modal_tau_medians.push_back(quantile(xs, 0.5));
  }

  if (!grid.empty()) {
    if (!(dt > 0.0)) throw std::invalid_argument("posterior_summary: dt must be > 0");
    s.change_prob_grid.assign(grid.begin(), grid.end());
    s.change_prob.resize(grid.size(), 0.0);
    for (const auto& taus : draws.taus)
      for (std::size_t i = 0; i < grid.size(); ++i)
        for (double tau : taus)
          if (tau > grid[i] && tau <= grid[i] + dt) {
            s.change_prob[i] += 1.0;
            break;
          }
    for (double& p : s.change_prob) p /= n;
  }
  return s;
}

}  // namespace ctmix
