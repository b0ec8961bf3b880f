#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ctmix/errors.hpp"
#include "ctmix/random.hpp"
#include "ctmix/weights.hpp"

namespace ctmix {

// Baseline G_0 over kernel parameters theta = (mean, variance):
// variance ~ InvGamma(alpha0, beta0), mean | variance ~ N(m0, variance/kappa0).
struct BaselineSpec {
  double m0 = 0.0;
  double kappa0 = 1.0;
  double alpha0 = 2.0;
  double beta0 = 1.0;

  void validate() const {
    if (!(kappa0 > 0.0) || !(alpha0 > 0.0) || !(beta0 > 0.0))
      throw ConfigError("BaselineSpec: kappa0, alpha0, beta0 must be > 0");
    if (!std::isfinite(m0)) throw ConfigError("BaselineSpec: m0 must be finite");
  }
};

struct Atom {
  double mean = 0.0;
  double variance = 1.0;
};

enum class KernelFamily { Normal };

// Component kernel K(y | theta). Only the univariate normal family is
// implemented; theta = (mean, variance).
struct KernelSpec {
  KernelFamily family = KernelFamily::Normal;

  double density(double y, const Atom& atom) const {
    const double z = y - atom.mean;
    return std::exp(-0.5 * z * z / atom.variance) /
           std::sqrt(2.0 * RandomStream::kPi * atom.variance);
  }

  double sample(const Atom& atom, RandomStream& rng) const {
    return atom.mean + std::sqrt(atom.variance) * rng.normal();
  }

  // sup over theta of K(y|theta) is unbounded for the normal family
  // (variance can be arbitrarily small), so a truncation bound for
  // mixture_density is only available when tail_mass is zero.
  bool has_finite_sup() const { return false; }
};

// Lazily materialized atoms theta_1, theta_2, ... drawn i.i.d. from the
// baseline on first use; an atom, once drawn, is immutable for the life of
// the realization. Shared across all times within one realization.
class AtomStore {
public:
  AtomStore(const BaselineSpec& baseline, RandomStream rng)
      : baseline_(baseline), rng_(std::move(rng)) {
    baseline_.validate();
  }

  const Atom& at(ComponentIndex j) {
    if (j < 1) throw std::invalid_argument("AtomStore: index must be >= 1");
    while (atoms_.size() < j) atoms_.push_back(draw());
    return atoms_[j - 1];
  }

  std::size_t materialized() const { return atoms_.size(); }
  const BaselineSpec& baseline() const { return baseline_; }

private:
  Atom draw() {
    const double variance = baseline_.beta0 / rng_.gamma(baseline_.alpha0);
    const double mean =
        baseline_.m0 + std::sqrt(variance / baseline_.kappa0) * rng_.normal();
    return Atom{mean, variance};
  }

  BaselineSpec baseline_;
  RandomStream rng_;
  std::vector<Atom> atoms_;
};

struct DensityResult {
  double value = 0.0;
  double tail_bound = 0.0;
  // False when the kernel family has no finite sup and tail mass is nonzero;
  // the truncation error is then unbounded.
  bool bound_available = true;
};

// f(y|t) = sum_j w_j K(y | theta_j), with the tail contribution bounded by
// tail_mass * sup_theta K when the family admits a finite sup.
inline DensityResult mixture_density(const WeightVector& w, AtomStore& atoms,
                                     const KernelSpec& kernel, double y) {
  w.validate();
  double value = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j)
    value += w.weights[j] * kernel.density(y, atoms.at(j + 1));
  if (w.tail_mass == 0.0) return DensityResult{value, 0.0, true};
  if (!kernel.has_finite_sup()) return DensityResult{value, 0.0, false};
  return DensityResult{value, w.tail_mass, true};  // unreachable for Normal
}

}  // namespace ctmix
