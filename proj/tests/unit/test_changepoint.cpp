#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ctmix/changepoint.hpp"
#include "ctmix/stats.hpp"
#include "ctmix/weights.hpp"

using namespace ctmix;

TEST_CASE("partition sampling") {
  SECTION("count in (0, horizon] is Poisson(rate * horizon)") {
    const int reps = 10000;
    double acc = 0.0;
    for (int i = 0; i < reps; ++i) {
      RandomStream rng(101, static_cast<std::uint64_t>(i));
      const auto p = Partition::sample(1.0, 10.0, rng);
      p.validate();
      double count = 0.0;
      for (double tau : p.taus())
        if (tau <= 10.0) count += 1.0;
      acc += count;
    }
    REQUIRE(std::abs(acc / reps - 10.0) < 4.0 * std::sqrt(10.0 / reps));
  }

  SECTION("tiny horizon materializes exactly one change point") {
    RandomStream rng(101, 99999);
    const auto p = Partition::sample(1.0, 1e-12, rng);
    REQUIRE(p.taus().size() == 1);
    REQUIRE(p.taus()[0] >= 1e-12);
  }

  SECTION("rate two halves the mean gap") {
    const int reps = 20000;
    double acc = 0.0;
    double count = 0.0;
    for (int i = 0; i < reps; ++i) {
      RandomStream rng(102, static_cast<std::uint64_t>(i));
      const auto p = Partition::sample(2.0, 5.0, rng);
      double prev = 0.0;
      for (double tau : p.taus()) {
        acc += tau - prev;
        count += 1.0;
        prev = tau;
      }
    }
    REQUIRE(std::abs(acc / count - 0.5) < 4.0 * 0.5 / std::sqrt(count));
  }

  SECTION("extension preserves validity and covers the new horizon") {
    RandomStream rng(103, 0);
    auto p = Partition::sample(1.0, 2.0, rng);
    const auto before = p.taus();
    p.extend(30.0, 1.0, rng);
    p.validate();
    REQUIRE(p.horizon() == 30.0);
    for (std::size_t i = 0; i < before.size(); ++i) REQUIRE(p.taus()[i] == before[i]);
  }
}

TEST_CASE("locate uses half-open intervals (tau_{j-1}, tau_j]") {
  const Partition p({1.0, 2.0, 3.0}, 3.0);
  REQUIRE(p.locate(0.5) == 1);
  REQUIRE(p.locate(1.0) == 1);  // boundary belongs to the left interval
  REQUIRE(p.locate(1.000001) == 2);
  REQUIRE(p.locate(3.0) == 3);
  REQUIRE_THROWS_AS(p.locate(3.5), HorizonError);
  REQUIRE_THROWS_AS(p.locate(0.0), std::invalid_argument);
}

TEST_CASE("indicator weights") {
  const Partition p({1.0, 2.0}, 2.0);
  SECTION("first interval") {
    const auto w = indicator_weights(p, 0.5, 3);
    REQUIRE(w.weights == std::vector<double>{1.0, 0.0, 0.0});
    REQUIRE(w.tail_mass == 0.0);
    REQUIRE_NOTHROW(w.validate());
  }
  SECTION("second interval") {
    const auto w = indicator_weights(p, 1.5, 3);
    REQUIRE(w.weights == std::vector<double>{0.0, 1.0, 0.0});
    REQUIRE(w.tail_mass == 0.0);
  }
  SECTION("index beyond K is flagged wholly in the tail") {
    const Partition fine({0.1, 0.2, 0.3, 0.4, 1.0}, 1.0);
    const auto w = indicator_weights(fine, 0.45, 3);  // locate = 5 > K = 3
    REQUIRE(w.weights == std::vector<double>{0.0, 0.0, 0.0});
    REQUIRE(w.tail_mass == 1.0);
  }
}

TEST_CASE("exact overlap") {
  SECTION("h = 0 is always 1") {
    const Partition p({1.0}, 1.0);
    REQUIRE(overlap_exact(p, 0.5, 0.0) == 1);
  }
  SECTION("a change point inside (t, t+h] kills the overlap") {
    const Partition p({1.0, 5.0}, 5.0);
    REQUIRE(overlap_exact(p, 0.5, 1.0) == 0);
    REQUIRE(overlap_exact(p, 1.5, 1.0) == 1);
  }
  SECTION("empirical law is Bernoulli(e^{-h}) at rate 1") {
    const int n = 100000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      RandomStream rng(104, static_cast<std::uint64_t>(i));
      const auto p = Partition::sample(1.0, 2.1, rng);
      acc += overlap_exact(p, 2.0, 0.1);
    }
    const double target = 0.90483741803595957;
    const double se = std::sqrt(target * (1.0 - target) / n);
    REQUIRE(std::abs(acc / n - target) < 4.0 * se);
  }
}

TEST_CASE("same-component probability") {
  REQUIRE(same_component_prob(1.0, 0.0) == 1.0);
  REQUIRE(same_component_prob(1.0, 0.1) ==
          Catch::Approx(0.90483741803595957).epsilon(1e-14));
  REQUIRE(same_component_prob(2.0, 0.5) ==
          Catch::Approx(0.36787944117144233).epsilon(1e-14));
  // key property numerically: h -> 0 drives the probability to 1
  REQUIRE(same_component_prob(1.0, 1e-6) > 1.0 - 2e-6);

  SECTION("monte carlo confirmation at rate 2, h = 0.5") {
    const int n = 100000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      RandomStream rng(105, static_cast<std::uint64_t>(i));
      const auto p = Partition::sample(2.0, 1.6, rng);
      acc += overlap_exact(p, 1.0, 0.5);
    }
    const double target = same_component_prob(2.0, 0.5);
    const double se = std::sqrt(target * (1.0 - target) / n);
    REQUIRE(std::abs(acc / n - target) < 4.0 * se);
  }
}

TEST_CASE("memorylessness of the first change point after a fixed time") {
  const double rate = 1.3;
  const double t = 3.0;
  const int n = 10000;
  std::vector<double> gaps(n);
  for (int i = 0; i < n; ++i) {
    RandomStream rng(106, static_cast<std::uint64_t>(i));
    const auto p = Partition::sample(rate, t, rng);
    gaps[i] = p.taus().back() - t;  // first tau past t, by construction
  }
  const double d = ks_statistic(gaps, [rate](double x) { return -std::expm1(-rate * x); });
  REQUIRE(ks_p_value(d, n) > 1e-3);
}

TEST_CASE("indicator-weight overlap and sup-difference agree with the exact law") {
  for (int i = 0; i < 2000; ++i) {
    RandomStream rng(107, static_cast<std::uint64_t>(i));
    const auto p = Partition::sample(1.0, 1.6, rng);
    const double t = 1.0;
    const double h = 0.5;
    const auto k = std::max(p.locate(t), p.locate(t + h));
    const auto w_t = indicator_weights(p, t, k);
    const auto w_th = indicator_weights(p, t + h, k);
    const int exact = overlap_exact(p, t, h);
    const auto generic = overlap_statistic(w_t, w_th);
    REQUIRE(generic.value == static_cast<double>(exact));
    REQUIRE(generic.truncation_bound == 0.0);
    const auto sup = sup_weight_diff(w_t, w_th);
    REQUIRE(sup.value == static_cast<double>(1 - exact));
  }
}

TEST_CASE("data generation") {
  BaselineSpec base;
  KernelSpec kernel;

  SECTION("single-segment sample matches its atom's moments") {
    const Partition p({100.0}, 50.0);
    AtomStore atoms(base, RandomStream(108, 0));
    RandomStream rng(108, 1);
    std::vector<double> times(10000);
    for (std::size_t i = 0; i < times.size(); ++i)
      times[i] = static_cast<double>(i + 1) * 50.0 / static_cast<double>(times.size());
    const auto data = generate_data(p, atoms, kernel, times, rng);
    REQUIRE(data.size() == times.size());
    REQUIRE(atoms.materialized() == 1);
    const auto& atom = atoms.at(1);
    double mean = 0.0;
    for (double y : data.y) mean += y;
    mean /= static_cast<double>(data.size());
    double var = 0.0;
    for (double y : data.y) var += (y - mean) * (y - mean);
    var /= static_cast<double>(data.size() - 1);
    const double n = static_cast<double>(data.size());
    REQUIRE(std::abs(mean - atom.mean) < 4.0 * std::sqrt(atom.variance / n));
    REQUIRE(std::abs(var - atom.variance) < 4.0 * atom.variance * std::sqrt(2.0 / n));
  }

  SECTION("two segments draw from their own atoms") {
    const Partition p({5.0, 20.0}, 10.0);
    AtomStore atoms(base, RandomStream(109, 0));
    RandomStream rng(109, 1);
    std::vector<double> times;
    for (int i = 1; i <= 100; ++i) times.push_back(0.1 * i);
    const auto data = generate_data(p, atoms, kernel, times, rng);
    REQUIRE(atoms.materialized() == 2);
    double m1 = 0.0, m2 = 0.0;
    int n1 = 0, n2 = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.t[i] <= 5.0) {
        m1 += data.y[i];
        ++n1;
      } else {
        m2 += data.y[i];
        ++n2;
      }
    }
    m1 /= n1;
    m2 /= n2;
    REQUIRE(std::abs(m1 - atoms.at(1).mean) <
            4.0 * std::sqrt(atoms.at(1).variance / n1));
    REQUIRE(std::abs(m2 - atoms.at(2).mean) <
            4.0 * std::sqrt(atoms.at(2).variance / n2));
  }

  SECTION("empty time grid is rejected") {
    const Partition p({1.0}, 1.0);
    AtomStore atoms(base, RandomStream(110, 0));
    RandomStream rng(110, 1);
    REQUIRE_THROWS_AS(generate_data(p, atoms, kernel, std::vector<double>{}, rng),
                      std::invalid_argument);
  }
}
