#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ctmix/inference.hpp"
#include "ctmix/stats.hpp"

using namespace ctmix;

namespace {

// Independent oracle: 2D quadrature of the NIG marginal for one observation,
// 1000 x 1000 Simpson points over (log-variance, mean).
double nig_predictive_quadrature(double y, const BaselineSpec& b) {
  const int ns = 1000;
  const int nm = 1000;
  const double s_lo = std::log(b.beta0) - 14.0;
  const double s_hi = std::log(b.beta0) + 16.0;
  const double hs = (s_hi - s_lo) / ns;
  const double ig_const = b.alpha0 * std::log(b.beta0) - std::lgamma(b.alpha0);
  auto inner = [&](double s) {
    const double v = std::exp(s);
    // gaussian in mu centered at (k0 m0 + y)/(k0+1), sd sqrt(v/(k0+1))
    const double center = (b.kappa0 * b.m0 + y) / (b.kappa0 + 1.0);
    const double sd = std::sqrt(v / (b.kappa0 + 1.0));
    const double lo = center - 12.0 * sd;
    const double hi = center + 12.0 * sd;
    const double hm = (hi - lo) / nm;
    auto f = [&](double mu) {
      const double z1 = (y - mu);
      const double z2 = (mu - b.m0);
      return std::exp(-0.5 * z1 * z1 / v) / std::sqrt(2.0 * RandomStream::kPi * v) *
             std::exp(-0.5 * z2 * z2 * b.kappa0 / v) /
             std::sqrt(2.0 * RandomStream::kPi * v / b.kappa0);
    };
    double acc = f(lo) + f(hi);
    for (int i = 1; i < nm; ++i) acc += f(lo + i * hm) * (i % 2 ? 4.0 : 2.0);
    const double mu_integral = acc * hm / 3.0;
    // inverse-gamma density in v times dv = v ds
    const double log_ig = ig_const - (b.alpha0 + 1.0) * s - b.beta0 / v + s;
    return mu_integral * std::exp(log_ig);
  };
  double acc = inner(s_lo) + inner(s_hi);
  for (int i = 1; i < ns; ++i) acc += inner(s_lo + i * hs) * (i % 2 ? 4.0 : 2.0);
  return acc * hs / 3.0;
}

Dataset one_changepoint_dataset(double tau, double mu1, double mu2, double sigma,
                                int n, double t_max, std::uint64_t seed) {
  RandomStream rng(seed, 0);
  Dataset data;
  for (int i = 1; i <= n; ++i) {
    const double t = t_max * static_cast<double>(i) / static_cast<double>(n);
    data.t.push_back(t);
    data.y.push_back((t <= tau ? mu1 : mu2) + sigma * rng.normal());
  }
  return data;
}

}  // namespace

TEST_CASE("segment marginal likelihood closed form") {
  const BaselineSpec unit{0.0, 1.0, 2.0, 1.0};

  SECTION("empty slice integrates to one") {
    REQUIRE(segment_marginal_loglik(std::vector<double>{}, unit, KernelSpec{}) == 0.0);
  }

  SECTION("frozen multi-observation references") {
    const std::vector<double> ys{0.3, -0.8, 1.1};
    REQUIRE(segment_marginal_loglik(ys, unit, KernelSpec{}) ==
            Catch::Approx(-4.5412300649160059).epsilon(1e-12));
    const BaselineSpec other{0.5, 2.0, 3.0, 2.5};
    const std::vector<double> ys2{2.0, 2.5};
    REQUIRE(segment_marginal_loglik(ys2, other, KernelSpec{}) ==
            Catch::Approx(-3.9748118540044432).epsilon(1e-12));
  }

  SECTION("single observation equals the predictive t density") {
    // frozen: p(0) = 0.375 exactly under NIG(0,1,2,1)
    REQUIRE(std::exp(segment_marginal_loglik(std::vector<double>{0.0}, unit, KernelSpec{})) ==
            Catch::Approx(0.375).epsilon(1e-12));
    REQUIRE(std::exp(segment_marginal_loglik(std::vector<double>{1.3}, unit, KernelSpec{})) ==
            Catch::Approx(0.15538195452212658).epsilon(1e-12));
    const BaselineSpec other{0.5, 2.0, 3.0, 2.5};
    REQUIRE(std::exp(segment_marginal_loglik(std::vector<double>{-2.7}, other, KernelSpec{})) ==
            Catch::Approx(0.016819667738336501).epsilon(1e-12));
  }

  SECTION("quadrature oracle on random slices") {
    RandomStream rng(201, 0);
    for (int rep = 0; rep < 50; ++rep) {
      const double y = rng.uniform(-4.0, 4.0);
      BaselineSpec b;
      b.m0 = rng.uniform(-1.0, 1.0);
      b.kappa0 = rng.uniform(0.5, 3.0);
      b.alpha0 = rng.uniform(1.5, 4.0);
      b.beta0 = rng.uniform(0.5, 3.0);
      const double closed =
          std::exp(segment_marginal_loglik(std::vector<double>{y}, b, KernelSpec{}));
      const double quad = nig_predictive_quadrature(y, b);
      REQUIRE(closed == Catch::Approx(quad).epsilon(1e-6));
    }
  }

  SECTION("union of slices is not the product of parts, except degenerately") {
    const std::vector<double> a{0.2, 0.4};
    const std::vector<double> b{2.2, 2.4};
    std::vector<double> both = a;
    both.insert(both.end(), b.begin(), b.end());
    const KernelSpec kernel;
    const double parts = segment_marginal_loglik(a, unit, kernel) +
                         segment_marginal_loglik(b, unit, kernel);
    const double joint = segment_marginal_loglik(both, unit, kernel);
    REQUIRE(std::abs(joint - parts) > 0.01);

    // baseline variance -> 0 pins theta: the product factorizes
    BaselineSpec tight{0.0, 1e9, 1e9, 1e9};  // variance -> beta0/alpha0 = 1, mean -> 0
    const double parts_tight = segment_marginal_loglik(a, tight, kernel) +
                               segment_marginal_loglik(b, tight, kernel);
    const double joint_tight = segment_marginal_loglik(both, tight, kernel);
    REQUIRE(joint_tight == Catch::Approx(parts_tight).margin(1e-5));
  }
}

TEST_CASE("sampler recovers synthetic structure") {
  SECTION("no change points in strong homogeneous data") {
    RandomStream gen(202, 0);
    Dataset data;
    for (int i = 1; i <= 200; ++i) {
      data.t.push_back(10.0 * i / 200.0);
      data.y.push_back(1.7 + 0.1 * gen.normal());
    }
    InferenceConfig config;
    config.baseline = BaselineSpec{0.0, 0.01, 2.0, 1.0};
    config.n_iterations = 20000;
    config.n_burnin = 2000;
    RandomStream rng(202, 1);
    const auto draws = run_sampler(data, config, rng);
    const auto summary = posterior_summary(draws);
    REQUIRE(summary.count_distribution.at(0) > 0.9);
    REQUIRE(summary.count_mode == 0);
  }

  SECTION("single change point located within half a unit") {
    const auto data = one_changepoint_dataset(5.0, 0.0, 3.0, 0.5, 100, 10.0, 203);
    InferenceConfig config;
    config.baseline = BaselineSpec{0.0, 0.01, 2.0, 0.5};
    config.n_iterations = 20000;
    config.n_burnin = 5000;
    RandomStream rng(203, 1);
    const auto draws = run_sampler(data, config, rng);
    const auto summary = posterior_summary(draws);
    REQUIRE(summary.count_mode == 1);
    REQUIRE(summary.modal_tau_medians.size() == 1);
    REQUIRE(std::abs(summary.modal_tau_medians[0] - 5.0) < 0.5);
  }

  SECTION("doubling iterations leaves the rate posterior mean stable") {
    const auto data = one_changepoint_dataset(5.0, 0.0, 3.0, 0.5, 100, 10.0, 204);
    InferenceConfig config;
    config.baseline = BaselineSpec{0.0, 0.01, 2.0, 0.5};
    config.n_burnin = 2000;
    config.n_iterations = 2000 + 10000;
    RandomStream rng1(204, 1);
    const auto d1 = run_sampler(data, config, rng1);
    config.n_iterations = 2000 + 20000;
    RandomStream rng2(204, 2);
    const auto d2 = run_sampler(data, config, rng2);
    const double m1 = summarize_replicates(d1.rate, 0).mean;
    const double m2 = summarize_replicates(d2.rate, 0).mean;
    const double se1 = batch_means_std_error(d1.rate);
    const double se2 = batch_means_std_error(d2.rate);
    REQUIRE(std::abs(m1 - m2) < 4.0 * std::sqrt(se1 * se1 + se2 * se2));
  }

  SECTION("deterministic given the stream") {
    const auto data = one_changepoint_dataset(5.0, 0.0, 3.0, 0.5, 40, 10.0, 205);
    InferenceConfig config;
    config.n_iterations = 500;
    config.n_burnin = 100;
    RandomStream r1(205, 1), r2(205, 1);
    const auto d1 = run_sampler(data, config, r1);
    const auto d2 = run_sampler(data, config, r2);
    REQUIRE(d1.rate == d2.rate);
    REQUIRE(d1.taus == d2.taus);
    REQUIRE(d1.log_posterior == d2.log_posterior);
  }

  SECTION("requires at least two observations") {
    Dataset tiny;
    tiny.t = {1.0};
    tiny.y = {0.5};
    InferenceConfig config;
    RandomStream rng(206, 0);
    REQUIRE_THROWS_AS(run_sampler(tiny, config, rng), DataError);
  }
}

TEST_CASE("prior recovery with the likelihood disabled") {
  Dataset data;
  for (int i = 1; i <= 10; ++i) {
    data.t.push_back(static_cast<double>(i));
    data.y.push_back(0.0);
  }
  InferenceConfig config;
  config.use_likelihood = false;
  config.update_rate = false;
  config.initial_rate = 1.0;
  config.n_burnin = 2000;
  config.n_iterations = 12000;  // 1e4 retained
  RandomStream rng(207, 0);
  const auto draws = run_sampler(data, config, rng);
  REQUIRE(draws.size() == 10000);
  std::vector<double> counts(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i)
    counts[i] = static_cast<double>(draws.taus[i].size());
  const double mean = summarize_replicates(counts, 0).mean;
  const double se = batch_means_std_error(counts);
  // window (0, 10] at rate 1: Poisson(10) count
  REQUIRE(std::abs(mean - 10.0) < 4.0 * se);
}

TEST_CASE("brute-force posterior equivalence on three observations") {
  // exhaustive enumeration over the four contiguous block structures of
  // {y1, y2, y3}; the sampler's induced distribution must match within
  // TV < 0.02
  Dataset data;
  data.t = {1.0, 2.0, 3.0};
  data.y = {-0.5, 0.1, 2.0};
  const double rate = 0.5;
  const BaselineSpec base{0.0, 1.0, 2.0, 1.0};
  const KernelSpec kernel;

  auto ml = [&](std::vector<double> ys) {
    return segment_marginal_loglik(ys, base, kernel);
  };
  // presence probabilities of a change point in (1,2] and (2,3]
  const double p1 = -std::expm1(-rate * 1.0);
  const double p2 = -std::expm1(-rate * 1.0);
  double post[4];
  post[0] = std::exp(ml({-0.5, 0.1, 2.0})) * (1 - p1) * (1 - p2);            // {123}
  post[1] = std::exp(ml({-0.5}) + ml({0.1, 2.0})) * p1 * (1 - p2);           // {1|23}
  post[2] = std::exp(ml({-0.5, 0.1}) + ml({2.0})) * (1 - p1) * p2;           // {12|3}
  post[3] = std::exp(ml({-0.5}) + ml({0.1}) + ml({2.0})) * p1 * p2;          // {1|2|3}
  double z = post[0] + post[1] + post[2] + post[3];
  for (double& p : post) p /= z;

  InferenceConfig config;
  config.baseline = base;
  config.update_rate = false;
  config.initial_rate = rate;
  config.n_burnin = 5000;
  config.n_iterations = 5000 + 200000;
  config.proposal_scale = 0.8;
  RandomStream rng(208, 0);
  const auto draws = run_sampler(data, config, rng);
  double freq[4] = {0, 0, 0, 0};
  for (const auto& taus : draws.taus) {
    bool c1 = false, c2 = false;
    for (double tau : taus) {
      if (tau > 1.0 && tau <= 2.0) c1 = true;
      if (tau > 2.0 && tau <= 3.0) c2 = true;
    }
    freq[(c1 ? 1 : 0) + (c2 ? 2 : 0)] += 1.0;
  }
  double tv = 0.0;
  for (int i = 0; i < 4; ++i)
    tv += std::abs(freq[i] / static_cast<double>(draws.size()) - post[i]);
  tv *= 0.5;
  REQUIRE(tv < 0.02);
}

TEST_CASE("posterior summaries") {
  SECTION("constant draws give zero-width intervals") {
    PosteriorDraws d;
    for (int i = 0; i < 10; ++i) {
      d.taus.push_back({2.0});
      d.rate.push_back(1.5);
      d.log_posterior.push_back(-3.0);
      d.segment_theta.push_back({Atom{}, Atom{}});
    }
    const auto s = posterior_summary(d);
    REQUIRE(s.rate_mean == 1.5);
    REQUIRE(s.rate_sd == 0.0);
    REQUIRE(s.rate_q05 == 1.5);
    REQUIRE(s.rate_q95 == 1.5);
    REQUIRE(s.count_mode == 1);
    REQUIRE(s.modal_tau_medians == std::vector<double>{2.0});
  }

  SECTION("two-valued rate draws average to two") {
    PosteriorDraws d;
    for (int i = 0; i < 100; ++i) {
      d.taus.push_back({});
      d.rate.push_back(i % 2 ? 1.0 : 3.0);
      d.log_posterior.push_back(0.0);
      d.segment_theta.push_back({Atom{}});
    }
    const auto s = posterior_summary(d);
    REQUIRE(s.rate_mean == Catch::Approx(2.0));
    REQUIRE(s.count_mode == 0);
  }

  SECTION("change probability profile counts hits per grid cell") {
    PosteriorDraws d;
    d.taus.push_back({0.5});
    d.taus.push_back({1.5});
    d.taus.push_back({0.6, 1.4});
    d.taus.push_back({});
    for (int i = 0; i < 4; ++i) {
      d.rate.push_back(1.0);
      d.log_posterior.push_back(0.0);
      d.segment_theta.push_back({Atom{}});
    }
    const std::vector<double> grid{0.0, 1.0};
    const auto s = posterior_summary(d, grid, 1.0);
    REQUIRE(s.change_prob.size() == 2);
    REQUIRE(s.change_prob[0] == Catch::Approx(0.5));  // draws 1 and 3 hit (0,1]
    REQUIRE(s.change_prob[1] == Catch::Approx(0.5));  // draws 2 and 3 hit (1,2]
  }

  SECTION("empty draws rejected") {
    PosteriorDraws d;
    REQUIRE_THROWS_AS(posterior_summary(d), std::invalid_argument);
  }
}
