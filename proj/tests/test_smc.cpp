#include <catch2/catch_amalgamated.hpp>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "espmcmc/hmm_oracle.hpp"
#include "espmcmc/kalman.hpp"
#include "espmcmc/models/discrete_hmm.hpp"
#include "espmcmc/models/linear_gaussian.hpp"
#include "espmcmc/models/stochastic_volatility.hpp"
#include "espmcmc/smc.hpp"

using namespace espmcmc;
using models::DiscreteHmm2;
using models::LinearGaussianSsm;
using models::StochasticVolatility;

TEST_CASE("categorical_sample") {
  Rng rng(1);
  std::vector<double> one{1.0};
  for (int i = 0; i < 10; ++i) REQUIRE(categorical_sample(one, rng) == 0);

  std::vector<double> point{0.0, 1.0};
  for (int i = 0; i < 10; ++i) REQUIRE(categorical_sample(point, rng) == 1);

  std::vector<double> half{0.5, 0.5};
  int n1 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) n1 += categorical_sample(half, rng);
  double freq0 = 1.0 - static_cast<double>(n1) / n;
  REQUIRE(freq0 >= 0.49);
  REQUIRE(freq0 <= 0.51);

  std::vector<double> dead{0.0, 0.0};
  REQUIRE_THROWS_AS(categorical_sample(dead, rng), DegenerateWeightsError);
  std::vector<double> negative{-0.5, 1.5};
  REQUIRE_THROWS_AS(categorical_sample(negative, rng), InputError);
}

TEST_CASE("single-particle collapse") {
  LinearGaussianSsm lg;
  Params th = LinearGaussianSsm::make_params(0.7, 1.0, 0.4, 0.0, 1.0);
  auto sim = simulate(lg, th, 12, Rng(2));
  std::vector<int> counts(12, 1);
  auto ps = run_smc(lg, th, sim.obs, counts, Rng(3));
  double manual = 0.0;
  for (int t = 0; t < 12; ++t) {
    REQUIRE(ps.W[t][0] == Catch::Approx(1.0));
    if (t > 0) REQUIRE(ps.ancestors[t - 1][0] == 0);
    manual += ps.logw[t][0];
  }
  REQUIRE(log_marginal_likelihood_estimate(ps) == Catch::Approx(manual));
}

TEST_CASE("normalization and ancestor-range invariants") {
  LinearGaussianSsm lg;
  Params th = LinearGaussianSsm::make_params(0.9, 0.7, 0.5, 0.0, 1.0);
  auto sim = simulate(lg, th, 15, Rng(4));
  std::vector<int> counts(15, 64);
  auto ps = run_smc(lg, th, sim.obs, counts, Rng(5));
  REQUIRE_NOTHROW(ps.validate());
  for (int t = 0; t < 15; ++t) {
    double s = std::accumulate(ps.W[t].begin(), ps.W[t].end(), 0.0);
    REQUIRE(std::abs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("slot exchangeability of the likelihood estimate") {
  // permuting slots (with ancestor relabeling) leaves the estimate unchanged
  // when sums are taken in a fixed order
  LinearGaussianSsm lg;
  Params th = LinearGaussianSsm::make_params(0.8, 1.0, 1.0, 0.0, 1.0);
  auto sim = simulate(lg, th, 6, Rng(6));
  std::vector<int> counts(6, 8);
  auto ps = run_smc(lg, th, sim.obs, counts, Rng(7));

  auto ps2 = ps;
  Rng prng(8);
  std::vector<std::vector<int>> perms(6);
  for (int t = 0; t < 6; ++t) {
    std::vector<int>& p = perms[t];
    p.resize(8);
    std::iota(p.begin(), p.end(), 0);
    for (int i = 7; i > 0; --i) std::swap(p[i], p[prng.uniform_int(i + 1)]);
    for (int i = 0; i < 8; ++i) {
      ps2.states[t][p[i]] = ps.states[t][i];
      ps2.logw[t][p[i]] = ps.logw[t][i];
      ps2.W[t][p[i]] = ps.W[t][i];
    }
  }
  for (int t = 1; t < 6; ++t)
    for (int i = 0; i < 8; ++i)
      ps2.ancestors[t - 1][perms[t][i]] = perms[t - 1][ps.ancestors[t - 1][i]];

  // fixed summation order: sort the per-time weights before summing
  auto estimate_sorted = [](const ParticleSystem<double>& q) {
    double total = 0.0;
    for (int t = 0; t < q.horizon(); ++t) {
      std::vector<double> w = q.logw[t];
      std::sort(w.begin(), w.end());
      total += log_sum_exp(w) - std::log(static_cast<double>(w.size()));
    }
    return total;
  };
  REQUIRE(estimate_sorted(ps) == estimate_sorted(ps2));  // bitwise
  REQUIRE_NOTHROW(ps2.validate());
}

TEST_CASE("hmm filtering matches the exact forward recursion") {
  DiscreteHmm2 hmm;
  Params th = DiscreteHmm2::make_params(0.4, 0.3, 0.8, 0.1, 0.7);
  std::vector<int> obs{1, 0, 1};
  ObservationSeries<int> y(obs);
  std::vector<int> counts(3, 512);
  auto ps = run_smc(hmm, th, y, counts, Rng(11));
  auto fb = hmm_forward_backward(hmm.oracle_spec(th), obs);
  for (int t = 0; t < 3; ++t) {
    double p1 = 0.0;
    for (int i = 0; i < 512; ++i)
      if (ps.states[t][i] == 1) p1 += ps.W[t][i];
    REQUIRE(std::abs(p1 - fb.filtered[t][1]) < 0.05);
  }
}

TEST_CASE("likelihood estimate is unbiased on the linear-gaussian model") {
  LinearGaussianSsm lg;
  Params th = LinearGaussianSsm::make_params(0.8, 0.6, 0.4, 0.0, 1.0);
  auto sim = simulate(lg, th, 20, Rng(12));
  double kal =
      kalman_filter_smoother(lg.kalman_spec(th), sim.obs.values()).loglik;

  const int reps = 2000;
  std::vector<int> counts(20, 100);
  std::vector<double> ratios(reps);
  Rng seeds(13);
  for (int rep = 0; rep < reps; ++rep) {
    auto ps = run_smc(lg, th, sim.obs, counts, seeds.substream(rep));
    ratios[rep] = std::exp(log_marginal_likelihood_estimate(ps) - kal);
  }
  double mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) / reps;
  double var = 0.0;
  for (double r : ratios) var += (r - mean) * (r - mean);
  var /= (reps - 1);
  double se = std::sqrt(var / reps);
  REQUIRE(std::abs(mean - 1.0) <= 3.0 * se);
}

TEST_CASE("retained slots survive a conditional sweep") {
  LinearGaussianSsm lg;
  Params th = LinearGaussianSsm::make_params(0.7, 1.0, 0.8, 0.0, 1.0);
  auto sim = simulate(lg, th, 8, Rng(14));
  std::vector<int> counts(8, 6);

  RetainedSlots<double> keep;
  keep.slots = {2, 0, 5, 1, 3, 3, 0, 4};
  keep.states.resize(8);
  Rng vals(15);
  for (auto& s : keep.states) s = vals.normal();

  auto ps = run_smc(lg, th, sim.obs, counts, Rng(16), &keep);
  for (int t = 0; t < 8; ++t) {
    REQUIRE(ps.states[t][keep.slots[t]] == keep.states[t]);  // bitwise
    if (t > 0)
      REQUIRE(ps.ancestors[t - 1][keep.slots[t]] == keep.slots[t - 1]);
  }
  REQUIRE_NOTHROW(ps.validate());

  std::vector<int> small(8, 1);
  REQUIRE_THROWS_AS(run_smc(lg, th, sim.obs, small, Rng(17), &keep),
                    InputError);
}

TEST_CASE("degenerate weights abort with the failing time") {
  struct Killer : LinearGaussianSsm {
    double log_gt(int t, Obs, State, const Params&) const {
      return t == 2 ? neg_inf : 0.0;
    }
  };
  Killer k;
  Params th = LinearGaussianSsm::make_params(0.7, 1.0, 0.8, 0.0, 1.0);
  ObservationSeries<double> y(std::vector<double>{0, 0, 0, 0});
  std::vector<int> counts(4, 4);
  try {
    run_smc(k, th, y, counts, Rng(18));
    FAIL("expected degenerate weights");
  } catch (const DegenerateWeightsError& e) {
    REQUIRE(e.time == 2);
    REQUIRE(std::string(e.what()).find("time 3") != std::string::npos);
  }
}

TEST_CASE("adapted sv filter outperforms bootstrap on effective sample size") {
  StochasticVolatility adapted(true), bootstrap(false);
  Params th = StochasticVolatility::make_params(-0.9, 0.25, 0.95);
  auto sim = simulate(adapted, th, 60, Rng(19));
  std::vector<int> counts(60, 64);

  auto ess_of = [&](const auto& model, std::uint64_t seed) {
    auto ps = run_smc(model, th, sim.obs, counts, Rng(seed));
    double total = 0.0;
    for (int t = 0; t < ps.horizon(); ++t) {
      double s2 = 0.0;
      for (double w : ps.W[t]) s2 += w * w;
      total += 1.0 / s2;
    }
    return total / ps.horizon();
  };

  int wins = 0;
  for (int rep = 0; rep < 50; ++rep)
    if (ess_of(adapted, 100 + rep) > ess_of(bootstrap, 100 + rep)) ++wins;
  REQUIRE(wins > 25);  // median over 50 paired runs favors the adapted filter
}
