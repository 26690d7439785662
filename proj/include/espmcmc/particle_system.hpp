#ifndef ESPMCMC_PARTICLE_SYSTEM_HPP
#define ESPMCMC_PARTICLE_SYSTEM_HPP

#include <cmath>
#include <span>
#include <vector>

#include "espmcmc/errors.hpp"
#include "espmcmc/math.hpp"
#include "espmcmc/rng.hpp"

namespace espmcmc {

/// One multinomial draw from the discrete distribution with probabilities W.
/// This is the only resampling scheme used anywhere in the library.
inline int categorical_sample(std::span<const double> weights, Rng& rng) {
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw InputError("categorical_sample: negative weight");
    total += w;
  }
  if (total <= 0.0) throw DegenerateWeightsError("categorical weights", -1);
  double u = rng.uniform01() * total;
  double c = 0.0;
  int last_positive = -1;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0) last_positive = static_cast<int>(i);
    c += weights[i];
    if (u < c) return static_cast<int>(i);
  }
  return last_positive;  // u landed on the rounding slack at the top
}

inline int categorical_sample(const std::vector<double>& weights, Rng& rng) {
  return categorical_sample(std::span<const double>(weights), rng);
}

/// Output of one particle-filter sweep: per-time particle clouds, log
/// unnormalized weights, normalized weights, cached log weight sums and the
/// ancestor indices linking adjacent times.  The cloud at the final time is
/// stored weighted, never resampled.
template <class State>
struct ParticleSystem {
  std::vector<std::vector<State>> states;   // [T][N_t]
  std::vector<std::vector<double>> logw;    // unnormalized, log domain
  std::vector<std::vector<double>> W;       // normalized per time
  std::vector<double> log_weight_sum;       // L_t = log sum_i w_t^i
  std::vector<std::vector<int>> ancestors;  // [T-1][N_{t+1}], values in 0..N_t-1

  int horizon() const { return static_cast<int>(states.size()); }
  int count(int t) const { return static_cast<int>(states[t].size()); }

  void resize(std::span<const int> counts) {
    const int T = static_cast<int>(counts.size());
    states.assign(T, {});
    logw.assign(T, {});
    W.assign(T, {});
    log_weight_sum.assign(T, 0.0);
    ancestors.assign(T - 1, {});
    for (int t = 0; t < T; ++t) {
      states[t].resize(counts[t]);
      logw[t].resize(counts[t]);
      W[t].resize(counts[t]);
      if (t > 0) ancestors[t - 1].resize(counts[t]);
    }
  }

  /// Normalizes the weights at time t and caches L_t.
  void finalize_time(int t) {
    double lse = log_sum_exp(logw[t]);
    if (lse == neg_inf) throw DegenerateWeightsError("particle weights", t);
    log_weight_sum[t] = lse;
    for (std::size_t i = 0; i < logw[t].size(); ++i)
      W[t][i] = std::exp(logw[t][i] - lse);
  }

  void validate() const {
    const int T = horizon();
    for (int t = 0; t < T; ++t) {
      double s = 0.0;
      for (double w : W[t]) s += w;
      if (std::abs(s - 1.0) > 1e-9)
        throw NumericalError("normalized weights do not sum to 1 at time " +
                             std::to_string(t + 1));
      if (!std::isfinite(log_weight_sum[t]))
        throw NumericalError("non-finite weight sum at time " +
                             std::to_string(t + 1));
      if (t > 0) {
        for (int a : ancestors[t - 1])
          if (a < 0 || a >= count(t - 1))
            throw NumericalError("ancestor index out of range at time " +
                                 std::to_string(t + 1));
      }
    }
  }
};

/// Estimate of log p(y_1:T | theta): sum_t (L_t - log N_t).
template <class State>
double log_marginal_likelihood_estimate(const ParticleSystem<State>& ps) {
  double l = 0.0;
  for (int t = 0; t < ps.horizon(); ++t)
    l += ps.log_weight_sum[t] - std::log(static_cast<double>(ps.count(t)));
  return l;
}

}  // namespace espmcmc

#endif  // ESPMCMC_PARTICLE_SYSTEM_HPP
