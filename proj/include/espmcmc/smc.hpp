#ifndef ESPMCMC_SMC_HPP
#define ESPMCMC_SMC_HPP

#include <span>
#include <vector>

#include "espmcmc/particle_system.hpp"
#include "espmcmc/ssm.hpp"

namespace espmcmc {

/// A trajectory held fixed through a conditional sweep: `slots[t]` is the
/// slot occupied at time t, `states[t]` the value kept there.  The retained
/// slots' ancestor links are pinned to slots[t-1].
template <class State>
struct RetainedSlots {
  std::vector<int> slots;
  std::vector<State> states;
};

/// One particle-filter sweep (sample from M, weight, multinomial resample).
/// Particle (t, i) always draws from stream.substream(t).substream(i), so
/// results do not depend on loop or thread scheduling.
/// When `retained` is supplied the designated slot at each time keeps its
/// given state and ancestor link and is skipped by sampling; every N_t must
/// then be at least 2.
template <StateSpaceModel M>
ParticleSystem<typename M::State> run_smc(
    const M& model, const Params& theta,
    const ObservationSeries<typename M::Obs>& y, std::span<const int> counts,
    Rng stream,
    const RetainedSlots<typename M::State>* retained = nullptr) {
  const int T = y.horizon();
  if (static_cast<int>(counts.size()) != T)
    throw InputError("run_smc: counts length must equal horizon");
  for (int t = 0; t < T; ++t) {
    if (counts[t] < 1) throw InputError("run_smc: N_t must be >= 1");
    if (retained && counts[t] < 2)
      throw InputError("run_smc: retained sweep requires N_t >= 2");
  }
  if (retained && (static_cast<int>(retained->slots.size()) != T ||
                   static_cast<int>(retained->states.size()) != T))
    throw InputError("run_smc: retained trajectory length must equal horizon");

  ParticleSystem<typename M::State> ps;
  ps.resize(counts);

  for (int t = 0; t < T; ++t) {
    Rng time_stream = stream.substream(t);
    const int pin = retained ? retained->slots[t] : -1;
    for (int i = 0; i < counts[t]; ++i) {
      if (i == pin) {
        ps.states[t][i] = retained->states[t];
        if (t > 0) ps.ancestors[t - 1][i] = retained->slots[t - 1];
      } else {
        Rng r = time_stream.substream(i);
        if (t == 0) {
          ps.states[0][i] = model.sample_M1(y[0], theta, r);
        } else {
          int a = categorical_sample(ps.W[t - 1], r);
          ps.ancestors[t - 1][i] = a;
          ps.states[t][i] =
              model.sample_Mt(t, y[t], ps.states[t - 1][a], theta, r);
        }
      }
      const typename M::State& x = ps.states[t][i];
      if (t == 0) {
        ps.logw[0][i] = model.log_gt(0, y[0], x, theta) +
                        model.log_f1(x, theta) - model.log_M1(y[0], x, theta);
      } else {
        const typename M::State& xp = ps.states[t - 1][ps.ancestors[t - 1][i]];
        ps.logw[t][i] = model.log_gt(t, y[t], x, theta) +
                        model.log_ft(t, x, xp, theta) -
                        model.log_Mt(t, y[t], x, xp, theta);
      }
    }
    ps.finalize_time(t);
  }
  return ps;
}

}  // namespace espmcmc

#endif  // ESPMCMC_SMC_HPP
