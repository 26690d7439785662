#ifndef ESPMCMC_CSMC_HPP
#define ESPMCMC_CSMC_HPP

#include <span>
#include <vector>

#include "espmcmc/backward_pass.hpp"
#include "espmcmc/backward_target.hpp"
#include "espmcmc/particle_system.hpp"
#include "espmcmc/smc.hpp"

namespace espmcmc {

/// The path conditioned on between sweeps: the final MCMC iterate at each
/// time before the last and the selected particle (with its slot) at time T.
template <class State>
struct RetainedTrajectory {
  std::vector<State> path;
  int last_slot = 0;  // b_T
};

namespace detail {

template <StateSpaceModel M>
void fill_slot_weight(const M& model, const Params& theta,
                      const ObservationSeries<typename M::Obs>& y,
                      ParticleSystem<typename M::State>& ps, int t, int i) {
  const typename M::State& x = ps.states[t][i];
  if (t == 0) {
    ps.logw[0][i] = model.log_gt(0, y[0], x, theta) + model.log_f1(x, theta) -
                    model.log_M1(y[0], x, theta);
  } else {
    const typename M::State& xp = ps.states[t - 1][ps.ancestors[t - 1][i]];
    ps.logw[t][i] = model.log_gt(t, y[t], x, theta) +
                    model.log_ft(t, x, xp, theta) -
                    model.log_Mt(t, y[t], x, xp, theta);
  }
}

/// Ancestor draw for a pinned slot: v_{t-1}^i = w_{t-1}^i f_t(x | x_{t-1}^i).
template <StateSpaceModel M>
int sample_pinned_ancestor(const M& model, const Params& theta,
                           const ParticleSystem<typename M::State>& ps, int t,
                           const typename M::State& x, Rng& rng) {
  const int n = ps.count(t - 1);
  std::vector<double> logv(n);
  for (int i = 0; i < n; ++i)
    logv[i] =
        ps.logw[t - 1][i] + model.log_ft(t, x, ps.states[t - 1][i], theta);
  double lse = log_sum_exp(logv);
  if (lse == neg_inf)
    throw DegenerateWeightsError("retained-slot ancestor weights", t - 1);
  std::vector<double> V(n);
  for (int i = 0; i < n; ++i) V[i] = std::exp(logv[i] - lse);
  return categorical_sample(V, rng);
}

}  // namespace detail

/// Conditional SMC around a retained trajectory.  For each t < T the slot
/// B_t is drawn uniformly, the other slots are regenerated by the particle
/// filter, and the MCMC iterates are produced in reverse: the chain starts
/// at the retained value, fills slots C_t-2 .. 0, and one further kernel
/// application yields the particle entering slot B_t.  The retained values
/// themselves are never overwritten; b_T is carried through unchanged.
template <StateSpaceModel M, class KernelFactory>
ExtendedState<typename M::State> run_csmc(
    const M& model, const Params& theta,
    const ObservationSeries<typename M::Obs>& y,
    const RetainedTrajectory<typename M::State>& retained,
    std::span<const int> counts, std::span<const int> mcmc_lengths,
    KernelFactory& kernels, Rng stream) {
  using State = typename M::State;
  const int T = y.horizon();
  if (static_cast<int>(retained.path.size()) != T)
    throw InputError("run_csmc: retained path length must equal horizon");
  if (static_cast<int>(counts.size()) != T ||
      static_cast<int>(mcmc_lengths.size()) != T - 1)
    throw InputError("run_csmc: counts/mcmc_lengths have wrong length");
  for (int t = 0; t < T; ++t)
    if (counts[t] < 2) throw InputError("run_csmc: N_t must be >= 2");
  for (int c : mcmc_lengths)
    if (c < 1) throw InputError("run_csmc: C_t must be >= 1");
  if (retained.last_slot < 0 || retained.last_slot >= counts[T - 1])
    throw InputError("run_csmc: b_T out of range");

  ExtendedState<State> ext;
  ext.ps.resize(counts);
  ext.selected.assign(T, 0);
  ext.mcmc_lengths.assign(mcmc_lengths.begin(), mcmc_lengths.end());
  ext.mcmc_states.assign(T - 1, {});
  ParticleSystem<State>& ps = ext.ps;

  for (int t = 0; t + 1 < T; ++t) {
    Rng time_stream = stream.substream(t);
    Rng seq = time_stream.substream(0xC0FFEE);  // sequential draws at time t

    const int b = seq.uniform_int(counts[t]);
    ext.selected[t] = b;

    // regenerate the non-retained slots with the particle filter
    for (int i = 0; i < counts[t]; ++i) {
      if (i == b) continue;
      Rng r = time_stream.substream(i);
      if (t == 0) {
        ps.states[0][i] = model.sample_M1(y[0], theta, r);
      } else {
        int a = categorical_sample(ps.W[t - 1], r);
        ps.ancestors[t - 1][i] = a;
        ps.states[t][i] =
            model.sample_Mt(t, y[t], ps.states[t - 1][a], theta, r);
      }
      detail::fill_slot_weight(model, theta, y, ps, t, i);
    }

    // reversed kernel run seeded at the retained value
    const int C = mcmc_lengths[t];
    auto& chain = ext.mcmc_states[t];
    chain.assign(C, retained.path[t]);
    auto ctx = make_backward_context(model, theta, y, ps, t,
                                     retained.path[t + 1], b);
    auto kernel = kernels.make(ctx);
    kernel.seed(retained.path[t]);
    for (int j = C - 2; j >= 0; --j) chain[j] = kernel.advance(seq);
    ps.states[t][b] = kernel.advance(seq);

    if (t > 0)
      ps.ancestors[t - 1][b] = detail::sample_pinned_ancestor(
          model, theta, ps, t, ps.states[t][b], seq);
    detail::fill_slot_weight(model, theta, y, ps, t, b);
    ps.finalize_time(t);
  }

  // final time: the retained particle keeps its slot and value
  {
    const int t = T - 1;
    Rng time_stream = stream.substream(t);
    Rng seq = time_stream.substream(0xC0FFEE);
    const int b = retained.last_slot;
    ext.selected[t] = b;
    ps.states[t][b] = retained.path[t];
    ps.ancestors[t - 1][b] = detail::sample_pinned_ancestor(
        model, theta, ps, t, ps.states[t][b], seq);
    for (int i = 0; i < counts[t]; ++i) {
      if (i == b) continue;
      Rng r = time_stream.substream(i);
      int a = categorical_sample(ps.W[t - 1], r);
      ps.ancestors[t - 1][i] = a;
      ps.states[t][i] = model.sample_Mt(t, y[t], ps.states[t - 1][a], theta, r);
      detail::fill_slot_weight(model, theta, y, ps, t, i);
    }
    detail::fill_slot_weight(model, theta, y, ps, t, b);
    ps.finalize_time(t);
  }
  return ext;
}

}  // namespace espmcmc

#endif  // ESPMCMC_CSMC_HPP
