#ifndef ESPMCMC_BACKWARD_PASS_HPP
#define ESPMCMC_BACKWARD_PASS_HPP

#include <span>
#include <vector>

#include "espmcmc/backward_target.hpp"
#include "espmcmc/mh_kernel.hpp"
#include "espmcmc/particle_system.hpp"
#include "espmcmc/smc.hpp"

namespace espmcmc {

/// The full extended-space variable: particle system, selected indices B_t
/// and the per-time MCMC iterates.  mcmc_states[t] holds C_t values for
/// t = 0..T-2; slot C_t-1 is the iterate the next time point conditions on.
template <class State>
struct ExtendedState {
  ParticleSystem<State> ps;
  std::vector<int> selected;                    // B_t, size T
  std::vector<std::vector<State>> mcmc_states;  // [T-1][C_t]
  std::vector<int> mcmc_lengths;                // C_t, size T-1

  int horizon() const { return ps.horizon(); }
};

/// The smoothing path selected by the extended state: the final MCMC iterate
/// at each time before the last, then the selected particle at time T.
template <class State>
std::vector<State> extract_trajectory(const ExtendedState<State>& ext) {
  const int T = ext.horizon();
  std::vector<State> path(T);
  for (int t = 0; t + 1 < T; ++t) path[t] = ext.mcmc_states[t].back();
  path[T - 1] = ext.ps.states[T - 1][ext.selected[T - 1]];
  return path;
}

namespace detail {

/// Backward weights w_t^i f_{t+1}(next | x_t^i) in the log domain,
/// normalized; throws naming t when all are zero.
template <StateSpaceModel M>
std::vector<double> normalized_backward_weights(
    const M& model, const Params& theta,
    const ParticleSystem<typename M::State>& ps, int t,
    const typename M::State& next_state) {
  const int n = ps.count(t);
  std::vector<double> logbw(n);
  for (int i = 0; i < n; ++i)
    logbw[i] =
        ps.logw[t][i] + model.log_ft(t + 1, next_state, ps.states[t][i], theta);
  double lse = log_sum_exp(logbw);
  if (lse == neg_inf) throw DegenerateWeightsError("backward weights", t);
  std::vector<double> W(n);
  for (int i = 0; i < n; ++i) W[i] = std::exp(logbw[i] - lse);
  return W;
}

}  // namespace detail

/// The backward pass: selects B_T from the final weights, then walks t back
/// from T-1 selecting B_t from the backward weights and running C_t MCMC
/// steps from the selected particle.  Each chain conditions on the final
/// iterate of the time after it.  Kernel construction is delegated to the
/// factory so tests can substitute their own kernels.
template <StateSpaceModel M, class KernelFactory>
void run_backward_pass(const M& model, const Params& theta,
                       const ObservationSeries<typename M::Obs>& y,
                       ExtendedState<typename M::State>& ext,
                       std::span<const int> mcmc_lengths,
                       KernelFactory& kernels, Rng stream) {
  const ParticleSystem<typename M::State>& ps = ext.ps;
  const int T = ps.horizon();
  if (static_cast<int>(mcmc_lengths.size()) != T - 1)
    throw InputError("run_backward_pass: need C_t for t = 1..T-1");
  for (int c : mcmc_lengths)
    if (c < 1) throw InputError("run_backward_pass: C_t must be >= 1");

  ext.selected.assign(T, 0);
  ext.mcmc_lengths.assign(mcmc_lengths.begin(), mcmc_lengths.end());
  ext.mcmc_states.assign(T - 1, {});

  {
    Rng r = stream.substream(T - 1);
    ext.selected[T - 1] = categorical_sample(ps.W[T - 1], r);
  }

  for (int t = T - 2; t >= 0; --t) {
    Rng r = stream.substream(t);
    const typename M::State& cond =
        (t == T - 2) ? ps.states[T - 1][ext.selected[T - 1]]
                     : ext.mcmc_states[t + 1].back();
    std::vector<double> bw =
        detail::normalized_backward_weights(model, theta, ps, t, cond);
    ext.selected[t] = categorical_sample(bw, r);

    auto ctx =
        make_backward_context(model, theta, y, ps, t, cond, ext.selected[t]);
    auto kernel = kernels.make(ctx);
    kernel.seed(ps.states[t][ext.selected[t]]);
    auto& chain = ext.mcmc_states[t];
    chain.reserve(mcmc_lengths[t]);
    for (int j = 0; j < mcmc_lengths[t]; ++j) chain.push_back(kernel.advance(r));
  }
}

/// Index-only backward simulation: draws B_t from the backward weights with
/// no MCMC moves.  This is the comparison baseline; the selected path is
/// restricted to the particle-filter support.
template <StateSpaceModel M>
std::vector<int> run_backward_simulation(
    const M& model, const Params& theta,
    const ParticleSystem<typename M::State>& ps, Rng stream) {
  const int T = ps.horizon();
  std::vector<int> selected(T);
  {
    Rng r = stream.substream(T - 1);
    selected[T - 1] = categorical_sample(ps.W[T - 1], r);
  }
  for (int t = T - 2; t >= 0; --t) {
    Rng r = stream.substream(t);
    std::vector<double> bw = detail::normalized_backward_weights(
        model, theta, ps, t, ps.states[t + 1][selected[t + 1]]);
    selected[t] = categorical_sample(bw, r);
  }
  return selected;
}

}  // namespace espmcmc

#endif  // ESPMCMC_BACKWARD_PASS_HPP
