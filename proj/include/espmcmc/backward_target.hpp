#ifndef ESPMCMC_BACKWARD_TARGET_HPP
#define ESPMCMC_BACKWARD_TARGET_HPP

#include <span>
#include <vector>

#include "espmcmc/math.hpp"
#include "espmcmc/particle_system.hpp"
#include "espmcmc/ssm.hpp"

namespace espmcmc {

/// Everything one backward MCMC run at time t conditions on.  Immutable for
/// the duration of the run; the spans refer into the particle system, which
/// outlives every kernel.
///
/// The unnormalized target is
///   t >= 1:  g_t(y_t|x) f_{t+1}(next|x) sum_i w_{t-1}^i f_t(x|x_{t-1}^i)
///   t == 0:  g_1(y_1|x) f_2(next|x) f_1(x)
/// where `next` is the conditioning next-period state (the retained one at
/// t+1, or the selected particle at the final time).  The mixture sum is
/// evaluated with shifted log weights; the shift cancels in every
/// Metropolis-Hastings ratio.
template <StateSpaceModel M>
struct BackwardTargetContext {
  using State = typename M::State;
  using Obs = typename M::Obs;

  const M* model = nullptr;
  const Params* theta = nullptr;
  int t = 0;  // 0-based
  const Obs* y_t = nullptr;
  const State* next_state = nullptr;

  // time t-1 (empty when t == 0)
  std::span<const State> prev_states;
  std::span<const double> prev_logw;
  std::span<const double> prev_W;
  // ancestor indices into t-1 for the particles at t; not used by the bundled
  // proposal families but part of the kernel's conditioning set
  std::span<const int> prev_ancestors;

  // time t, for moment-based proposals; slot `skip_slot` is excluded
  std::span<const State> curr_states;
  std::span<const double> curr_logw;
  int skip_slot = -1;

  double logpdf(const State& x) const {
    const M& m = *model;
    const Params& th = *theta;
    double lp = m.log_gt(t, *y_t, x, th) +
                m.log_ft(t + 1, *next_state, x, th);
    if (t == 0) return lp + m.log_f1(x, th);
    double mix = neg_inf;
    double shift = neg_inf;
    for (double lw : prev_logw)
      if (lw > shift) shift = lw;
    if (shift == neg_inf) return neg_inf;
    double acc = 0.0;
    for (std::size_t i = 0; i < prev_states.size(); ++i)
      acc += std::exp(prev_logw[i] - shift +
                      m.log_ft(t, x, prev_states[i], th));
    mix = shift + std::log(acc);
    return lp + mix;
  }
};

/// Builds the context for the backward pass at time t (all current slots
/// filled; slot b_t excluded from moment sums).  `next_state` must outlive
/// the kernel run.
template <StateSpaceModel M>
BackwardTargetContext<M> make_backward_context(
    const M& model, const Params& theta,
    const ObservationSeries<typename M::Obs>& y,
    const ParticleSystem<typename M::State>& ps, int t,
    const typename M::State& next_state, int skip_slot) {
  BackwardTargetContext<M> ctx;
  ctx.model = &model;
  ctx.theta = &theta;
  ctx.t = t;
  ctx.y_t = &y[t];
  ctx.next_state = &next_state;
  if (t > 0) {
    ctx.prev_states = std::span<const typename M::State>(ps.states[t - 1]);
    ctx.prev_logw = std::span<const double>(ps.logw[t - 1]);
    ctx.prev_W = std::span<const double>(ps.W[t - 1]);
    ctx.prev_ancestors = std::span<const int>(ps.ancestors[t - 1]);
  }
  ctx.curr_states = std::span<const typename M::State>(ps.states[t]);
  ctx.curr_logw = std::span<const double>(ps.logw[t]);
  ctx.skip_slot = skip_slot;
  return ctx;
}

}  // namespace espmcmc

#endif  // ESPMCMC_BACKWARD_TARGET_HPP
