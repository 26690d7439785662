#ifndef ESPMCMC_MODELS_DISCRETE_HMM_HPP
#define ESPMCMC_MODELS_DISCRETE_HMM_HPP

#include <cmath>
#include <optional>

#include "espmcmc/hmm_oracle.hpp"
#include "espmcmc/math.hpp"
#include "espmcmc/ssm.hpp"

namespace espmcmc::models {

/// Two-state chain with two-symbol emissions.  All densities are probability
/// masses, which exercises the discrete-measure reading of every algorithm.
/// theta = [P(x_1=1), P(x_t=1|x_prev=0), P(x_t=1|x_prev=1),
///          P(y=1|x=0), P(y=1|x=1)].
class DiscreteHmm2 {
 public:
  using State = int;
  using Obs = int;

  static constexpr int kInit1 = 0, kTrans01 = 1, kTrans11 = 2, kEmit10 = 3,
                       kEmit11 = 4;

  int state_dim() const { return 1; }

  static Params make_params(double init1, double trans01, double trans11,
                            double emit1_given0, double emit1_given1) {
    Params th(5);
    th << init1, trans01, trans11, emit1_given0, emit1_given1;
    return th;
  }

  Hmm2Spec oracle_spec(const Params& th) const {
    Hmm2Spec h;
    h.init = {1.0 - th[kInit1], th[kInit1]};
    h.trans = {{{1.0 - th[kTrans01], th[kTrans01]},
                {1.0 - th[kTrans11], th[kTrans11]}}};
    h.emit = {{{1.0 - th[kEmit10], th[kEmit10]},
               {1.0 - th[kEmit11], th[kEmit11]}}};
    return h;
  }

  double log_f1(State x, const Params& th) const {
    return std::log(x == 1 ? th[kInit1] : 1.0 - th[kInit1]);
  }
  State sample_f1(const Params& th, Rng& rng) const {
    return rng.bernoulli(th[kInit1]);
  }

  double log_ft(int, State x, State xp, const Params& th) const {
    double p1 = xp == 1 ? th[kTrans11] : th[kTrans01];
    return std::log(x == 1 ? p1 : 1.0 - p1);
  }
  State sample_ft(int, State xp, const Params& th, Rng& rng) const {
    return rng.bernoulli(xp == 1 ? th[kTrans11] : th[kTrans01]);
  }

  double log_gt(int, Obs y, State x, const Params& th) const {
    double p1 = x == 1 ? th[kEmit11] : th[kEmit10];
    return std::log(y == 1 ? p1 : 1.0 - p1);
  }
  Obs sample_gt(int, State x, const Params& th, Rng& rng) const {
    return rng.bernoulli(x == 1 ? th[kEmit11] : th[kEmit10]);
  }

  double log_M1(Obs, State x, const Params& th) const { return log_f1(x, th); }
  State sample_M1(Obs, const Params& th, Rng& rng) const {
    return sample_f1(th, rng);
  }
  double log_Mt(int t, Obs, State x, State xp, const Params& th) const {
    return log_ft(t, x, xp, th);
  }
  State sample_Mt(int t, Obs, State xp, const Params& th, Rng& rng) const {
    return sample_ft(t, xp, th, rng);
  }

  std::optional<Linearization> linearization(int, const Params&) const {
    return std::nullopt;
  }
};

}  // namespace espmcmc::models

#endif  // ESPMCMC_MODELS_DISCRETE_HMM_HPP
