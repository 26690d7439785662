#ifndef ESPMCMC_HMM_ORACLE_HPP
#define ESPMCMC_HMM_ORACLE_HPP

#include <array>
#include <cmath>
#include <vector>

#include "espmcmc/errors.hpp"
#include "espmcmc/math.hpp"

namespace espmcmc {

/// Two-state hidden Markov chain with binary emissions.
///   init[s]     = P(x_1 = s)
///   trans[s][s'] = P(x_t = s' | x_{t-1} = s)
///   emit[s][o]  = P(y_t = o | x_t = s)
struct Hmm2Spec {
  std::array<double, 2> init;
  std::array<std::array<double, 2>, 2> trans;
  std::array<std::array<double, 2>, 2> emit;
};

struct Hmm2Smoothing {
  // posterior probability of each full path, indexed by the bitmask with
  // bit t giving the state at time t
  std::vector<double> path_posterior;
  // marginal[t] = P(x_t = 1 | y)
  std::vector<double> marginal_one;
  double loglik;
};

/// Exact smoothing by enumerating all 2^T paths.  Hard-capped at T = 12.
inline Hmm2Smoothing hmm_exact_smoothing(const Hmm2Spec& hmm,
                                         const std::vector<int>& y) {
  const int T = static_cast<int>(y.size());
  if (T > 12) throw ResourceError("hmm_exact_smoothing: T > 12");
  if (T < 1) throw InputError("hmm_exact_smoothing: empty series");
  const std::size_t n_paths = std::size_t{1} << T;
  std::vector<double> logp(n_paths);
  for (std::size_t mask = 0; mask < n_paths; ++mask) {
    int s0 = static_cast<int>(mask & 1);
    double lp = std::log(hmm.init[s0]) + std::log(hmm.emit[s0][y[0]]);
    int prev = s0;
    for (int t = 1; t < T; ++t) {
      int s = static_cast<int>((mask >> t) & 1);
      lp += std::log(hmm.trans[prev][s]) + std::log(hmm.emit[s][y[t]]);
      prev = s;
    }
    logp[mask] = lp;
  }
  double lse = log_sum_exp(logp);
  Hmm2Smoothing out;
  out.loglik = lse;
  out.path_posterior.resize(n_paths);
  out.marginal_one.assign(T, 0.0);
  for (std::size_t mask = 0; mask < n_paths; ++mask) {
    double p = std::exp(logp[mask] - lse);
    out.path_posterior[mask] = p;
    for (int t = 0; t < T; ++t)
      if ((mask >> t) & 1) out.marginal_one[t] += p;
  }
  return out;
}

struct Hmm2ForwardBackward {
  std::vector<std::array<double, 2>> filtered;  // P(x_t | y_1:t)
  std::vector<std::array<double, 2>> smoothed;  // P(x_t | y_1:T)
  double loglik;
};

/// Standard forward-backward recursion; cross-checks the enumeration.
inline Hmm2ForwardBackward hmm_forward_backward(const Hmm2Spec& hmm,
                                                const std::vector<int>& y) {
  const int T = static_cast<int>(y.size());
  Hmm2ForwardBackward out;
  out.filtered.resize(T);
  out.loglik = 0.0;
  std::array<double, 2> pred;
  for (int t = 0; t < T; ++t) {
    if (t == 0) {
      pred = hmm.init;
    } else {
      for (int s = 0; s < 2; ++s)
        pred[s] = out.filtered[t - 1][0] * hmm.trans[0][s] +
                  out.filtered[t - 1][1] * hmm.trans[1][s];
    }
    double norm = 0.0;
    for (int s = 0; s < 2; ++s) {
      out.filtered[t][s] = pred[s] * hmm.emit[s][y[t]];
      norm += out.filtered[t][s];
    }
    if (norm <= 0.0) throw NumericalError("hmm forward: zero likelihood");
    out.loglik += std::log(norm);
    for (int s = 0; s < 2; ++s) out.filtered[t][s] /= norm;
  }
  out.smoothed = out.filtered;
  for (int t = T - 2; t >= 0; --t) {
    std::array<double, 2> next_pred{};
    for (int s = 0; s < 2; ++s)
      for (int sp = 0; sp < 2; ++sp)
        next_pred[sp] += out.filtered[t][s] * hmm.trans[s][sp];
    std::array<double, 2> sm{};
    for (int s = 0; s < 2; ++s) {
      double acc = 0.0;
      for (int sp = 0; sp < 2; ++sp) {
        if (next_pred[sp] > 0.0)
          acc += hmm.trans[s][sp] * out.smoothed[t + 1][sp] / next_pred[sp];
      }
      sm[s] = out.filtered[t][s] * acc;
    }
    out.smoothed[t] = sm;
  }
  return out;
}

}  // namespace espmcmc

#endif  // ESPMCMC_HMM_ORACLE_HPP
