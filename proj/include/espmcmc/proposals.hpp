#ifndef ESPMCMC_PROPOSALS_HPP
#define ESPMCMC_PROPOSALS_HPP

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "espmcmc/backward_target.hpp"
#include "espmcmc/math.hpp"
#include "espmcmc/state_traits.hpp"

namespace espmcmc {

/// Weighted mean and covariance estimated from particles.
struct SmoothingMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

enum class ProposalFamily {
  rw_backward,           // random walk, scale from backward-weight moments
  rw_linearized,         // random walk, scale from linearization moments
  ind_gauss_backward,    // independent Gaussian, backward-weight moments
  ind_gauss_linearized,  // independent Gaussian, linearization moments
  ind_student_t,         // independent Student-t, backward-weight moments
  bootstrap,             // mixture of transitions from the previous cloud
  flip                   // discrete two-state swap (discrete models only)
};

struct ProposalSpec {
  ProposalFamily family = ProposalFamily::bootstrap;
  double scale = 1.0;       // multiplier on the estimated covariance
  double student_dof = 4.0;

  void validate() const {
    if (scale <= 0.0) throw ConfigError("proposal scale must be positive");
    if (student_dof <= 2.0)
      throw ConfigError("student-t dof must exceed 2 for finite variance");
  }
};

inline ProposalFamily proposal_family_from_string(const std::string& s) {
  if (s == "rw-backward") return ProposalFamily::rw_backward;
  if (s == "rw-linearized") return ProposalFamily::rw_linearized;
  if (s == "ind-gauss-backward") return ProposalFamily::ind_gauss_backward;
  if (s == "ind-gauss-linearized") return ProposalFamily::ind_gauss_linearized;
  if (s == "ind-student-t") return ProposalFamily::ind_student_t;
  if (s == "bootstrap") return ProposalFamily::bootstrap;
  if (s == "flip") return ProposalFamily::flip;
  throw ConfigError("unknown proposal family: " + s);
}

inline std::string to_string(ProposalFamily f) {
  switch (f) {
    case ProposalFamily::rw_backward: return "rw-backward";
    case ProposalFamily::rw_linearized: return "rw-linearized";
    case ProposalFamily::ind_gauss_backward: return "ind-gauss-backward";
    case ProposalFamily::ind_gauss_linearized: return "ind-gauss-linearized";
    case ProposalFamily::ind_student_t: return "ind-student-t";
    case ProposalFamily::bootstrap: return "bootstrap";
    case ProposalFamily::flip: return "flip";
  }
  return "?";
}

/// Weighted moments of the particles at time t under the backward weights
/// w_t^i f_{t+1}(next | x_t^i), excluding `skip_slot`.  Invariant to a
/// constant shift of the log weights.
template <StateSpaceModel M>
SmoothingMoments backward_weight_moments(
    const M& model, const Params& theta, int t,
    std::span<const typename M::State> states, std::span<const double> logw,
    int skip_slot, const typename M::State& next_state) {
  using Traits = StateTraits<typename M::State>;
  static_assert(Traits::is_continuous,
                "moment estimators need a continuous state");
  const int n = static_cast<int>(states.size());
  if (n - (skip_slot >= 0 && skip_slot < n ? 1 : 0) < 2)
    throw InputError("backward_weight_moments: need at least 2 particles");

  std::vector<double> lbw(n, neg_inf);
  double shift = neg_inf;
  for (int i = 0; i < n; ++i) {
    if (i == skip_slot) continue;
    lbw[i] = logw[i] + model.log_ft(t + 1, next_state, states[i], theta);
    if (lbw[i] > shift) shift = lbw[i];
  }
  if (shift == neg_inf)
    throw DegenerateWeightsError("backward weights", t);

  const int d = Traits::dim(states[skip_slot == 0 ? 1 : 0]);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i == skip_slot) continue;
    double w = std::exp(lbw[i] - shift);
    mean += w * Traits::to_vector(states[i]);
    total += w;
  }
  mean /= total;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    if (i == skip_slot) continue;
    double w = std::exp(lbw[i] - shift);
    Eigen::VectorXd dv = Traits::to_vector(states[i]) - mean;
    cov += w * (dv * dv.transpose());
  }
  cov /= total;
  cov = 0.5 * (cov + cov.transpose());
  return {std::move(mean), std::move(cov)};
}

template <StateSpaceModel M>
SmoothingMoments backward_weight_moments(const BackwardTargetContext<M>& ctx) {
  return backward_weight_moments(*ctx.model, *ctx.theta, ctx.t,
                                 ctx.curr_states, ctx.curr_logw, ctx.skip_slot,
                                 *ctx.next_state);
}

/// Weighted moments of the particles at time t under the forward weights,
/// excluding `skip_slot`; these estimate the filtered distribution and feed
/// the linearization route.
template <class State>
SmoothingMoments filtered_moments(std::span<const State> states,
                                  std::span<const double> logw,
                                  int skip_slot) {
  using Traits = StateTraits<State>;
  static_assert(Traits::is_continuous,
                "moment estimators need a continuous state");
  const int n = static_cast<int>(states.size());
  if (n - (skip_slot >= 0 && skip_slot < n ? 1 : 0) < 2)
    throw InputError("filtered_moments: need at least 2 particles");
  double shift = neg_inf;
  for (int i = 0; i < n; ++i)
    if (i != skip_slot && logw[i] > shift) shift = logw[i];
  if (shift == neg_inf) throw DegenerateWeightsError("filter weights", -1);

  const int d = Traits::dim(states[skip_slot == 0 ? 1 : 0]);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    if (i == skip_slot) continue;
    double w = std::exp(logw[i] - shift);
    mean += w * Traits::to_vector(states[i]);
    total += w;
  }
  mean /= total;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    if (i == skip_slot) continue;
    double w = std::exp(logw[i] - shift);
    Eigen::VectorXd dv = Traits::to_vector(states[i]) - mean;
    cov += w * (dv * dv.transpose());
  }
  cov /= total;
  cov = 0.5 * (cov + cov.transpose());
  return {std::move(mean), std::move(cov)};
}

/// One-step conditional-smoothing moments from filtered moments and the
/// Gaussian-linear evolution coefficients:
///   R = H S H' + Sigma,  e = next - h - H xhat,
///   mean = xhat + S H' R^{-1} e,  cov = S - S H' R^{-1} H S.
inline SmoothingMoments linearization_moments(const SmoothingMoments& filtered,
                                              const Linearization& lin,
                                              const Eigen::VectorXd& next) {
  const Eigen::MatrixXd& H = lin.slope;
  const Eigen::MatrixXd& S = filtered.cov;
  Eigen::MatrixXd R = H * S * H.transpose() + lin.noise_cov;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(R);
  if (!lu.isInvertible())
    throw NumericalError("linearization_moments: singular innovation matrix");
  Eigen::VectorXd e = next - lin.shift - H * filtered.mean;
  Eigen::MatrixXd SHt = S * H.transpose();
  SmoothingMoments out;
  out.mean = filtered.mean + SHt * lu.solve(e);
  out.cov = S - SHt * lu.solve(H * S);
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

/// Simplified Metropolis-Hastings log ratio for the bootstrap proposal: the
/// particle mixture appears in both the target and the proposal and drops
/// out, leaving log [f_{t+1}(next|x') g_t(y|x')] - log [f_{t+1}(next|x) g_t(y|x)].
template <StateSpaceModel M>
double bootstrap_mh_log_ratio(const BackwardTargetContext<M>& ctx,
                              const typename M::State& x,
                              const typename M::State& x_new) {
  const M& m = *ctx.model;
  const Params& th = *ctx.theta;
  return m.log_gt(ctx.t, *ctx.y_t, x_new, th) +
         m.log_ft(ctx.t + 1, *ctx.next_state, x_new, th) -
         m.log_gt(ctx.t, *ctx.y_t, x, th) -
         m.log_ft(ctx.t + 1, *ctx.next_state, x, th);
}

/// A proposal distribution bound to one backward MCMC run: its parameters
/// (moments, factorizations, mixture components) are fixed for all C_t steps
/// at the given time point.
template <StateSpaceModel M>
class BoundProposal {
 public:
  using State = typename M::State;

  /// Draws a candidate given the current chain state.
  State draw_state(const State& current, Rng& rng) const {
    switch (family_) {
      case ProposalFamily::rw_backward:
      case ProposalFamily::rw_linearized:
        if constexpr (is_continuous_state_v<State>) {
          using Traits = StateTraits<State>;
          Eigen::VectorXd z(gauss_.mean.size());
          for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
          return Traits::from_vector(Traits::to_vector(current) +
                                     gauss_.chol * z);
        }
        break;
      case ProposalFamily::ind_gauss_backward:
      case ProposalFamily::ind_gauss_linearized:
        if constexpr (is_continuous_state_v<State>)
          return StateTraits<State>::from_vector(gauss_.sample(rng));
        break;
      case ProposalFamily::ind_student_t:
        if constexpr (is_continuous_state_v<State>)
          return StateTraits<State>::from_vector(student_.sample(rng));
        break;
      case ProposalFamily::bootstrap: {
        const M& m = *model_;
        if (t_ == 0) return m.sample_f1(*theta_, rng);
        int i = categorical_sample(prev_W_, rng);
        return m.sample_ft(t_, prev_states_[i], *theta_, rng);
      }
      case ProposalFamily::flip:
        if constexpr (std::is_same_v<State, int>) return 1 - current;
        break;
    }
    throw ConfigError("proposal family unavailable for this state type");
  }

  /// log q(to | from); for independent families this ignores `from`.
  double log_density(const State& from, const State& to) const {
    switch (family_) {
      case ProposalFamily::rw_backward:
      case ProposalFamily::rw_linearized:
        if constexpr (is_continuous_state_v<State>) {
          using Traits = StateTraits<State>;
          Eigen::VectorXd d = Traits::to_vector(to) - Traits::to_vector(from);
          Eigen::VectorXd z = gauss_.chol.template triangularView<Eigen::Lower>().solve(d);
          return -0.5 * (d.size() * log_two_pi + gauss_.log_det_cov +
                         z.squaredNorm());
        }
        break;
      case ProposalFamily::ind_gauss_backward:
      case ProposalFamily::ind_gauss_linearized:
        if constexpr (is_continuous_state_v<State>)
          return gauss_.log_pdf(StateTraits<State>::to_vector(to));
        break;
      case ProposalFamily::ind_student_t:
        if constexpr (is_continuous_state_v<State>)
          return student_.log_pdf(StateTraits<State>::to_vector(to));
        break;
      case ProposalFamily::bootstrap: {
        const M& m = *model_;
        if (t_ == 0) return m.log_f1(to, *theta_);
        double shift = neg_inf;
        std::vector<double> terms(prev_states_.size());
        for (std::size_t i = 0; i < prev_states_.size(); ++i) {
          terms[i] = std::log(prev_W_[i]) +
                     m.log_ft(t_, to, prev_states_[i], *theta_);
          if (terms[i] > shift) shift = terms[i];
        }
        if (shift == neg_inf) return neg_inf;
        double acc = 0.0;
        for (double v : terms) acc += std::exp(v - shift);
        return shift + std::log(acc);
      }
      case ProposalFamily::flip:
        if constexpr (std::is_same_v<State, int>)
          return to == 1 - from ? 0.0 : neg_inf;
        break;
    }
    throw ConfigError("proposal family unavailable for this state type");
  }

  /// (log q(current->proposed), log q(proposed->current)).
  std::pair<double, double> log_q_pair(const State& current,
                                       const State& proposed) const {
    switch (family_) {
      case ProposalFamily::rw_backward:
      case ProposalFamily::rw_linearized: {
        double v = log_density(current, proposed);  // symmetric
        return {v, v};
      }
      case ProposalFamily::flip:
        return {0.0, 0.0};
      default:
        return {log_density(current, proposed), log_density(proposed, current)};
    }
  }

  /// True when the proposal mixture cancels the target's particle sum, so the
  /// kernel may use the simplified ratio and skip both mixture evaluations.
  bool cancels_with_target() const {
    return family_ == ProposalFamily::bootstrap;
  }

  ProposalFamily family() const { return family_; }

  // Introspection for tests.
  Eigen::VectorXd center() const { return gauss_.mean; }
  Eigen::MatrixXd gaussian_cov() const {
    return gauss_.chol * gauss_.chol.transpose();
  }

 private:
  template <StateSpaceModel M2>
  friend BoundProposal<M2> bind_proposal(const ProposalSpec&,
                                         const BackwardTargetContext<M2>&);

  ProposalFamily family_ = ProposalFamily::bootstrap;
  MvNormal gauss_;
  MvStudentT student_;
  // bootstrap bindings
  const M* model_ = nullptr;
  const Params* theta_ = nullptr;
  int t_ = 0;
  std::span<const State> prev_states_;
  std::span<const double> prev_W_;
};

/// Binds a proposal family to the context of one backward MCMC run,
/// computing whatever moment estimates the family relies on.
template <StateSpaceModel M>
BoundProposal<M> bind_proposal(const ProposalSpec& spec,
                               const BackwardTargetContext<M>& ctx) {
  using State = typename M::State;
  spec.validate();
  BoundProposal<M> p;
  p.family_ = spec.family;
  p.model_ = ctx.model;
  p.theta_ = ctx.theta;
  p.t_ = ctx.t;

  switch (spec.family) {
    case ProposalFamily::bootstrap:
      p.prev_states_ = ctx.prev_states;
      p.prev_W_ = ctx.prev_W;
      return p;
    case ProposalFamily::flip:
      if constexpr (std::is_same_v<State, int>) return p;
      throw ConfigError("flip proposal requires a discrete two-state model");
    default:
      break;
  }

  if constexpr (is_continuous_state_v<State>) {
    SmoothingMoments mom;
    const bool linearized = spec.family == ProposalFamily::rw_linearized ||
                            spec.family == ProposalFamily::ind_gauss_linearized;
    if (linearized) {
      auto lin = ctx.model->linearization(ctx.t, *ctx.theta);
      if (!lin)
        throw ConfigError(
            "linearized proposal requested but the model provides no "
            "linearization");
      SmoothingMoments filt =
          filtered_moments(ctx.curr_states, ctx.curr_logw, ctx.skip_slot);
      mom = linearization_moments(
          filt, *lin, StateTraits<State>::to_vector(*ctx.next_state));
    } else {
      mom = backward_weight_moments(ctx);
    }

    const int d = static_cast<int>(mom.mean.size());
    switch (spec.family) {
      case ProposalFamily::rw_backward:
      case ProposalFamily::rw_linearized: {
        double factor = std::pow(2.38, d) / d * spec.scale;
        p.gauss_ = MvNormal::from_moments(Eigen::VectorXd::Zero(d),
                                          factor * mom.cov);
        break;
      }
      case ProposalFamily::ind_gauss_backward:
      case ProposalFamily::ind_gauss_linearized:
        p.gauss_ = MvNormal::from_moments(mom.mean, spec.scale * mom.cov);
        break;
      case ProposalFamily::ind_student_t:
        p.student_ = MvStudentT::from_moments(mom.mean, spec.scale * mom.cov,
                                              spec.student_dof);
        break;
      default:
        break;
    }
    return p;
  } else {
    throw ConfigError("moment-based proposal families need a continuous state");
  }
}

}  // namespace espmcmc

#endif  // ESPMCMC_PROPOSALS_HPP
