#ifndef ESPMCMC_MH_KERNEL_HPP
#define ESPMCMC_MH_KERNEL_HPP

#include <cmath>
#include <utility>

#include "espmcmc/backward_target.hpp"
#include "espmcmc/proposals.hpp"

namespace espmcmc {

struct AcceptStats {
  long long proposed = 0;
  long long accepted = 0;

  void record(bool accept) {
    ++proposed;
    if (accept) ++accepted;
  }
  void merge(const AcceptStats& other) {
    proposed += other.proposed;
    accepted += other.accepted;
  }
  double rate() const {
    return proposed == 0 ? 0.0 : static_cast<double>(accepted) / proposed;
  }
};

/// Reference Metropolis-Hastings log acceptance ratio (no caching); the
/// kernel below must make decisions consistent with this expression.
template <StateSpaceModel M>
double mh_log_ratio(const BackwardTargetContext<M>& ctx,
                    const BoundProposal<M>& prop,
                    const typename M::State& current,
                    const typename M::State& proposed) {
  if (prop.cancels_with_target())
    return bootstrap_mh_log_ratio(ctx, current, proposed);
  auto [lq_fwd, lq_rev] = prop.log_q_pair(current, proposed);
  return ctx.logpdf(proposed) + lq_rev - ctx.logpdf(current) - lq_fwd;
}

/// One Metropolis-Hastings chain against a backward smoothing target.  The
/// current target value is cached across steps; the bootstrap family skips
/// target evaluation entirely through the cancelled ratio.
template <StateSpaceModel M>
class MhKernel {
 public:
  using State = typename M::State;

  MhKernel(BackwardTargetContext<M> ctx, BoundProposal<M> proposal,
           AcceptStats* tally = nullptr)
      : ctx_(std::move(ctx)), prop_(std::move(proposal)), tally_(tally) {}

  void seed(State x) {
    current_ = std::move(x);
    have_logp_ = false;
  }

  const State& current() const { return current_; }

  /// One MH step; returns the (possibly unchanged) chain state.
  const State& advance(Rng& rng) {
    State cand = prop_.draw_state(current_, rng);
    if (!StateTraits<State>::is_finite(cand))
      throw ProposalError("proposal produced a non-finite state");
    double log_ratio;
    double logp_cand = 0.0;
    const bool fast = prop_.cancels_with_target();
    if (fast) {
      log_ratio = bootstrap_mh_log_ratio(ctx_, current_, cand);
    } else {
      if (!have_logp_) {
        logp_current_ = ctx_.logpdf(current_);
        have_logp_ = true;
      }
      auto [lq_fwd, lq_rev] = prop_.log_q_pair(current_, cand);
      logp_cand = ctx_.logpdf(cand);
      log_ratio = logp_cand + lq_rev - logp_current_ - lq_fwd;
    }
    if (std::isnan(log_ratio))
      throw ProposalError("proposal produced an undefined acceptance ratio");

    bool accept = log_ratio >= 0.0 ||
                  std::log(rng.uniform01_open()) < log_ratio;
    if (accept) {
      current_ = std::move(cand);
      if (!fast) logp_current_ = logp_cand;
    }
    if (tally_) tally_->record(accept);
    return current_;
  }

  const BackwardTargetContext<M>& context() const { return ctx_; }
  const BoundProposal<M>& proposal() const { return prop_; }

 private:
  BackwardTargetContext<M> ctx_;
  BoundProposal<M> prop_;
  AcceptStats* tally_;
  State current_{};
  double logp_current_ = 0.0;
  bool have_logp_ = false;
};

/// Builds MH kernels for the configured proposal family; the default kernel
/// factory used by the backward pass and the conditional sweep.
template <StateSpaceModel M>
class MhKernelFactory {
 public:
  using Kernel = MhKernel<M>;

  explicit MhKernelFactory(ProposalSpec spec) : spec_(spec) {}

  Kernel make(const BackwardTargetContext<M>& ctx) {
    return Kernel(ctx, bind_proposal(spec_, ctx), &stats_);
  }

  const ProposalSpec& spec() const { return spec_; }
  const AcceptStats& stats() const { return stats_; }
  void reset_stats() { stats_ = AcceptStats{}; }

 private:
  ProposalSpec spec_;
  AcceptStats stats_;
};

/// Test kernel: every proposal is rejected, so the chain never moves and the
/// backward pass reduces to plain backward simulation.
template <StateSpaceModel M>
class RejectAllKernelFactory {
 public:
  class Kernel {
   public:
    using State = typename M::State;
    void seed(State x) { current_ = std::move(x); }
    const State& advance(Rng& rng) {
      rng.uniform01();  // consume like a real kernel would
      return current_;
    }
    const State& current() const { return current_; }

   private:
    State current_{};
  };

  Kernel make(const BackwardTargetContext<M>&) { return Kernel(); }
};

/// Test kernel applying a fixed deterministic map; exposes iterate ordering.
template <StateSpaceModel M, class Fn>
class DeterministicKernelFactory {
 public:
  explicit DeterministicKernelFactory(Fn fn) : fn_(std::move(fn)) {}

  class Kernel {
   public:
    using State = typename M::State;
    Kernel(const Fn* fn) : fn_(fn) {}
    void seed(State x) { current_ = std::move(x); }
    const State& advance(Rng&) {
      current_ = (*fn_)(current_);
      return current_;
    }
    const State& current() const { return current_; }

   private:
    const Fn* fn_;
    State current_{};
  };

  Kernel make(const BackwardTargetContext<M>&) { return Kernel(&fn_); }

 private:
  Fn fn_;
};

}  // namespace espmcmc

#endif  // ESPMCMC_MH_KERNEL_HPP
