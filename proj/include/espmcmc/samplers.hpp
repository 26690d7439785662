#ifndef ESPMCMC_SAMPLERS_HPP
#define ESPMCMC_SAMPLERS_HPP

#include <map>
#include <string>
#include <vector>

#include "espmcmc/csmc.hpp"
#include "espmcmc/param_blocks.hpp"

namespace espmcmc {

enum class Scheme { pimh, pg_smooth, general, bsi };

inline Scheme scheme_from_string(const std::string& s) {
  if (s == "pimh") return Scheme::pimh;
  if (s == "pg-smooth") return Scheme::pg_smooth;
  if (s == "general") return Scheme::general;
  if (s == "bsi") return Scheme::bsi;
  throw ConfigError("unknown scheme: " + s);
}

inline std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::pimh: return "pimh";
    case Scheme::pg_smooth: return "pg-smooth";
    case Scheme::general: return "general";
    case Scheme::bsi: return "bsi";
  }
  return "?";
}

struct SamplerConfig {
  Scheme scheme = Scheme::pg_smooth;
  int num_particles = 20;  // N, applied to every time point
  int mcmc_steps = 5;      // C, applied to every time point before the last
  ProposalSpec proposal;
  int split = 0;  // p1: blocks in front are marginal-MH, the rest conditional
  long sweeps = 1000;
  long warmup = 100;
  int thin = 1;
  std::uint64_t seed = 1;

  void validate(int n_blocks) const {
    proposal.validate();
    if (num_particles < 1) throw ConfigError("N must be >= 1");
    if ((scheme == Scheme::pg_smooth || scheme == Scheme::bsi ||
         scheme == Scheme::general) &&
        num_particles < 2)
      throw ConfigError("conditional sweeps require N >= 2");
    if (mcmc_steps < 1) throw ConfigError("C must be >= 1");
    if (split < 0 || split > n_blocks)
      throw ConfigError("split must lie in [0, #blocks]");
    if (warmup >= sweeps) throw ConfigError("warm-up must be below sweeps");
    if (thin < 1) throw ConfigError("thinning must be >= 1");
  }
};

/// Current position of one Markov chain on the extended space.
template <class Model>
struct ChainState {
  using State = typename Model::State;

  ExtendedState<State> ext;
  RetainedTrajectory<State> retained;
  Params theta;
  double loglik = 0.0;  // cached log marginal-likelihood estimate
  long sweep = 0;
  bool trajectory_fresh = false;

  std::map<std::string, AcceptStats> accepts;
  std::map<std::string, bool> last_accept;

  // instrumentation for the lazy-evaluation contracts
  long long smc_runs = 0;
  long long csmc_runs = 0;
  long long backward_passes = 0;
};

/// Acceptance log ratio of a proposed particle system against the current
/// one: the ratio of the products of per-time weight sums.
template <class State>
double pimh_log_accept_ratio(const ParticleSystem<State>& proposed,
                             const ParticleSystem<State>& current) {
  double s = 0.0;
  for (int t = 0; t < proposed.horizon(); ++t)
    s += proposed.log_weight_sum[t] - current.log_weight_sum[t];
  return s;
}

namespace detail {

// Children of the per-sweep stream, one per draw site.
inline constexpr std::uint64_t kSmcStream = 1;
inline constexpr std::uint64_t kBackwardStream = 2;
inline constexpr std::uint64_t kCsmcStream = 3;
inline constexpr std::uint64_t kAcceptStream = 4;
inline constexpr std::uint64_t kBlockStreamBase = 32;

template <class Model, class KernelFactory>
void refresh_selection(const Model& model,
                       const ObservationSeries<typename Model::Obs>& y,
                       ChainState<Model>& chain, std::span<const int> C,
                       KernelFactory& kernels, Rng stream) {
  run_backward_pass(model, chain.theta, y, chain.ext, C, kernels, stream);
  chain.retained.path = extract_trajectory(chain.ext);
  chain.retained.last_slot = chain.ext.selected.back();
  chain.trajectory_fresh = true;
  ++chain.backward_passes;
}

}  // namespace detail

/// Draws (B, X~) for the current particle system when they are stale; a
/// valid conditional move at any point, used by the lazy-evaluation paths.
template <class Model, class KernelFactory>
void materialize_trajectory(const Model& model,
                            const ObservationSeries<typename Model::Obs>& y,
                            ChainState<Model>& chain, std::span<const int> C,
                            KernelFactory& kernels, Rng stream) {
  if (!chain.trajectory_fresh)
    detail::refresh_selection(model, y, chain, C, kernels, stream);
}

/// Sets up a chain by one unconditional filter sweep plus a backward pass
/// (index-only for the baseline scheme).
template <class Model, class KernelFactory>
ChainState<Model> init_chain(const Model& model, const Params& theta0,
                             const ObservationSeries<typename Model::Obs>& y,
                             const SamplerConfig& cfg, KernelFactory& kernels) {
  const int T = y.horizon();
  std::vector<int> counts(T, cfg.num_particles);
  std::vector<int> C(T - 1, cfg.mcmc_steps);

  ChainState<Model> chain;
  chain.theta = theta0;
  Rng stream = Rng(cfg.seed).substream(0);
  chain.ext.ps =
      run_smc(model, theta0, y, counts, stream.substream(detail::kSmcStream));
  ++chain.smc_runs;
  chain.loglik = log_marginal_likelihood_estimate(chain.ext.ps);

  if (cfg.scheme == Scheme::bsi) {
    std::vector<int> B = run_backward_simulation(
        model, theta0, chain.ext.ps, stream.substream(detail::kBackwardStream));
    chain.ext.selected = B;
    chain.retained.path.resize(T);
    for (int t = 0; t < T; ++t)
      chain.retained.path[t] = chain.ext.ps.states[t][B[t]];
    chain.retained.last_slot = B[T - 1];
    chain.trajectory_fresh = true;
  } else {
    detail::refresh_selection(model, y, chain, C, kernels,
                              stream.substream(detail::kBackwardStream));
  }
  return chain;
}

/// Particle independent MH sweep: propose a fresh filter sweep, accept on
/// the ratio of weight-sum products, and run the backward pass only when the
/// proposal is accepted.
template <class Model, class KernelFactory>
void pimh_sweep(const Model& model,
                const ObservationSeries<typename Model::Obs>& y,
                ChainState<Model>& chain, const SamplerConfig& cfg,
                KernelFactory& kernels, Rng sweep_stream) {
  const int T = y.horizon();
  std::vector<int> counts(T, cfg.num_particles);
  std::vector<int> C(T - 1, cfg.mcmc_steps);

  ParticleSystem<typename Model::State> proposal = run_smc(
      model, chain.theta, y, counts, sweep_stream.substream(detail::kSmcStream));
  ++chain.smc_runs;
  double log_ratio = pimh_log_accept_ratio(proposal, chain.ext.ps);
  Rng acc = sweep_stream.substream(detail::kAcceptStream);
  bool accept =
      log_ratio >= 0.0 || std::log(acc.uniform01_open()) < log_ratio;
  if (accept) {
    chain.ext.ps = std::move(proposal);
    chain.loglik = log_marginal_likelihood_estimate(chain.ext.ps);
    detail::refresh_selection(model, y, chain, C, kernels,
                              sweep_stream.substream(detail::kBackwardStream));
  }
  chain.accepts["pimh"].record(accept);
  chain.last_accept["pimh"] = accept;
  ++chain.sweep;
}

/// Particle Gibbs smoothing sweep: conditional SMC around the retained
/// trajectory, then a fresh backward pass.  Never rejects.
template <class Model, class KernelFactory>
void pg_smooth_sweep(const Model& model,
                     const ObservationSeries<typename Model::Obs>& y,
                     ChainState<Model>& chain, const SamplerConfig& cfg,
                     KernelFactory& kernels, Rng sweep_stream) {
  const int T = y.horizon();
  std::vector<int> counts(T, cfg.num_particles);
  std::vector<int> C(T - 1, cfg.mcmc_steps);

  chain.ext = run_csmc(model, chain.theta, y, chain.retained, counts, C,
                       kernels, sweep_stream.substream(detail::kCsmcStream));
  ++chain.csmc_runs;
  chain.loglik = log_marginal_likelihood_estimate(chain.ext.ps);
  detail::refresh_selection(model, y, chain, C, kernels,
                            sweep_stream.substream(detail::kBackwardStream));
  chain.accepts["pg"].record(true);
  chain.last_accept["pg"] = true;
  ++chain.sweep;
}

/// Baseline sweep: conditional SMC retaining a single path, then index-only
/// backward draws with no MCMC moves.
template <class Model>
void bsi_sweep(const Model& model,
               const ObservationSeries<typename Model::Obs>& y,
               ChainState<Model>& chain, const SamplerConfig& cfg,
               Rng sweep_stream) {
  const int T = y.horizon();
  std::vector<int> counts(T, cfg.num_particles);

  RetainedSlots<typename Model::State> slots;
  slots.slots = chain.ext.selected;
  slots.states = chain.retained.path;
  chain.ext.ps = run_smc(model, chain.theta, y, counts,
                         sweep_stream.substream(detail::kSmcStream), &slots);
  ++chain.smc_runs;
  std::vector<int> B =
      run_backward_simulation(model, chain.theta, chain.ext.ps,
                              sweep_stream.substream(detail::kBackwardStream));
  chain.ext.selected = B;
  for (int t = 0; t < T; ++t)
    chain.retained.path[t] = chain.ext.ps.states[t][B[t]];
  chain.retained.last_slot = B[T - 1];
  chain.loglik = log_marginal_likelihood_estimate(chain.ext.ps);
  chain.accepts["bsi"].record(true);
  chain.last_accept["bsi"] = true;
  ++chain.sweep;
}

/// One sweep of the general sampler: marginal-MH blocks in front of the
/// split (fresh filter sweep per proposal, backward pass deferred), then
/// conditional blocks against the retained trajectory (conditional SMC only
/// on acceptance), then a single backward pass after the last block.
template <class Model, class KernelFactory>
void general_sweep(const Model& model,
                   const ObservationSeries<typename Model::Obs>& y,
                   const ParamBlocks<Model>& blocks, ChainState<Model>& chain,
                   const SamplerConfig& cfg, KernelFactory& kernels,
                   Rng sweep_stream) {
  const int T = y.horizon();
  std::vector<int> counts(T, cfg.num_particles);
  std::vector<int> C(T - 1, cfg.mcmc_steps);
  const int p = blocks.size();
  const int p1 = cfg.split;

  for (int i = 0; i < p; ++i) {
    const ParamBlockUpdate<Model>& block = blocks.blocks[i];
    Rng bstream = sweep_stream.substream(detail::kBlockStreamBase + i);
    bool accept = false;

    if (i < p1) {
      if (!block.pmmh_propose || !block.log_prior)
        throw ConfigError("block '" + block.name +
                          "' has no marginal-MH proposal");
      if (block.pmmh_reads_trajectory)
        materialize_trajectory(model, y, chain, C, kernels,
                               bstream.substream(0));
      BlockProposal prop = block.pmmh_propose(chain.theta, bstream);
      ParticleSystem<typename Model::State> ps_prop = run_smc(
          model, prop.theta, y, counts, bstream.substream(detail::kSmcStream));
      ++chain.smc_runs;
      double est = log_marginal_likelihood_estimate(ps_prop);
      double log_ratio = est - chain.loglik + block.log_prior(prop.theta) -
                         block.log_prior(chain.theta) + prop.log_rev -
                         prop.log_fwd;
      Rng acc = bstream.substream(detail::kAcceptStream);
      accept =
          log_ratio >= 0.0 || std::log(acc.uniform01_open()) < log_ratio;
      if (accept) {
        chain.theta = prop.theta;
        chain.ext.ps = std::move(ps_prop);
        chain.loglik = est;
        chain.trajectory_fresh = false;  // backward pass deferred
      }
    } else {
      // conditional moves need a fresh retained trajectory
      materialize_trajectory(model, y, chain, C, kernels, bstream.substream(0));
      if (block.kind == ParamBlockUpdate<Model>::Kind::gibbs) {
        if (!block.gibbs_draw)
          throw ConfigError("block '" + block.name + "' has no gibbs draw");
        chain.theta =
            block.gibbs_draw(chain.theta, chain.retained.path, y, bstream);
        accept = true;
      } else {
        if (!block.mwg_propose || !block.cond_logpost)
          throw ConfigError("block '" + block.name +
                            "' has no conditional MH update");
        BlockProposal prop =
            block.mwg_propose(chain.theta, chain.retained.path, y, bstream);
        double log_ratio =
            block.cond_logpost(prop.theta, chain.retained.path, y) -
            block.cond_logpost(chain.theta, chain.retained.path, y) +
            prop.log_rev - prop.log_fwd;
        Rng acc = bstream.substream(detail::kAcceptStream);
        accept =
            log_ratio >= 0.0 || std::log(acc.uniform01_open()) < log_ratio;
        if (accept) chain.theta = prop.theta;
      }
      if (accept) {
        chain.ext =
            run_csmc(model, chain.theta, y, chain.retained, counts, C, kernels,
                     bstream.substream(detail::kCsmcStream));
        ++chain.csmc_runs;
        chain.loglik = log_marginal_likelihood_estimate(chain.ext.ps);
      }
    }
    chain.accepts[block.name].record(accept);
    chain.last_accept[block.name] = accept;
  }

  if (p1 < p) {
    // final conditional draw of (B, X~) for the sweep
    detail::refresh_selection(model, y, chain, C, kernels,
                              sweep_stream.substream(detail::kBackwardStream));
  }
  ++chain.sweep;
}

/// Runs a chain for cfg.sweeps sweeps, invoking `observer(chain)` after each
/// one.  Warm-up discard and thinning belong to the recording layer; the
/// chain itself is never thinned.
template <class Model, class KernelFactory, class Observer>
ChainState<Model> run_chain(const Model& model, const Params& theta0,
                            const ObservationSeries<typename Model::Obs>& y,
                            const ParamBlocks<Model>* blocks,
                            const SamplerConfig& cfg, KernelFactory& kernels,
                            Observer&& observer) {
  cfg.validate(blocks ? blocks->size() : 0);
  if (cfg.scheme == Scheme::general && (!blocks || blocks->size() == 0))
    throw ConfigError("general sampler needs parameter blocks");

  ChainState<Model> chain = init_chain(model, theta0, y, cfg, kernels);
  Rng root(cfg.seed);
  const int T = y.horizon();
  std::vector<int> C(T - 1, cfg.mcmc_steps);
  for (long s = 1; s <= cfg.sweeps; ++s) {
    Rng sweep_stream = root.substream(static_cast<std::uint64_t>(s));
    switch (cfg.scheme) {
      case Scheme::pimh:
        pimh_sweep(model, y, chain, cfg, kernels, sweep_stream);
        break;
      case Scheme::pg_smooth:
        pg_smooth_sweep(model, y, chain, cfg, kernels, sweep_stream);
        break;
      case Scheme::bsi:
        bsi_sweep(model, y, chain, cfg, sweep_stream);
        break;
      case Scheme::general:
        general_sweep(model, y, *blocks, chain, cfg, kernels, sweep_stream);
        break;
    }
    observer(chain);
  }
  return chain;
}

}  // namespace espmcmc

#endif  // ESPMCMC_SAMPLERS_HPP
