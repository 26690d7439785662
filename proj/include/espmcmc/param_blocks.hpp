#ifndef ESPMCMC_PARAM_BLOCKS_HPP
#define ESPMCMC_PARAM_BLOCKS_HPP

#include <functional>
#include <string>
#include <vector>

#include "espmcmc/rng.hpp"
#include "espmcmc/ssm.hpp"

namespace espmcmc {

/// A proposed replacement of one parameter block inside the full vector,
/// with the forward and reverse proposal log densities.
struct BlockProposal {
  Params theta;
  double log_fwd = 0.0;
  double log_rev = 0.0;
};

/// How one theta block is updated.  Blocks in front of the split index are
/// driven by marginal Metropolis-Hastings against fresh likelihood
/// estimates; blocks behind it condition on the retained trajectory, either
/// through an exact conditional draw (gibbs) or a Metropolis-within-Gibbs
/// step (mwg).
template <class Model>
struct ParamBlockUpdate {
  using Path = std::vector<typename Model::State>;
  using Series = ObservationSeries<typename Model::Obs>;

  std::string name;
  std::vector<int> indices;  // positions inside the flat theta vector

  enum class Kind { gibbs, mwg };
  Kind kind = Kind::mwg;

  // marginal MH pieces (used when the block sits in front of the split)
  std::function<BlockProposal(const Params&, Rng&)> pmmh_propose;
  std::function<double(const Params&)> log_prior;
  bool pmmh_reads_trajectory = false;

  // conditional pieces (used behind the split)
  std::function<Params(const Params&, const Path&, const Series&, Rng&)>
      gibbs_draw;
  std::function<BlockProposal(const Params&, const Path&, const Series&, Rng&)>
      mwg_propose;
  std::function<double(const Params&, const Path&, const Series&)>
      cond_logpost;
};

template <class Model>
struct ParamBlocks {
  std::vector<ParamBlockUpdate<Model>> blocks;

  int size() const { return static_cast<int>(blocks.size()); }

  /// Every flat index must be covered exactly once.
  void validate(int param_dim) const {
    std::vector<int> seen(param_dim, 0);
    for (const auto& b : blocks)
      for (int i : b.indices) {
        if (i < 0 || i >= param_dim)
          throw ConfigError("parameter block index out of range");
        ++seen[i];
      }
    for (int c : seen)
      if (c != 1)
        throw ConfigError("parameter blocks must partition the vector");
  }
};

/// Symmetric Gaussian random walk on one coordinate; the standard generic
/// marginal-MH proposal for unconstrained parameters.
inline BlockProposal gaussian_rw_block(const Params& theta, int index,
                                       double step, Rng& rng) {
  BlockProposal p;
  p.theta = theta;
  p.theta[index] = theta[index] + step * rng.normal();
  p.log_fwd = 0.0;
  p.log_rev = 0.0;
  return p;
}

/// Random walk on the log of a positive coordinate.  The returned log
/// densities are with respect to the coordinate itself, so the Jacobian is
/// accounted for.
inline BlockProposal lognormal_rw_block(const Params& theta, int index,
                                        double step, Rng& rng) {
  BlockProposal p;
  p.theta = theta;
  double z = step * rng.normal();
  p.theta[index] = theta[index] * std::exp(z);
  // q(a -> b) = N(log b; log a, step^2) / b
  p.log_fwd = -std::log(p.theta[index]);
  p.log_rev = -std::log(theta[index]);
  return p;
}

}  // namespace espmcmc

#endif  // ESPMCMC_PARAM_BLOCKS_HPP
