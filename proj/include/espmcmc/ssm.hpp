#ifndef ESPMCMC_SSM_HPP
#define ESPMCMC_SSM_HPP

#include <Eigen/Dense>
#include <concepts>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "espmcmc/errors.hpp"
#include "espmcmc/rng.hpp"

namespace espmcmc {

/// Flat parameter vector; each model documents its layout.
using Params = Eigen::VectorXd;

/// Gaussian-linear approximation of the state evolution into time t+1:
/// x_{t+1} = shift + slope * x_t + u,  u ~ N(0, noise_cov).
struct Linearization {
  Eigen::VectorXd shift;
  Eigen::MatrixXd slope;
  Eigen::MatrixXd noise_cov;
};

/// A state-space model supplies log densities and exact samplers for the
/// initial, transition and observation distributions, plus an importance
/// density M used by the particle filter.  Models are immutable after
/// construction; all randomness enters through Rng handles.
///
/// Time indices are 0-based throughout: log_ft(t, x, xp, th) is the density
/// of the state at index t (1 <= t <= T-1) given its predecessor, and
/// log_gt/log_Mt take the index of the current state.
template <class M>
concept StateSpaceModel = requires(const M m, const typename M::State x,
                                   const typename M::Obs y, const Params th,
                                   Rng rng, int t) {
  { m.state_dim() } -> std::convertible_to<int>;
  { m.log_f1(x, th) } -> std::convertible_to<double>;
  { m.sample_f1(th, rng) } -> std::convertible_to<typename M::State>;
  { m.log_ft(t, x, x, th) } -> std::convertible_to<double>;
  { m.sample_ft(t, x, th, rng) } -> std::convertible_to<typename M::State>;
  { m.log_gt(t, y, x, th) } -> std::convertible_to<double>;
  { m.sample_gt(t, x, th, rng) } -> std::convertible_to<typename M::Obs>;
  { m.log_M1(y, x, th) } -> std::convertible_to<double>;
  { m.sample_M1(y, th, rng) } -> std::convertible_to<typename M::State>;
  { m.log_Mt(t, y, x, x, th) } -> std::convertible_to<double>;
  { m.sample_Mt(t, y, x, th, rng) } -> std::convertible_to<typename M::State>;
  { m.linearization(t, th) } -> std::convertible_to<std::optional<Linearization>>;
};

/// Observation sequence; the record type is model-defined.
template <class Obs>
class ObservationSeries {
 public:
  ObservationSeries() = default;
  explicit ObservationSeries(std::vector<Obs> values)
      : values_(std::move(values)) {
    if (values_.size() < 2)
      throw InputError("ObservationSeries requires T >= 2");
  }

  int horizon() const { return static_cast<int>(values_.size()); }
  const Obs& operator[](int t) const { return values_[static_cast<std::size_t>(t)]; }
  const std::vector<Obs>& values() const { return values_; }

 private:
  std::vector<Obs> values_;
};

/// Joint log density of states and observations:
/// log g_1 + log f_1 + sum_{t>=2} (log g_t + log f_t).
template <StateSpaceModel M>
double log_joint(const M& model, const Params& theta,
                 std::span<const typename M::State> states,
                 const ObservationSeries<typename M::Obs>& y) {
  const int T = y.horizon();
  if (static_cast<int>(states.size()) != T)
    throw InputError("log_joint: state and observation lengths differ");
  double lp = model.log_f1(states[0], theta) +
              model.log_gt(0, y[0], states[0], theta);
  for (int t = 1; t < T; ++t) {
    lp += model.log_ft(t, states[t], states[t - 1], theta) +
          model.log_gt(t, y[t], states[t], theta);
  }
  return lp;
}

template <class M>
struct SimulatedPath {
  std::vector<typename M::State> states;
  ObservationSeries<typename M::Obs> obs;
};

/// Draws x_1 ~ f_1, x_t ~ f_t, y_t ~ g_t; deterministic given the stream.
template <StateSpaceModel M>
SimulatedPath<M> simulate(const M& model, const Params& theta, int T,
                          Rng stream) {
  if (T < 2) throw InputError("simulate requires T >= 2");
  std::vector<typename M::State> x;
  std::vector<typename M::Obs> y;
  x.reserve(T);
  y.reserve(T);
  for (int t = 0; t < T; ++t) {
    Rng r = stream.substream(t);
    x.push_back(t == 0 ? model.sample_f1(theta, r)
                       : model.sample_ft(t, x.back(), theta, r));
    y.push_back(model.sample_gt(t, x.back(), theta, r));
  }
  return {std::move(x), ObservationSeries<typename M::Obs>(std::move(y))};
}

}  // namespace espmcmc

#endif  // ESPMCMC_SSM_HPP
