#ifndef ESPMCMC_STATE_TRAITS_HPP
#define ESPMCMC_STATE_TRAITS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <type_traits>

namespace espmcmc {

/// Bridges model state types and the Eigen vectors used by the moment-based
/// proposal machinery.  Discrete states (int) have no continuous bridge; the
/// moment-based families are compile-time unavailable for them.
template <class State>
struct StateTraits;

template <>
struct StateTraits<double> {
  static constexpr bool is_continuous = true;
  static int dim(const double&) { return 1; }
  static Eigen::VectorXd to_vector(const double& x) {
    Eigen::VectorXd v(1);
    v[0] = x;
    return v;
  }
  static double from_vector(const Eigen::VectorXd& v) { return v[0]; }
  static bool is_finite(const double& x) { return std::isfinite(x); }
};

template <>
struct StateTraits<Eigen::VectorXd> {
  static constexpr bool is_continuous = true;
  static int dim(const Eigen::VectorXd& x) { return static_cast<int>(x.size()); }
  static const Eigen::VectorXd& to_vector(const Eigen::VectorXd& x) { return x; }
  static Eigen::VectorXd from_vector(const Eigen::VectorXd& v) { return v; }
  static bool is_finite(const Eigen::VectorXd& x) { return x.allFinite(); }
};

template <>
struct StateTraits<int> {
  static constexpr bool is_continuous = false;
  static bool is_finite(const int&) { return true; }
};

template <class State>
inline constexpr bool is_continuous_state_v = StateTraits<State>::is_continuous;

}  // namespace espmcmc

#endif  // ESPMCMC_STATE_TRAITS_HPP
