#ifndef ESPMCMC_MODELS_LINEAR_GAUSSIAN_HPP
#define ESPMCMC_MODELS_LINEAR_GAUSSIAN_HPP

#include <cmath>
#include <optional>

#include "espmcmc/kalman.hpp"
#include "espmcmc/math.hpp"
#include "espmcmc/ssm.hpp"

namespace espmcmc::models {

/// AR(1) plus Gaussian observation noise; the oracle-checkable test fixture.
///   x_1 ~ N(m1, p1),  x_t = phi x_{t-1} + w,  w ~ N(0, q),
///   y_t = x_t + v,  v ~ N(0, r).
/// theta = [phi, q, r, m1, p1].  Bootstrap importance density (M = f).
class LinearGaussianSsm {
 public:
  using State = double;
  using Obs = double;

  static constexpr int kPhi = 0, kStateVar = 1, kObsVar = 2, kInitMean = 3,
                       kInitVar = 4;

  int state_dim() const { return 1; }

  static Params make_params(double phi, double q, double r, double m1,
                            double p1) {
    Params th(5);
    th << phi, q, r, m1, p1;
    return th;
  }

  KalmanSpec kalman_spec(const Params& th) const {
    KalmanSpec k;
    k.phi = th[kPhi];
    k.q = th[kStateVar];
    k.r = th[kObsVar];
    k.m1 = th[kInitMean];
    k.p1 = th[kInitVar];
    return k;
  }

  double log_f1(State x, const Params& th) const {
    return log_normal_pdf(x, th[kInitMean], th[kInitVar]);
  }
  State sample_f1(const Params& th, Rng& rng) const {
    return rng.normal(th[kInitMean], std::sqrt(th[kInitVar]));
  }

  double log_ft(int, State x, State xp, const Params& th) const {
    return log_normal_pdf(x, th[kPhi] * xp, th[kStateVar]);
  }
  State sample_ft(int, State xp, const Params& th, Rng& rng) const {
    return rng.normal(th[kPhi] * xp, std::sqrt(th[kStateVar]));
  }

  double log_gt(int, Obs y, State x, const Params& th) const {
    return log_normal_pdf(y, x, th[kObsVar]);
  }
  Obs sample_gt(int, State x, const Params& th, Rng& rng) const {
    return rng.normal(x, std::sqrt(th[kObsVar]));
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

  std::optional<Linearization> linearization(int, const Params& th) const {
    Linearization lin;
    lin.shift = Eigen::VectorXd::Zero(1);
    lin.slope = Eigen::MatrixXd::Constant(1, 1, th[kPhi]);
    lin.noise_cov = Eigen::MatrixXd::Constant(1, 1, th[kStateVar]);
    return lin;
  }
};

}  // namespace espmcmc::models

#endif  // ESPMCMC_MODELS_LINEAR_GAUSSIAN_HPP
