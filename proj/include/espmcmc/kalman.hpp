#ifndef ESPMCMC_KALMAN_HPP
#define ESPMCMC_KALMAN_HPP

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "espmcmc/errors.hpp"
#include "espmcmc/math.hpp"

namespace espmcmc {

/// Scalar linear-Gaussian state-space model
///   x_1 ~ N(m1, p1),  x_t = a + phi x_{t-1} + w_t,  w ~ N(0, q),
///   y_t = c x_t + v_t,  v ~ N(0, r).
/// Exact filter/smoother used as the reference for likelihood and
/// proposal-moment checks.
struct KalmanSpec {
  double phi = 0.9;
  double q = 1.0;
  double r = 1.0;
  double a = 0.0;
  double c = 1.0;
  double m1 = 0.0;
  double p1 = 1.0;
};

struct KalmanResult {
  double loglik = 0.0;
  std::vector<double> filtered_mean, filtered_var;    // m_t, P_t
  std::vector<double> predicted_mean, predicted_var;  // before update
  std::vector<double> smoothed_mean, smoothed_var;    // RTS
};

inline KalmanResult kalman_filter_smoother(const KalmanSpec& k,
                                           const std::vector<double>& y) {
  const int T = static_cast<int>(y.size());
  if (T < 1) throw InputError("kalman: empty series");
  KalmanResult out;
  out.filtered_mean.resize(T);
  out.filtered_var.resize(T);
  out.predicted_mean.resize(T);
  out.predicted_var.resize(T);

  double m = 0.0, P = 0.0;
  for (int t = 0; t < T; ++t) {
    double mp = (t == 0) ? k.m1 : k.a + k.phi * m;
    double Pp = (t == 0) ? k.p1 : k.phi * k.phi * P + k.q;
    double S = k.c * k.c * Pp + k.r;
    if (S <= 0.0) throw NumericalError("kalman: non-positive innovation var");
    out.loglik += log_normal_pdf(y[t], k.c * mp, S);
    double K = Pp * k.c / S;
    m = mp + K * (y[t] - k.c * mp);
    P = (1.0 - K * k.c) * Pp;
    out.predicted_mean[t] = mp;
    out.predicted_var[t] = Pp;
    out.filtered_mean[t] = m;
    out.filtered_var[t] = P;
  }

  out.smoothed_mean = out.filtered_mean;
  out.smoothed_var = out.filtered_var;
  for (int t = T - 2; t >= 0; --t) {
    double J = out.filtered_var[t] * k.phi / out.predicted_var[t + 1];
    out.smoothed_mean[t] =
        out.filtered_mean[t] +
        J * (out.smoothed_mean[t + 1] - out.predicted_mean[t + 1]);
    out.smoothed_var[t] =
        out.filtered_var[t] +
        J * J * (out.smoothed_var[t + 1] - out.predicted_var[t + 1]);
  }
  return out;
}

/// Moments of p(x_t | y_{1:t}, x_{t+1}) from the filtered moments at t.
/// This is the exact one-step conditional-smoothing distribution.
struct ConditionalMoments {
  double mean;
  double var;
};

inline ConditionalMoments kalman_conditional_on_next(const KalmanSpec& k,
                                                     double filtered_mean,
                                                     double filtered_var,
                                                     double next_state) {
  double denom = k.phi * k.phi * filtered_var + k.q;
  if (denom <= 0.0) throw NumericalError("kalman: singular one-step variance");
  double gain = filtered_var * k.phi / denom;
  return {filtered_mean + gain * (next_state - k.a - k.phi * filtered_mean),
          filtered_var - gain * k.phi * filtered_var};
}

/// Dense joint-Gaussian computation of the likelihood and the smoothing
/// moments; O(T^3), used only to cross-check the recursions.
struct DenseJointResult {
  double loglik;
  Eigen::VectorXd smoothed_mean;
  Eigen::MatrixXd smoothed_cov;
};

inline DenseJointResult kalman_dense_joint(const KalmanSpec& k,
                                           const std::vector<double>& y) {
  const int T = static_cast<int>(y.size());
  Eigen::VectorXd mx(T);
  for (int t = 0; t < T; ++t) mx[t] = (t == 0) ? k.m1 : k.a + k.phi * mx[t - 1];
  Eigen::MatrixXd Sxx = Eigen::MatrixXd::Zero(T, T);
  for (int t = 0; t < T; ++t) {
    Sxx(t, t) = (t == 0) ? k.p1 : k.phi * k.phi * Sxx(t - 1, t - 1) + k.q;
    for (int s = t + 1; s < T; ++s) Sxx(t, s) = Sxx(s, t) = 0.0;
  }
  for (int t = 0; t < T; ++t)
    for (int s = t + 1; s < T; ++s)
      Sxx(t, s) = Sxx(s, t) = std::pow(k.phi, s - t) * Sxx(t, t);

  Eigen::MatrixXd Syy = k.c * k.c * Sxx +
                        k.r * Eigen::MatrixXd::Identity(T, T);
  Eigen::MatrixXd Sxy = k.c * Sxx;
  Eigen::VectorXd my = k.c * mx;
  Eigen::VectorXd yv(T);
  for (int t = 0; t < T; ++t) yv[t] = y[t];

  Eigen::LLT<Eigen::MatrixXd> llt(Syy);
  if (llt.info() != Eigen::Success)
    throw NumericalError("kalman dense: observation covariance not PD");
  Eigen::VectorXd d = yv - my;
  Eigen::VectorXd alpha = llt.solve(d);
  double logdet = 0.0;
  for (int t = 0; t < T; ++t) logdet += 2.0 * std::log(llt.matrixL()(t, t));
  DenseJointResult out;
  out.loglik = -0.5 * (T * log_two_pi + logdet + d.dot(alpha));
  out.smoothed_mean = mx + Sxy * alpha;
  out.smoothed_cov = Sxx - Sxy * llt.solve(Sxy.transpose());
  return out;
}

}  // namespace espmcmc

#endif  // ESPMCMC_KALMAN_HPP
