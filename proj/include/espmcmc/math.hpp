#ifndef ESPMCMC_MATH_HPP
#define ESPMCMC_MATH_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "espmcmc/errors.hpp"
#include "espmcmc/rng.hpp"

namespace espmcmc {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();
inline constexpr double log_two_pi = 1.8378770664093454835606594728112;

/// log(sum_i exp(v_i)) with max-shift; returns -inf when every term is -inf.
inline double log_sum_exp(std::span<const double> v) {
  double m = neg_inf;
  for (double x : v)
    if (x > m) m = x;
  if (m == neg_inf) return neg_inf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

inline double log_sum_exp(const std::vector<double>& v) {
  return log_sum_exp(std::span<const double>(v));
}

/// Normalizes log weights into probabilities; returns log of the weight sum.
/// Throws if every weight is zero.
inline double normalize_log_weights(std::span<const double> logw,
                                    std::span<double> out,
                                    const char* what = "weights") {
  double lse = log_sum_exp(logw);
  if (lse == neg_inf) throw DegenerateWeightsError(what, -1);
  for (std::size_t i = 0; i < logw.size(); ++i)
    out[i] = std::exp(logw[i] - lse);
  return lse;
}

inline double log_normal_pdf(double x, double mean, double var) {
  double d = x - mean;
  return -0.5 * (log_two_pi + std::log(var) + d * d / var);
}

/// Binomial log-pmf via lgamma.
inline double log_binomial_pmf(int k, int n, double p) {
  if (k < 0 || k > n) return neg_inf;
  if (p <= 0.0) return k == 0 ? 0.0 : neg_inf;
  if (p >= 1.0) return k == n ? 0.0 : neg_inf;
  double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
              std::lgamma(n - k + 1.0);
  return lc + k * std::log(p) + (n - k) * std::log1p(-p);
}

inline double log_inverse_gamma_pdf(double x, double shape, double scale) {
  if (x <= 0.0) return neg_inf;
  return shape * std::log(scale) - std::lgamma(shape) -
         (shape + 1.0) * std::log(x) - scale / x;
}

/// Half-t density on (0, inf) with `dof` degrees of freedom and scale A.
inline double log_half_t_pdf(double x, double dof, double scale) {
  if (x <= 0.0) return neg_inf;
  double z = x / scale;
  double lc = std::lgamma(0.5 * (dof + 1.0)) - std::lgamma(0.5 * dof) -
              0.5 * std::log(dof * M_PI) - std::log(scale) + std::log(2.0);
  return lc - 0.5 * (dof + 1.0) * std::log1p(z * z / dof);
}

/// Symmetrize then add the covariance jitter used before factorizations:
/// 1e-9 * trace/dim on the diagonal, or 1e-12 absolute when the trace is 0.
inline Eigen::MatrixXd jittered_covariance(const Eigen::MatrixXd& cov) {
  Eigen::MatrixXd s = 0.5 * (cov + cov.transpose());
  const int d = static_cast<int>(s.rows());
  double tr = s.trace();
  double eps = tr > 0.0 ? 1e-9 * tr / d : 1e-12;
  s.diagonal().array() += eps;
  return s;
}

/// Cholesky factor of a jittered covariance; throws ProposalError when the
/// matrix is not positive-definite even after jitter.
inline Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& cov) {
  Eigen::MatrixXd s = jittered_covariance(cov);
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success)
    throw ProposalError("covariance not positive-definite after jitter");
  return llt.matrixL();
}

struct MvNormal {
  Eigen::VectorXd mean;
  Eigen::MatrixXd chol;  // lower triangular
  double log_det_cov;    // log |Sigma|

  static MvNormal from_moments(const Eigen::VectorXd& mean,
                               const Eigen::MatrixXd& cov) {
    MvNormal g;
    g.mean = mean;
    g.chol = cholesky_with_jitter(cov);
    g.log_det_cov = 2.0 * g.chol.diagonal().array().log().sum();
    return g;
  }

  Eigen::VectorXd sample(Rng& rng) const {
    Eigen::VectorXd z(mean.size());
    for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
    return mean + chol * z;
  }

  double log_pdf(const Eigen::VectorXd& x) const {
    Eigen::VectorXd z = chol.triangularView<Eigen::Lower>().solve(x - mean);
    return -0.5 * (mean.size() * log_two_pi + log_det_cov + z.squaredNorm());
  }
};

/// Elliptical Student-t: location/shape-matrix parametrization.  The shape
/// matrix equals the Gaussian covariance that would be used in its place, so
/// the t has fatter tails and variance shape * dof/(dof-2).
struct MvStudentT {
  Eigen::VectorXd mean;
  Eigen::MatrixXd chol;
  double log_det_shape;
  double dof;

  static MvStudentT from_moments(const Eigen::VectorXd& mean,
                                 const Eigen::MatrixXd& shape, double dof) {
    MvStudentT t;
    t.mean = mean;
    t.chol = cholesky_with_jitter(shape);
    t.log_det_shape = 2.0 * t.chol.diagonal().array().log().sum();
    t.dof = dof;
    return t;
  }

  Eigen::VectorXd sample(Rng& rng) const {
    Eigen::VectorXd z(mean.size());
    for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
    double g = rng.chi_squared(dof) / dof;
    return mean + (chol * z) / std::sqrt(g);
  }

  double log_pdf(const Eigen::VectorXd& x) const {
    const double d = static_cast<double>(mean.size());
    Eigen::VectorXd z = chol.triangularView<Eigen::Lower>().solve(x - mean);
    double q = z.squaredNorm();
    return std::lgamma(0.5 * (dof + d)) - std::lgamma(0.5 * dof) -
           0.5 * d * std::log(dof * M_PI) - 0.5 * log_det_shape -
           0.5 * (dof + d) * std::log1p(q / dof);
  }
};

}  // namespace espmcmc

#endif  // ESPMCMC_MATH_HPP
