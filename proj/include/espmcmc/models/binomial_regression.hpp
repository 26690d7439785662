#ifndef ESPMCMC_MODELS_BINOMIAL_REGRESSION_HPP
#define ESPMCMC_MODELS_BINOMIAL_REGRESSION_HPP

#include <cmath>
#include <optional>

#include "espmcmc/math.hpp"
#include "espmcmc/param_blocks.hpp"
#include "espmcmc/ssm.hpp"

namespace espmcmc::models {

/// Observation record for the binomial regression: the count, the number of
/// trials and the covariate vector all belong to the data.
struct BinRegObs {
  int successes = 0;
  int trials = 0;
  Eigen::VectorXd covariates;
};

/// Binomial observations with time-varying regression coefficients.
///   y_t ~ Binomial(n_t, p_t),  logit p_t = beta0 + beta_t' z_t,
///   beta_t = beta_{t-1} + diag(tau) eta_t,  beta_0 = 0.
/// theta = [beta0, tau_1^2, ..., tau_m^2].  Priors beta0 ~ N(0, 5^2),
/// tau_i^2 ~ IG(1, 0.5).  Bootstrap importance density.
class BinomialRegression {
 public:
  using State = Eigen::VectorXd;
  using Obs = BinRegObs;

  static constexpr int kBeta0 = 0;
  static constexpr double kBeta0PriorVar = 25.0;
  static constexpr double kTauShape = 1.0, kTauScale = 0.5;

  // defaults reproduce the simulated design: n_t ~ Binomial(100, 0.5),
  // z_{i,t} ~ U(-1, 1)
  explicit BinomialRegression(int m = 4, int design_trials = 100,
                              double design_rate = 0.5)
      : m_(m), design_trials_(design_trials), design_rate_(design_rate) {}

  int state_dim() const { return m_; }
  int num_covariates() const { return m_; }

  Params make_params(double beta0, const Eigen::VectorXd& tau2) const {
    Params th(1 + m_);
    th[kBeta0] = beta0;
    for (int i = 0; i < m_; ++i) th[1 + i] = tau2[i];
    return th;
  }

  static double logistic(double a) { return 1.0 / (1.0 + std::exp(-a)); }

  double success_prob(const Obs& y, const State& x, const Params& th) const {
    return logistic(th[kBeta0] + y.covariates.dot(x));
  }

  double log_f1(const State& x, const Params& th) const {
    double lp = 0.0;
    for (int i = 0; i < m_; ++i) lp += log_normal_pdf(x[i], 0.0, th[1 + i]);
    return lp;
  }
  State sample_f1(const Params& th, Rng& rng) const {
    State x(m_);
    for (int i = 0; i < m_; ++i) x[i] = rng.normal(0.0, std::sqrt(th[1 + i]));
    return x;
  }

  double log_ft(int, const State& x, const State& xp, const Params& th) const {
    double lp = 0.0;
    for (int i = 0; i < m_; ++i) lp += log_normal_pdf(x[i], xp[i], th[1 + i]);
    return lp;
  }
  State sample_ft(int, const State& xp, const Params& th, Rng& rng) const {
    State x(m_);
    for (int i = 0; i < m_; ++i)
      x[i] = rng.normal(xp[i], std::sqrt(th[1 + i]));
    return x;
  }

  double log_gt(int, const Obs& y, const State& x, const Params& th) const {
    return log_binomial_pmf(y.successes, y.trials, success_prob(y, x, th));
  }
  Obs sample_gt(int, const State& x, const Params& th, Rng& rng) const {
    Obs y;
    y.trials = rng.binomial(design_trials_, design_rate_);
    y.covariates = Eigen::VectorXd(m_);
    for (int i = 0; i < m_; ++i) y.covariates[i] = rng.uniform(-1.0, 1.0);
    y.successes = rng.binomial(y.trials, success_prob(y, x, th));
    return y;
  }

  double log_M1(const Obs&, const State& x, const Params& th) const {
    return log_f1(x, th);
  }
  State sample_M1(const Obs&, const Params& th, Rng& rng) const {
    return sample_f1(th, rng);
  }
  double log_Mt(int t, const Obs&, const State& x, const State& xp,
                const Params& th) const {
    return log_ft(t, x, xp, th);
  }
  State sample_Mt(int t, const Obs&, const State& xp, const Params& th,
                  Rng& rng) const {
    return sample_ft(t, xp, th, rng);
  }

  /// The random-walk evolution is exactly linear-Gaussian.
  std::optional<Linearization> linearization(int, const Params& th) const {
    Linearization lin;
    lin.shift = Eigen::VectorXd::Zero(m_);
    lin.slope = Eigen::MatrixXd::Identity(m_, m_);
    lin.noise_cov = Eigen::MatrixXd::Zero(m_, m_);
    for (int i = 0; i < m_; ++i) lin.noise_cov(i, i) = th[1 + i];
    return lin;
  }

  double log_prior(const Params& th) const {
    double lp = log_normal_pdf(th[kBeta0], 0.0, kBeta0PriorVar);
    for (int i = 0; i < m_; ++i)
      lp += log_inverse_gamma_pdf(th[1 + i], kTauShape, kTauScale);
    return lp;
  }

  /// The intercept moves by a scalar Gaussian random walk; each tau_i^2 has
  /// an exact inverse-gamma conditional given the trajectory (the first
  /// transition starts from the zero vector).
  ParamBlocks<BinomialRegression> parameter_blocks(
      double beta0_step = 0.1) const {
    using B = ParamBlockUpdate<BinomialRegression>;
    ParamBlocks<BinomialRegression> out;
    const int m = m_;

    B intercept;
    intercept.name = "beta0";
    intercept.indices = {kBeta0};
    intercept.kind = B::Kind::mwg;
    intercept.mwg_propose = [beta0_step](const Params& th, const B::Path&,
                                         const B::Series&, Rng& rng) {
      return gaussian_rw_block(th, kBeta0, beta0_step, rng);
    };
    intercept.cond_logpost = [self = *this](const Params& th, const B::Path& x,
                                            const B::Series& y) {
      double lp = log_normal_pdf(th[kBeta0], 0.0, kBeta0PriorVar);
      for (int t = 0; t < y.horizon(); ++t)
        lp += self.log_gt(t, y[t], x[t], th);
      return lp;
    };
    intercept.pmmh_propose = [beta0_step](const Params& th, Rng& rng) {
      return gaussian_rw_block(th, kBeta0, beta0_step, rng);
    };
    intercept.log_prior = [](const Params& th) {
      return log_normal_pdf(th[kBeta0], 0.0, kBeta0PriorVar);
    };
    out.blocks.push_back(std::move(intercept));

    for (int i = 0; i < m; ++i) {
      B tau;
      tau.name = "tau2_" + std::to_string(i + 1);
      tau.indices = {1 + i};
      tau.kind = B::Kind::gibbs;
      tau.gibbs_draw = [i](const Params& th, const B::Path& x,
                           const B::Series& y, Rng& rng) {
        const int T = y.horizon();
        double ssr = 0.0;
        for (int t = 0; t < T; ++t) {
          double prev = t == 0 ? 0.0 : x[t - 1][i];
          double r = x[t][i] - prev;
          ssr += r * r;
        }
        Params out_th = th;
        out_th[1 + i] =
            rng.inverse_gamma(kTauShape + 0.5 * T, kTauScale + 0.5 * ssr);
        return out_th;
      };
      tau.pmmh_propose = [i](const Params& th, Rng& rng) {
        return lognormal_rw_block(th, 1 + i, 0.5, rng);
      };
      tau.log_prior = [i](const Params& th) {
        return log_inverse_gamma_pdf(th[1 + i], kTauShape, kTauScale);
      };
      out.blocks.push_back(std::move(tau));
    }
    return out;
  }

 private:
  int m_;
  int design_trials_;
  double design_rate_;
};

}  // namespace espmcmc::models

#endif  // ESPMCMC_MODELS_BINOMIAL_REGRESSION_HPP
